"""Seasonal influenza outbreak map: implicit outbreak sizes, season-to-season
dynamics, and the reduction to the degenerate normal form at the epidemic
threshold.

State (S, T) holds the fully and partially susceptible fractions at the start
of a season.  The outbreak attack rate p solves a final-size equation and is
zero when the effective reproduction number r = R0*(S + k*T) is at most one;
that branch maps onto the line S' + T' = 1, which is the degenerate-range
piece behind the zero left determinant of the reduced normal form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import ClassifierConfig, classify
from .core import NormalFormParams
from .errors import NoBracketError

__all__ = [
    "FluParams",
    "outbreak_size",
    "flu_step",
    "flu_normal_form",
    "flu_k_window",
    "flu_orbit",
    "flu_bif_diagram",
    "find_period_doubling",
    "normal_form_window_scan",
]


@dataclass(frozen=True)
class FluParams:
    k: float
    c: float
    R0: float

    def __post_init__(self):
        if not 0.0 < self.k < 1.0:
            raise ValueError("k must be in (0, 1)")
        if not 0.0 < self.c < 1.0:
            raise ValueError("c must be in (0, 1)")
        if self.R0 <= 0.0:
            raise ValueError("R0 must be > 0")


def reproduction_number(S: float, T: float, prm: FluParams) -> float:
    return prm.R0 * (S + prm.k * T)


def outbreak_size(S: float, T: float, prm: FluParams, eps: float = 1e-14) -> float:
    """Attack rate of one season: zero below threshold, else the positive
    root of p = S(1 - e^(-R0 p)) + T(1 - e^(-k R0 p)).

    The root is isolated away from the trivial p = 0 solution by bracketing
    on [eps, 1] and polished by Newton to 1e-13.
    """
    if S < 0.0 or T < 0.0:
        raise ValueError("S and T must be non-negative")
    if reproduction_number(S, T, prm) <= 1.0:
        return 0.0

    def f(p):
        # expm1 keeps the residual accurate where 1 - e^(-R0 p) underflows
        # against the ulp of 1 (r barely above threshold).
        return (-S * math.expm1(-prm.R0 * p)
                - T * math.expm1(-prm.k * prm.R0 * p) - p)

    lo, hi = eps, 1.0
    flo = f(lo)
    if flo <= 0.0:
        raise NoBracketError(f"outbreak equation failed to bracket at S={S}, T={T}")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    for _ in range(4):
        fp = f(p)
        dp = (S * prm.R0 * math.exp(-prm.R0 * p)
              + T * prm.k * prm.R0 * math.exp(-prm.k * prm.R0 * p) - 1.0)
        if dp == 0.0:
            break
        step = fp / dp
        p -= step
        if abs(step) < 1e-13:
            break
    return p


def flu_step(state: tuple[float, float], prm: FluParams) -> tuple[float, float]:
    """Season-to-season update of (S, T)."""
    S, T = state
    p = outbreak_size(S, T, prm)
    w = S + T - 1.0
    return (1.0 + prm.c * (w - p), -prm.c * w)


def flu_normal_form(k: float, c: float, mu: float = 1.0) -> NormalFormParams:
    """Normal-form coefficients of the border collision at R0 = 1."""
    return NormalFormParams(0.0, -2.0 * c, 2.0 * (1.0 - k) * c * c, mu)


def flu_k_window(c: float) -> tuple[float, float]:
    """k-interval on which the reduced map's fixed point is attracting."""
    return (1.0 - 1.0 / (2.0 * c * c), 1.0 - 1.0 / c + 1.0 / (2.0 * c * c))


def _outbreak_vec(S, T, k, R0):
    """Vectorised outbreak sizes (bisection plus Newton polish)."""
    r = R0 * (S + k * T)
    out = np.zeros_like(S)
    m = r > 1.0
    if not np.any(m):
        return out
    s, t, kk = S[m], T[m], np.broadcast_to(k, S.shape)[m]

    def f(p):
        return -s * np.expm1(-R0 * p) - t * np.expm1(-kk * R0 * p) - p

    lo = np.full(s.shape, 1e-14)
    hi = np.ones(s.shape)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pos = f(mid) > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    p = 0.5 * (lo + hi)
    for _ in range(3):
        dp = s * R0 * np.exp(-R0 * p) + t * kk * R0 * np.exp(-kk * R0 * p) - 1.0
        p = p - np.where(dp != 0.0, f(p) / dp, 0.0)
    out[m] = p
    return out


def flu_orbit(prm: FluParams, n: int, state: tuple[float, float] = (0.5, 0.2)) -> np.ndarray:
    """n+1 states of the season map from the given start."""
    pts = np.empty((n + 1, 2))
    z = (float(state[0]), float(state[1]))
    pts[0] = z
    for i in range(n):
        z = flu_step(z, prm)
        pts[i + 1] = z
    return pts


def flu_bif_diagram(c: float, R0: float, ks, transient: int = 2000,
                    record: int = 500, state: tuple[float, float] = (0.5, 0.2)):
    """Post-transient S values per k (the bifurcation diagram's columns)."""
    ks = np.asarray(ks, dtype=float)
    S = np.full(ks.shape, float(state[0]))
    T = np.full(ks.shape, float(state[1]))
    for _ in range(transient):
        p = _outbreak_vec(S, T, ks, R0)
        w = S + T - 1.0
        S, T = 1.0 + c * (w - p), -c * w
    recs = np.empty((record, ks.size))
    for i in range(record):
        p = _outbreak_vec(S, T, ks, R0)
        w = S + T - 1.0
        S, T = 1.0 + c * (w - p), -c * w
        recs[i] = S
    return ks, recs


def _step_clamped(z, prm):
    # Newton trial points may leave the state simplex; clamp for evaluation.
    return flu_step((max(z[0], 0.0), max(z[1], 0.0)), prm)


def _flu_fixed_point(prm: FluParams) -> tuple[float, float]:
    z = (0.5, 0.2)
    for _ in range(400):
        z = flu_step(z, prm)
    # Near a period doubling the transient oscillates; the 2-cycle midpoint
    # seeds Newton reliably.
    z = tuple(0.5 * (a + b) for a, b in zip(z, flu_step(z, prm)))
    for _ in range(60):
        f0 = _step_clamped(z, prm)
        g = (f0[0] - z[0], f0[1] - z[1])
        if math.hypot(*g) < 1e-13:
            break
        h = 1e-8
        fu = _step_clamped((z[0] + h, z[1]), prm)
        fv = _step_clamped((z[0], z[1] + h), prm)
        j = np.array([[(fu[0] - f0[0]) / h - 1.0, (fv[0] - f0[0]) / h],
                      [(fu[1] - f0[1]) / h, (fv[1] - f0[1]) / h - 1.0]])
        dz = np.linalg.solve(j, np.array(g))
        z = (z[0] - dz[0], z[1] - dz[1])
    return z


def _pd_multiplier(prm: FluParams) -> float:
    z = _flu_fixed_point(prm)
    h = 1e-7
    f0 = _step_clamped(z, prm)
    fu = _step_clamped((z[0] + h, z[1]), prm)
    fv = _step_clamped((z[0], z[1] + h), prm)
    j = np.array([[(fu[0] - f0[0]) / h, (fv[0] - f0[0]) / h],
                  [(fu[1] - f0[1]) / h, (fv[1] - f0[1]) / h]])
    return float(np.linalg.eigvals(j).real.min())


def find_period_doubling(c: float, R0: float, k_lo: float, k_hi: float,
                         tol: float = 1e-6) -> float:
    """k at which the annual-outbreak fixed point's multiplier reaches -1."""
    def g(k):
        return _pd_multiplier(FluParams(k, c, R0)) + 1.0

    glo = g(k_lo)
    if (glo < 0.0) == (g(k_hi) < 0.0):
        raise NoBracketError("period-doubling multiplier does not cross -1 in the bracket")
    while k_hi - k_lo > tol:
        mid = 0.5 * (k_lo + k_hi)
        if (g(mid) < 0.0) == (glo < 0.0):
            k_lo = mid
        else:
            k_hi = mid
    return 0.5 * (k_lo + k_hi)


def normal_form_window_scan(c: float, k_lo: float, k_hi: float, dk: float = 1e-3,
                            cfg: ClassifierConfig = ClassifierConfig()) -> tuple[float, float]:
    """Endpoints of the Periodic(1) window of the reduced map along k.

    Classifies the normal-form parameters on a k grid at mu = 1 and returns
    the first and last k whose attractor is the fixed point.
    """
    ks = np.arange(k_lo, k_hi + 0.5 * dk, dk)
    flags = []
    for k in ks:
        cls = classify(flu_normal_form(k, c), cfg)
        flags.append(cls.kind == "periodic" and cls.period == 1)
    flags = np.array(flags)
    if not flags.any():
        raise NoBracketError("no Periodic(1) window found in the scan range")
    idx = np.nonzero(flags)[0]
    return float(ks[idx[0]]), float(ks[idx[-1]])
