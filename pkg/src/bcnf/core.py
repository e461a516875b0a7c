"""Planar piecewise-linear normal form with a degenerate left piece.

The map acts on (x, y) as

    x <= 0:  (x, y) -> (tau_L*x + y + mu, 0)
    x >= 0:  (x, y) -> (tau_R*x + y + mu, -delta_R*x)

The two branches agree on x = 0, so the map is continuous; the left piece
has determinant zero, which is the defining degeneracy of this family.
Points exactly on x = 0 are evaluated with the left branch.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateFixedPointError, DomainError, SingularCycleError

__all__ = [
    "NormalFormParams",
    "SkewTentParams",
    "Orbit",
    "CycleSolution",
    "FixedPointStability",
    "step",
    "orbit",
    "skew_tent_step",
    "skew_tent_orbit",
    "fixed_point_right",
    "fixed_point_left",
    "fixed_point_stability",
    "jacobian",
    "right_eigenvalues",
    "q_sequence",
    "power_AR",
    "cycle_matrix",
    "trace_LR_pow",
    "trace_L2R_pow",
    "solve_cycle",
    "symbols_of",
]

Point = tuple[float, float]

# |det(I - M)| below this (relative) threshold means the cycle has a
# multiplier of 1 and escapes to infinity.
_SINGULAR_RTOL = 1e-12


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class NormalFormParams:
    """Trace/determinant coordinates (tau_L, tau_R, delta_R) plus offset mu.

    The left determinant is identically zero and has no field.
    """

    tau_L: float
    tau_R: float
    delta_R: float
    mu: float

    def __post_init__(self):
        for name in ("tau_L", "tau_R", "delta_R", "mu"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))

    def with_mu(self, mu: float) -> "NormalFormParams":
        return NormalFormParams(self.tau_L, self.tau_R, self.delta_R, mu)


@dataclass(frozen=True)
class SkewTentParams:
    """Slopes and offset of the one-dimensional two-piece map."""

    s_L: float
    s_R: float
    eta: float

    def __post_init__(self):
        for name in ("s_L", "s_R", "eta"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))


def step(p: Point, params: NormalFormParams) -> Point:
    """One application of the map."""
    x, y = p
    if x <= 0.0:
        return (params.tau_L * x + y + params.mu, 0.0)
    return (params.tau_R * x + y + params.mu, -params.delta_R * x)


@dataclass
class Orbit:
    """A finite forward orbit; only finite points are stored.

    ``escaped_at`` is the iterate index at which the Euclidean norm first
    exceeded the divergence bound (None when the orbit stayed bounded).
    """

    points: np.ndarray
    escaped_at: int | None = None

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]


def orbit(p0: Point, params: NormalFormParams, n: int, bound: float | None = None) -> Orbit:
    """Forward orbit [p0, f(p0), ..., f^n(p0)], halting early on divergence."""
    if n < 0:
        raise ValueError("n must be >= 0")
    pts = np.empty((n + 1, 2))
    x, y = float(p0[0]), float(p0[1])
    pts[0] = (x, y)
    for k in range(n):
        x, y = step((x, y), params)
        if not (math.isfinite(x) and math.isfinite(y)):
            return Orbit(pts[: k + 1], escaped_at=k + 1)
        pts[k + 1] = (x, y)
        if bound is not None and math.hypot(x, y) > bound:
            return Orbit(pts[: k + 2], escaped_at=k + 1)
    return Orbit(pts)


def skew_tent_step(x: float, stp: SkewTentParams) -> float:
    if x <= 0.0:
        return stp.s_L * x + stp.eta
    return stp.s_R * x + stp.eta


def skew_tent_orbit(x0: float, stp: SkewTentParams, n: int) -> np.ndarray:
    xs = np.empty(n + 1)
    xs[0] = x = float(x0)
    for k in range(n):
        x = skew_tent_step(x, stp)
        xs[k + 1] = x
    return xs


def fixed_point_right(params: NormalFormParams) -> tuple[Point, bool]:
    """Fixed point of the right piece and whether it lies in x > 0."""
    den = 1.0 - params.tau_R + params.delta_R
    if den == 0.0:
        raise DegenerateFixedPointError("tau_R == 1 + delta_R: right piece has no unique fixed point")
    x = params.mu / den
    return (x, -params.delta_R * x), x > 0.0


def fixed_point_left(params: NormalFormParams) -> tuple[Point, bool]:
    """Fixed point of the left piece and whether it lies in x < 0."""
    den = 1.0 - params.tau_L
    if den == 0.0:
        raise DegenerateFixedPointError("tau_L == 1: left piece has no unique fixed point")
    x = params.mu / den
    return (x, 0.0), x < 0.0


@dataclass(frozen=True)
class FixedPointStability:
    point_left: Point
    point_right: Point
    admissible_left: bool
    admissible_right: bool
    stable_left: bool
    stable_right: bool


def fixed_point_stability(params: NormalFormParams) -> FixedPointStability:
    """Admissibility plus asymptotic stability flags for both fixed points.

    The right fixed point is an attractor iff |tau_R| - 1 < delta_R < 1 and
    mu > 0; the left iff |tau_L| < 1 and mu < 0.
    """
    zl, adm_l = fixed_point_left(params)
    zr, adm_r = fixed_point_right(params)
    stable_r = abs(params.tau_R) - 1.0 < params.delta_R < 1.0 and params.mu > 0.0
    stable_l = abs(params.tau_L) < 1.0 and params.mu < 0.0
    return FixedPointStability(zl, zr, adm_l, adm_r, stable_l, stable_r)


def jacobian(side: Literal["L", "R"], params: NormalFormParams) -> np.ndarray:
    if side == "L":
        return np.array([[params.tau_L, 1.0], [0.0, 0.0]])
    if side == "R":
        return np.array([[params.tau_R, 1.0], [-params.delta_R, 0.0]])
    raise ValueError(f"side must be 'L' or 'R', got {side!r}")


def right_eigenvalues(tau_R: float, delta_R: float) -> tuple[complex, complex]:
    """Eigenvalues of the right Jacobian (roots of z^2 - tau_R z + delta_R).

    Reporting convenience only: all powers and traces are computed via the
    real q recurrence, which needs no eigenvalue branches.
    """
    disc = cmath.sqrt(tau_R * tau_R - 4.0 * delta_R)
    return ((tau_R + disc) / 2.0, (tau_R - disc) / 2.0)


def q_sequence(n: int, tau_R: float, delta_R: float) -> float:
    """n-th term of q_k = tau_R*q_{k-1} - delta_R*q_{k-2}, q_0 = 0, q_1 = 1.

    Equals (l1^n - l2^n)/(l1 - l2) for the right-piece eigenvalues l1, l2;
    the recurrence form is valid for complex and repeated eigenvalues alike.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    qm, q = 0.0, 1.0
    for _ in range(n - 1):
        qm, q = q, tau_R * q - delta_R * qm
    return q


def power_AR(n: int, params: NormalFormParams) -> np.ndarray:
    """n-th power of the right Jacobian, assembled from the q recurrence."""
    if n < 0:
        raise ValueError("n must be >= 0")
    tr, dr = params.tau_R, params.delta_R
    qn = q_sequence(n, tr, dr)
    qn1 = q_sequence(n + 1, tr, dr)
    return np.array([[qn1, qn], [-dr * qn, qn1 - tr * qn]])


def _validate_word(word: str) -> str:
    if not word or any(c not in "LR" for c in word):
        raise ValueError(f"word must be a non-empty string over {{L, R}}, got {word!r}")
    return word


def cycle_matrix(word: str, params: NormalFormParams) -> np.ndarray:
    """Ordered Jacobian product for the word, first symbol leftmost.

    ``cycle_matrix("LR")`` is A_L @ A_R, so a word L R^{p-1} yields
    A_L A_R^{p-1}.  Stability multipliers are rotation-invariant, so this
    matrix carries the same spectrum as the p-step derivative at any point
    of the corresponding cycle.
    """
    _validate_word(word)
    m = np.eye(2)
    for sym in word:
        m = m @ jacobian(sym, params)  # type: ignore[arg-type]
    return m


def trace_LR_pow(p: int, params: NormalFormParams) -> float:
    """trace(A_L A_R^{p-1}) via the q recurrence."""
    if p < 2:
        raise ValueError("p must be >= 2")
    tr, dr = params.tau_R, params.delta_R
    return params.tau_L * q_sequence(p, tr, dr) - dr * q_sequence(p - 1, tr, dr)


def trace_L2R_pow(p: int, params: NormalFormParams) -> float:
    """trace(A_L^2 A_R^{p-2}) via the q recurrence."""
    if p < 3:
        raise ValueError("p must be >= 3")
    tl, tr, dr = params.tau_L, params.tau_R, params.delta_R
    return tl * tl * q_sequence(p - 1, tr, dr) - tl * dr * q_sequence(p - 2, tr, dr)


def symbols_of(points: np.ndarray) -> tuple[str, bool]:
    """Itinerary of the given points: 'L' for x < 0, 'R' for x > 0.

    Points exactly on x = 0 are reported as 'L' with the boundary flag set,
    since the itinerary is only well defined off the switching manifold.
    """
    syms = []
    boundary = False
    for x in np.asarray(points)[:, 0]:
        if x == 0.0:
            boundary = True
        syms.append("L" if x <= 0.0 else "R")
    return "".join(syms), boundary


@dataclass
class CycleSolution:
    """Periodic solution following a prescribed symbol sequence."""

    points: np.ndarray
    word: str
    multiplier_matrix: np.ndarray
    admissible: bool
    on_boundary: bool

    @property
    def period(self) -> int:
        return len(self.word)

    @property
    def multipliers(self) -> tuple[complex, complex]:
        t = float(np.trace(self.multiplier_matrix))
        d = float(np.linalg.det(self.multiplier_matrix))
        disc = cmath.sqrt(t * t - 4.0 * d)
        return ((t + disc) / 2.0, (t - disc) / 2.0)

    @property
    def stable(self) -> bool:
        m1, m2 = self.multipliers
        return max(abs(m1), abs(m2)) < 1.0


def solve_cycle(word: str, params: NormalFormParams) -> CycleSolution:
    """Solve the affine fixed-point problem for the word's composed map.

    Composing the per-symbol pieces around the cycle gives v -> M v + b;
    the base point solves (I - M) v = b.  Raises SingularCycleError when
    I - M is numerically singular (multiplier 1: the cycle escapes).
    """
    _validate_word(word)
    b = np.array([params.mu, 0.0])
    m = np.eye(2)
    c = np.zeros(2)
    for sym in word:
        a = jacobian(sym, params)  # type: ignore[arg-type]
        m = a @ m
        c = a @ c + b
    imm = np.eye(2) - m
    det = imm[0, 0] * imm[1, 1] - imm[0, 1] * imm[1, 0]
    if abs(det) < _SINGULAR_RTOL * (1.0 + np.abs(m).max()):
        raise SingularCycleError(f"{word}-cycle has multiplier 1 at {params}")
    v0 = np.linalg.solve(imm, c)
    pts = np.empty((len(word), 2))
    pts[0] = v0
    for i, sym in enumerate(word[:-1]):
        a = jacobian(sym, params)  # type: ignore[arg-type]
        pts[i + 1] = a @ pts[i] + b
    itinerary, boundary = symbols_of(pts)
    admissible = not boundary and itinerary == word
    return CycleSolution(pts, word, m, admissible, boundary)
