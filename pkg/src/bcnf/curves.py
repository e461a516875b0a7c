"""Bifurcation-curve formulas and implicit-curve tracing in (tau_R, delta_R).

Closed-form lines, trace-condition boundaries of periodicity regions,
border-collision loci of cycles, shrinking-point curves, homoclinic corners,
component-doubling curves, and the induced one-dimensional return map.  All
eigenvalue-symmetric expressions go through the real q recurrence, so complex
and repeated right-piece eigenvalues need no special-casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import ClassifierConfig, classify, count_components
from .core import NormalFormParams, fixed_point_left, orbit, q_sequence, solve_cycle, step
from .errors import DomainError, SingularCycleError

__all__ = [
    "CurveSample",
    "zeta",
    "renorm_g",
    "doubling_residual_1d",
    "g_minus",
    "xi_residual_neg",
    "xi_curve",
    "explicit_line",
    "EXPLICIT_LINES",
    "trace_boundary",
    "gamma_bcb_curve",
    "rotation_anchor",
    "x_tilde",
    "theta_residual",
    "theta_curve",
    "kappa_residual",
    "kappa_curve",
    "right_orbit",
    "induced_return",
    "induced_fixed_point",
    "superstable_residual",
    "eta_n_homoclinic",
    "stability_triangle",
    "trace_curve",
]


# ---------------------------------------------------------------------------
# scalar formulas

def zeta(s_L: float, s_R: float) -> float:
    """Divergence function of the one-dimensional two-slope map."""
    return s_L * s_R + s_L - s_R


def renorm_g(s_L: float, s_R: float) -> tuple[float, float]:
    """One renormalisation step on the slope pair."""
    return (s_R * s_R, s_L * s_R)


def doubling_residual_1d(k: int, s_L: float, s_R: float) -> float:
    """zeta after k renormalisation steps; k = 0 is the no-attractor boundary.

    For k >= 1 the zero set is where the attractor's interval count changes
    from 2^{k-1} to 2^k.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    for _ in range(k):
        s_L, s_R = renorm_g(s_L, s_R)
    return zeta(s_L, s_R)


def g_minus(tau_L: float, tau_R: float, delta_R: float) -> tuple[float, float]:
    """Slope pair of the second-iterate map on the region mapping into x < 0."""
    return (tau_L * tau_L, tau_L * tau_R - delta_R)


def xi_residual_neg(k: int, tau_L: float, tau_R: float, delta_R: float) -> float:
    """Component-doubling residual for mu < 0: zeta(g^{k-1}(g_minus))."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return doubling_residual_1d(k - 1, *g_minus(tau_L, tau_R, delta_R))


def rotation_anchor(rho: float) -> float:
    """tau_R at which the rotation-number-rho tongue meets delta_R = 1."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must be in (0, 1)")
    return 2.0 * math.cos(2.0 * math.pi * rho)


def x_tilde(tau_R: float, delta_R: float) -> float:
    """Axis point whose second right-piece image lies on the switching manifold."""
    den = delta_R - tau_R * tau_R
    if den == 0.0:
        raise DomainError("x_tilde undefined at delta_R == tau_R^2")
    return (tau_R + 1.0) / den


def theta_residual(i: int, tau_R: float, delta_R: float) -> float:
    """Shrinking-point curve theta_i; zero when the (j,k) manifold hits occur.

    theta_1 uses (j,k)=(2,4), theta_2 (2,3), theta_3 (3,4); all are
    independent of tau_L since only right-half-plane iterates are involved.
    """
    t, d = tau_R, delta_R
    if i == 1:
        return t**3 + t * t * d + t * d * d + t * t - t * d - d
    if i == 2:
        return t * t + t * d + d * d - d
    if i == 3:
        return t**3 + t * t * d + t * d * d + d**3 - 2.0 * t * d - d * d
    raise ValueError("theta index must be 1, 2, or 3")


def kappa_residual(n: int, tau_R: float, delta_R: float) -> float:
    """Shrinking-point curve kappa_n: origin hits the manifold in n right steps.

    Real q-recurrence form 1 - q_{n+1} + delta_R*q_n; vanishes exactly where
    the first component of the n-th right-piece image of the origin (mu = 1)
    is zero, away from the degenerate fixed-point line tau_R = 1 + delta_R.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    return 1.0 - q_sequence(n + 1, tau_R, delta_R) + delta_R * q_sequence(n, tau_R, delta_R)


def superstable_residual(tau_L: float, tau_R: float, delta_R: float) -> float:
    """Zero iff trace(A_L A_R^4) = 0: the superstable-cycle curve."""
    return ((tau_L + 2.0 * tau_R) * delta_R * delta_R
            - (3.0 * tau_L + tau_R) * tau_R * tau_R * delta_R
            + tau_L * tau_R**4)


def induced_return(x: float, p: int, params: NormalFormParams) -> float:
    """One right step followed by p-1 left steps, as a map of the x-axis."""
    if p < 2:
        raise ValueError("p must be >= 2")
    tl = params.tau_L
    if tl == 1.0:
        raise DomainError("induced return undefined at tau_L == 1")
    slope = tl ** (p - 2) * (tl * params.tau_R - params.delta_R)
    return slope * x + (1.0 - tl**p) / (1.0 - tl) * params.mu


def induced_fixed_point(p: int, params: NormalFormParams) -> float:
    """Fixed point of the induced return map (right-most cycle point)."""
    tl = params.tau_L
    if tl == 1.0:
        raise DomainError("induced return undefined at tau_L == 1")
    slope = tl ** (p - 2) * (tl * params.tau_R - params.delta_R)
    if slope == 1.0:
        raise DomainError("induced return has no unique fixed point (slope 1)")
    return (1.0 - tl**p) / ((1.0 - tl) * (1.0 - slope)) * params.mu


# ---------------------------------------------------------------------------
# closed-form lines

def _line_eta3_neg(tl, tr):
    if tl == -1.0:
        raise DomainError("eta_3 line undefined at tau_L == -1")
    return tl * tr + tl / (tl + 1.0)


def _line_gamma3_neg(tl, tr):
    if tl == 0.0:
        raise DomainError("gamma_3 line undefined at tau_L == 0")
    return -((tl + 1.0) * tr + 1.0) / tl


def _line_alpha3_pos(tl, tr):
    if tl == 0.0:
        raise DomainError("alpha_3 line undefined at tau_L == 0")
    return tl * tr - 1.0 / tl


def _line_gamma3_pos(tl, tr):
    if tl == 0.0:
        raise DomainError("gamma_3 line undefined at tau_L == 0")
    return -tr - (1.0 + tr) / tl


def line_beta_p_pos(p: int, tl: float, tr: float) -> float:
    """Period-doubling boundary of the L^{p-1}R region (mu > 0)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if tl == 0.0:
        raise DomainError("beta_p line undefined at tau_L == 0")
    return tl * tr + 1.0 / tl ** (p - 2)


def line_gamma_p_prime_pos(p: int, tl: float, tr: float) -> float:
    """Border-collision boundary of the L^{p-1}R region (mu > 0)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if tl in (0.0, 1.0):
        raise DomainError("gamma_p' line undefined at tau_L in {0, 1}")
    return tl * tr - (1.0 / tl ** (p - 2)) * (1.0 - (1.0 - tl**p) / (1.0 - tl))


# name -> delta_R(tau_L, tau_R); entries taking a period live in the p-family map
EXPLICIT_LINES = {
    "eta3": _line_eta3_neg,
    "alpha2": lambda tl, tr: tl * tr - 1.0,
    "beta2": lambda tl, tr: tl * tr + 1.0,
    "gamma2": lambda tl, tr: -tr - 1.0,
    "gamma3": _line_gamma3_neg,
    "alpha3_l2r": _line_alpha3_pos,
    "gamma3_l2r": _line_gamma3_pos,
    "gamma3p_l2r": lambda tl, tr: tl * tr + tl + 1.0,
    "centre": lambda tl, tr: 1.0,
}

_P_FAMILY_LINES = {
    "beta_lpr": line_beta_p_pos,
    "gammap_lpr": line_gamma_p_prime_pos,
}


def explicit_line(name: str, tau_L: float, tau_R: float, p: int | None = None) -> float:
    """delta_R of a named closed-form line at the given tau_R."""
    if name in EXPLICIT_LINES:
        return EXPLICIT_LINES[name](tau_L, tau_R)
    if name in _P_FAMILY_LINES:
        if p is None:
            raise ValueError(f"line {name!r} needs a period p")
        return _P_FAMILY_LINES[name](p, tau_L, tau_R)
    raise ValueError(f"unknown explicit line {name!r}")


# ---------------------------------------------------------------------------
# tracing engine

@dataclass
class CurveSample:
    """Traced curve: polyline(s) of (tau_R, delta_R) points with context."""

    curve_id: str
    tau_L: float
    mu: float
    points: np.ndarray
    branches: list[np.ndarray] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["curve_id,tau_L,mu",
                 f"{self.curve_id},{self.tau_L:.17g},{self.mu:.17g}",
                 "tau_R,delta_R"]
        for tr, dr in self.points:
            lines.append(f"{tr:.17g},{dr:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "CurveSample":
        rows = [r.strip() for r in text.strip().splitlines()]
        if rows[0] != "curve_id,tau_L,mu" or rows[2] != "tau_R,delta_R":
            raise ValueError("not a curve-sample csv")
        cid, tl, mu = rows[1].split(",")
        pts = np.array([[float(a) for a in r.split(",")] for r in rows[3:]])
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        return cls(cid, float(tl), float(mu), pts)


def _bisect(f, lo, hi, flo, tol=1e-12, max_iter=200):
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            return mid
        fm = f(mid)
        if fm == 0.0 or not math.isfinite(fm):
            return mid
        if (flo < 0.0) != (fm < 0.0):
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _link_branches(cols: list[tuple[float, list[float]]]) -> list[np.ndarray]:
    """Nearest-neighbour continuation of per-column roots into polylines."""
    open_branches: list[list[tuple[float, float]]] = []
    done: list[list[tuple[float, float]]] = []
    for tr, roots in cols:
        used = [False] * len(roots)
        still_open = []
        for br in open_branches:
            last = br[-1][1]
            best, best_d = -1, math.inf
            for j, r in enumerate(roots):
                if not used[j] and abs(r - last) < best_d:
                    best, best_d = j, abs(r - last)
            if best >= 0 and best_d < 0.5 * (1.0 + abs(last)):
                used[best] = True
                br.append((tr, roots[best]))
                still_open.append(br)
            else:
                done.append(br)
        for j, r in enumerate(roots):
            if not used[j]:
                still_open.append([(tr, r)])
        open_branches = still_open
    done.extend(open_branches)
    return [np.array(br) for br in done if br]


def trace_curve(residual, window: tuple[float, float, float, float],
                curve_id: str, tau_L: float, mu: float,
                n_cols: int = 400, n_scan: int = 400, tol: float = 1e-12,
                scan: str = "dr") -> CurveSample:
    """Trace residual(tau_R, delta_R) = 0 by scan-and-bisect.

    With ``scan="dr"`` each tau_R column is scanned along delta_R (for curves
    transversal to verticals); ``scan="tr"`` scans tau_R along delta_R rows
    (for near-vertical curves such as the kappa family).  Multiple roots per
    line are retained and linked into branches by nearest-neighbour
    continuation.
    """
    tr_lo, tr_hi, dr_lo, dr_hi = window
    if scan == "dr":
        outer = np.linspace(tr_lo, tr_hi, n_cols)
        inner_lo, inner_hi = dr_lo, dr_hi
    elif scan == "tr":
        outer = np.linspace(dr_lo, dr_hi, n_cols)
        inner_lo, inner_hi = tr_lo, tr_hi
    else:
        raise ValueError("scan must be 'dr' or 'tr'")
    cols = []
    for o in outer:
        grid = np.linspace(inner_lo, inner_hi, n_scan)
        vals = np.array([(residual(o, d) if scan == "dr" else residual(d, o)) for d in grid])
        roots = []
        for i in range(len(grid) - 1):
            a, b = vals[i], vals[i + 1]
            if not (math.isfinite(a) and math.isfinite(b)):
                continue
            if a == 0.0:
                roots.append(grid[i])
            elif (a < 0.0) != (b < 0.0):
                fn = (lambda d: residual(o, d)) if scan == "dr" else (lambda t: residual(t, o))
                r = _bisect(fn, grid[i], grid[i + 1], a, tol)
                fr = fn(r)
                # A sign change can also come from a pole (e.g. the singular
                # line of a cycle's rational coordinates); keep genuine roots
                # only, where the residual has collapsed relative to the
                # bracket values.
                if math.isfinite(fr) and abs(fr) <= 1e-3 * min(abs(a), abs(b)):
                    roots.append(r)
        if vals[-1] == 0.0:
            roots.append(grid[-1])
        cols.append((o, roots))
    branches = _link_branches(cols)
    if scan == "tr":
        branches = [br[:, ::-1] for br in branches]
    pts = (np.concatenate(branches) if branches else np.empty((0, 2)))
    if len(pts):
        pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    return CurveSample(curve_id, tau_L, mu, pts, branches)


# ---------------------------------------------------------------------------
# traced curve families

def trace_boundary(regime: str, sign: int, p: int, tau_L: float,
                   window: tuple[float, float, float, float],
                   n_cols: int = 400) -> CurveSample:
    """Stability boundary where the cycle's non-zero multiplier equals sign.

    regime 'lr' is the L R^{p-1} family (trace of A_L A_R^{p-1}), regime
    'l2r' the L^2 R^{p-2} family.  sign +1 gives the alpha boundaries
    (multiplier 1, cycle escapes), -1 the beta boundaries (period doubling).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if regime == "lr":
        if p < 2:
            raise ValueError("p must be >= 2 for the LR^{p-1} family")

        def residual(tr, dr):
            return (tau_L * q_sequence(p, tr, dr)
                    - dr * q_sequence(p - 1, tr, dr)) - sign
    elif regime == "l2r":
        if p < 3:
            raise ValueError("p must be >= 3 for the L^2R^{p-2} family")

        def residual(tr, dr):
            return (tau_L * tau_L * q_sequence(p - 1, tr, dr)
                    - tau_L * dr * q_sequence(p - 2, tr, dr)) - sign
    else:
        raise ValueError("regime must be 'lr' or 'l2r'")
    name = {1: "alpha", -1: "beta"}[sign]
    return trace_curve(residual, window, f"{name}{p}_{regime}", tau_L,
                       -1.0 if regime == "lr" else 1.0, n_cols=n_cols)


_WORDS = {
    "lr": lambda p: "L" + "R" * (p - 1),
    "l2r": lambda p: "LL" + "R" * (p - 2),
    "lpr": lambda p: "L" * (p - 1) + "R",
}

# Cycle point (by index into the word) that hits the switching manifold on
# each border-collision boundary, verified against the closed-form lines.
_BCB_POINT = {
    ("lr", "gamma"): lambda p: 0 if p == 2 else p - 1,
    ("l2r", "gamma"): lambda p: 0,
    ("l2r", "gamma_prime"): lambda p: 1,
    ("lpr", "gamma_prime"): lambda p: p - 2,
}


def gamma_bcb_curve(regime: str, p: int, tau_L: float,
                    window: tuple[float, float, float, float],
                    kind: str = "gamma", point_index: int | None = None,
                    n_cols: int = 400) -> CurveSample:
    """Border-collision locus: one designated cycle point has x = 0.

    The default index per family is the point verified to hit the manifold
    on the corresponding closed-form line; pass ``point_index`` to trace the
    locus of any other point of the cycle.
    """
    word = _WORDS[regime](p)
    mu = -1.0 if regime == "lr" else 1.0
    idx = _BCB_POINT[(regime, kind)](p) if point_index is None else point_index

    def residual(tr, dr):
        try:
            sol = solve_cycle(word, NormalFormParams(tau_L, tr, dr, mu))
        except SingularCycleError:
            return math.nan
        return sol.points[idx, 0]

    label = "gammap" if kind == "gamma_prime" else "gamma"
    return trace_curve(residual, window, f"{label}{p}_{regime}", tau_L, mu, n_cols=n_cols)


def eta_n_homoclinic(n: int, tau_L: float, window: tuple[float, float, float, float],
                     n_cols: int = 400, y_tol: float = 1e-6) -> CurveSample:
    """Homoclinic corner: the n-th iterate of the origin equals (x^L, 0).

    Valid for mu > 0 with tau_L > 1 (saddle left fixed point).  Roots of the
    x-difference whose y-difference exceeds ``y_tol`` (the pre-image was not
    in the left half-plane) are discarded.
    """
    if n < 3:
        raise ValueError("n must be >= 3")

    def iterate(tr, dr):
        prm = NormalFormParams(tau_L, tr, dr, 1.0)
        x, y = 0.0, 0.0
        for _ in range(n):
            x, y = step((x, y), prm)
            if not (math.isfinite(x) and math.isfinite(y)):
                return math.nan, math.nan
        return x, y

    def residual(tr, dr):
        prm = NormalFormParams(tau_L, tr, dr, 1.0)
        try:
            (xl, _), _ = fixed_point_left(prm)
        except Exception:
            return math.nan
        x, _ = iterate(tr, dr)
        return x - xl

    sample = trace_curve(residual, window, f"eta{n}", tau_L, 1.0, n_cols=n_cols)
    kept = []
    for tr, dr in sample.points:
        _, y = iterate(tr, dr)
        if abs(y) <= y_tol:
            kept.append((tr, dr))
    sample.points = np.array(kept) if kept else np.empty((0, 2))
    sample.branches = [sample.points] if kept else []
    return sample


def _count_transition(count_at, lo, hi, c_a, c_b, tol):
    """Parameter where the component count changes between c_a and c_b.

    Scans [lo, hi], then shrinks towards the boundary of each clean count
    from its own side; the returned value is the midpoint of the remaining
    ambiguous band (intermediate counts appear while the gap between
    components closes below the sampling resolution).  None when either
    clean count is absent from the scan.
    """
    scan = np.linspace(lo, hi, 25)
    counts = [count_at(d) for d in scan]
    if c_a not in counts or c_b not in counts:
        return None
    ia = max(i for i, c in enumerate(counts) if c == c_a)
    ib = min(i for i, c in enumerate(counts) if c == c_b)
    if ia > ib:
        ia = min(i for i, c in enumerate(counts) if c == c_a)
        ib = max(i for i, c in enumerate(counts) if c == c_b)
        if ib > ia:
            return None
    a, b = scan[ia], scan[ib]
    # a-side: push the last clean c_a towards b; b-side symmetric.
    edge_a, probe = a, b
    while abs(probe - edge_a) > tol:
        mid = 0.5 * (edge_a + probe)
        if count_at(mid) == c_a:
            edge_a = mid
        else:
            probe = mid
    edge_b, probe = b, edge_a
    while abs(edge_b - probe) > tol:
        mid = 0.5 * (edge_b + probe)
        if count_at(mid) == c_b:
            edge_b = mid
        else:
            probe = mid
    return 0.5 * (edge_a + edge_b)


def xi_curve(k: int, tau_L: float, window: tuple[float, float, float, float],
             mu: float = -1.0, n_cols: int = 400,
             count_cfg: ClassifierConfig | None = None,
             count_tol: float = 2e-3) -> CurveSample:
    """Component-doubling curve xi_k (2^{k-1} <-> 2^k components).

    For mu < 0 this is the renormalisation residual zeta(g^{k-1}(g_minus)),
    traced by bisection (the k = 1 member has the closed form
    delta_R = tau_L*tau_R + tau_L^2/(tau_L^2 - 1)).

    For mu > 0 the second iterate is not reducible to a slope pair (the
    right-piece square has non-zero determinant), so the curve is traced
    numerically as the locus where the brute-force component count changes,
    bisected to ``count_tol`` in delta_R.  This is slower; use modest n_cols.
    """
    if mu < 0:
        def residual(tr, dr):
            return xi_residual_neg(k, tau_L, tr, dr)
        return trace_curve(residual, window, f"xi{k}", tau_L, -1.0, n_cols=n_cols)

    cfg = count_cfg if count_cfg is not None else ClassifierConfig()
    lo_count, hi_count = 2 ** (k - 1), 2 ** k
    tr_lo, tr_hi, dr_lo, dr_hi = window

    def count_at(tr, dr):
        prm = NormalFormParams(tau_L, tr, dr, mu)
        try:
            return count_components(prm, cfg, n_samples=1 << 17, max_seed_tries=8).count
        except Exception:
            return 0

    pts = []
    for tr in np.linspace(tr_lo, tr_hi, n_cols):
        dr = _count_transition(lambda d: count_at(tr, d), dr_lo, dr_hi,
                               lo_count, hi_count, count_tol)
        if dr is not None:
            pts.append((tr, dr))
    points = np.array(pts) if pts else np.empty((0, 2))
    return CurveSample(f"xi{k}", tau_L, mu, points, [points] if len(points) else [],
                       meta={"method": "count-transition", "tol": count_tol})


def right_orbit(x0: float, y0: float, tau_R: float, delta_R: float, n: int,
                mu: float = 1.0) -> np.ndarray:
    """n iterates of the right piece only (no branch switching)."""
    pts = np.empty((n + 1, 2))
    x, y = float(x0), float(y0)
    pts[0] = (x, y)
    for i in range(n):
        x, y = tau_R * x + y + mu, -delta_R * x
        pts[i + 1] = (x, y)
    return pts


def theta_curve(i: int, window: tuple[float, float, float, float],
                n_cols: int = 400, scan: str = "dr") -> CurveSample:
    """Traced shrinking-point curve theta_i (independent of tau_L)."""
    def residual(tr, dr):
        return theta_residual(i, tr, dr)

    return trace_curve(residual, window, f"theta{i}", math.nan, 1.0,
                       n_cols=n_cols, scan=scan)


def kappa_curve(n: int, window: tuple[float, float, float, float],
                n_cols: int = 400, hit_tol: float = 1e-8) -> CurveSample:
    """Traced shrinking-point curve kappa_n (independent of tau_L).

    These curves are near-vertical, so tau_R is scanned along delta_R rows.
    The residual shares a factor with the degenerate fixed-point line
    tau_R = 1 + delta_R; roots failing the defining iterate condition
    (n-th right image of the origin on the manifold) are discarded.
    """
    def residual(tr, dr):
        return kappa_residual(n, tr, dr)

    sample = trace_curve(residual, window, f"kappa{n}", math.nan, 1.0,
                         n_cols=n_cols, scan="tr")
    kept = [(tr, dr) for tr, dr in sample.points
            if abs(right_orbit(0.0, 0.0, tr, dr, n)[n, 0]) <= hit_tol * (1.0 + abs(tr) + abs(dr))]
    sample.points = np.array(kept) if kept else np.empty((0, 2))
    sample.branches = [sample.points] if kept else []
    return sample


def stability_triangle(window: tuple[float, float, float, float],
                       n_cols: int = 100) -> list[CurveSample]:
    """The three fixed-point stability edges, clipped to the window."""
    tr_lo, tr_hi, dr_lo, dr_hi = window
    out = []
    for cid, f in (("triangle_top", lambda tr: 1.0),
                   ("triangle_right", lambda tr: tr - 1.0),
                   ("triangle_left", lambda tr: -tr - 1.0)):
        pts = [(tr, f(tr)) for tr in np.linspace(tr_lo, tr_hi, n_cols)
               if dr_lo <= f(tr) <= dr_hi]
        arr = np.array(pts) if pts else np.empty((0, 2))
        out.append(CurveSample(cid, math.nan, math.nan, arr, [arr] if len(arr) else []))
    return out
