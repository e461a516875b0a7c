"""Attractor classification: bounded-orbit detection, period detection,
maximal Lyapunov exponent, component counting, and basin rasters.

The per-orbit procedure is the brute-force one behind the two-parameter
bifurcation rasters: iterate a long burn-in from a random initial point,
declare divergence if the norm bound is exceeded, detect a short period by
probing a few more iterates, and otherwise separate chaos from
quasi-periodicity (or long periods) by the sign of the maximal Lyapunov
exponent against a small threshold.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from . import backend
from .core import NormalFormParams
from .errors import DivergedOrbitError

__all__ = [
    "CODE_DIVERGING",
    "CODE_PERIODIC",
    "CODE_CHAOTIC",
    "CODE_QUASI",
    "ClassifierConfig",
    "AttractorClass",
    "ComponentCount",
    "Attractor",
    "classify",
    "detect_period",
    "lyapunov_max",
    "count_components",
    "find_attractors",
    "basin_raster",
]

CODE_DIVERGING = 0
CODE_PERIODIC = 1
CODE_CHAOTIC = 2
CODE_QUASI = 3

_KIND_BY_CODE = {
    CODE_DIVERGING: "diverging",
    CODE_PERIODIC: "periodic",
    CODE_CHAOTIC: "chaotic",
    CODE_QUASI: "quasiperiodic_or_long_period",
}


@dataclass(frozen=True)
class ClassifierConfig:
    """Knobs of the classification procedure (defaults are the raster ones)."""

    burn_in: int = 100_000
    divergence_bound: float = 1e5
    probe_len: int = 30
    match_tol: float = 1e-10
    lyap_threshold: float = 1e-3
    lyap_len: int = 10_000
    seed: int = 0
    init_box: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.burn_in < 1 or self.probe_len < 1 or self.lyap_len < 1:
            raise ValueError("counts must be >= 1")
        if self.match_tol <= 0 or self.divergence_bound <= 0 or self.lyap_threshold <= 0:
            raise ValueError("tolerances must be > 0")

    def box_for(self, mu: float) -> tuple[float, float, float, float]:
        """Initial-condition box: explicit, or [-2|mu|, 2|mu|]^2 by default."""
        if self.init_box is not None:
            return self.init_box
        s = 2.0 * abs(mu) if mu != 0.0 else 2.0
        return (-s, s, -s, s)


@dataclass(frozen=True)
class AttractorClass:
    kind: str
    period: int | None = None
    lyapunov: float | None = None

    @property
    def code(self) -> int:
        return {v: k for k, v in _KIND_BY_CODE.items()}[self.kind]

    def __str__(self) -> str:
        if self.kind == "periodic":
            return f"periodic({self.period})"
        return self.kind


def _result_to_class(code: int, period: int, lyap: float) -> AttractorClass:
    if code == CODE_PERIODIC:
        return AttractorClass("periodic", period=period)
    if code in (CODE_CHAOTIC, CODE_QUASI):
        return AttractorClass(_KIND_BY_CODE[code], lyapunov=lyap)
    return AttractorClass(_KIND_BY_CODE[code])


def classify(params: NormalFormParams, cfg: ClassifierConfig = ClassifierConfig(),
             kernel=None) -> AttractorClass:
    """Classify the attractor reached from one seeded random initial point.

    Deterministic given (params, cfg): the initial point is drawn from the
    (seed, 0, 0) substream on the configured box.
    """
    k = kernel if kernel is not None else backend.kernel
    bx0, bx1, by0, by1 = cfg.box_for(params.mu)
    x0, y0 = k.cell_initial_point(cfg.seed, 0, 0, bx0, bx1, by0, by1)
    code, period, lyap = k.classify_point(
        params.tau_L, params.tau_R, params.delta_R, params.mu, x0, y0,
        cfg.burn_in, cfg.divergence_bound, cfg.probe_len, cfg.match_tol,
        cfg.lyap_threshold, cfg.lyap_len)
    return _result_to_class(code, period, lyap)


def detect_period(tail: np.ndarray, tol: float, reduce: bool = False) -> int | None:
    """Smallest i >= 1 with |tail[i] - tail[0]| < tol, or None.

    ``tail[0]`` is the reference point followed by the probe iterates.  With
    ``reduce=True`` the raw value is reduced to the smallest divisor that the
    whole tail supports (an optional reporting refinement; the raster
    procedure uses the raw value).
    """
    tail = np.asarray(tail, dtype=float)
    d = tail[1:] - tail[0]
    dist = np.hypot(d[:, 0], d[:, 1])
    hits = np.nonzero(dist < tol)[0]
    if hits.size == 0:
        return None
    p = int(hits[0]) + 1
    if reduce and p > 1:
        for div in range(1, p):
            if p % div != 0:
                continue
            m = len(tail) - div
            if m < 1:
                break
            gaps = tail[div:] - tail[:-div]
            if np.hypot(gaps[:, 0], gaps[:, 1]).max() < tol:
                return div
    return p


def lyapunov_max(params: NormalFormParams, p0: tuple[float, float], n: int,
                 bound: float = 1e5, kernel=None) -> float:
    """Maximal Lyapunov exponent along n iterates from p0.

    A unit tangent vector is propagated by the side-dependent Jacobian and
    renormalised every step; points exactly on x = 0 use the left Jacobian.
    Raises DivergedOrbitError if the orbit escapes the bound.
    """
    k = kernel if kernel is not None else backend.kernel
    ok, val = k.lyapunov_path(params.tau_L, params.tau_R, params.delta_R, params.mu,
                              float(p0[0]), float(p0[1]), int(n), bound)
    if not ok:
        raise DivergedOrbitError(f"orbit from {p0} escaped bound {bound}")
    return val


@dataclass(frozen=True)
class ComponentCount:
    """Connected-component count of a chaotic attractor.

    ``count`` is the flood-fill count; ``slice_count`` comes from gap-splitting
    the x-axis return slice and acts as the cross-check.  ``reliable`` is False
    when the two methods disagree.
    """

    count: int
    gap_threshold: float
    reliable: bool
    slice_count: int
    fill_count: int


def _sample_attractor(params: NormalFormParams, cfg: ClassifierConfig,
                      n_samples: int, kernel=None) -> tuple[np.ndarray, np.ndarray]:
    k = kernel if kernel is not None else backend.kernel
    bx0, bx1, by0, by1 = cfg.box_for(params.mu)
    x0, y0 = k.cell_initial_point(cfg.seed, 0, 0, bx0, bx1, by0, by1)
    out = np.empty((n_samples, 2))
    pred_left = np.zeros(n_samples, dtype=np.int8)
    escaped = k.sample_orbit(params.tau_L, params.tau_R, params.delta_R, params.mu,
                             x0, y0, cfg.burn_in, n_samples, cfg.divergence_bound,
                             out, pred_left)
    if escaped != -1:
        raise DivergedOrbitError(f"orbit diverged at iterate {escaped} while sampling")
    return out, pred_left.astype(bool)


def _flood_fill_count(samples: np.ndarray, grid: int) -> int:
    """Connected components (8-neighbour) of the occupancy grid of samples."""
    lo = samples.min(axis=0)
    hi = samples.max(axis=0)
    span = np.maximum(hi - lo, 1e-300)
    ij = np.minimum((samples - lo) / span * grid, grid - 1).astype(np.int64)
    occ = np.zeros((grid, grid), dtype=bool)
    occ[ij[:, 0], ij[:, 1]] = True
    seen = np.zeros_like(occ)
    count = 0
    for i, j in zip(*np.nonzero(occ)):
        if seen[i, j]:
            continue
        count += 1
        queue = deque([(i, j)])
        seen[i, j] = True
        while queue:
            ci, cj = queue.popleft()
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    ni, nj = ci + di, cj + dj
                    if 0 <= ni < grid and 0 <= nj < grid and occ[ni, nj] and not seen[ni, nj]:
                        seen[ni, nj] = True
                        queue.append((ni, nj))
    return count


def count_components(params: NormalFormParams, cfg: ClassifierConfig = ClassifierConfig(),
                     n_samples: int = 1 << 17, gap_threshold: float = 0.02,
                     grid: int = 512, max_seed_tries: int = 32, kernel=None) -> ComponentCount:
    """Count connected components of a chaotic attractor.

    Collects post-burn-in samples, gap-splits the x-axis return slice (points
    whose predecessor lay in x <= 0) at gaps above ``gap_threshold`` times the
    attractor diameter, and cross-checks against a flood fill of a
    ``grid`` x ``grid`` occupancy raster.  The flood-fill count is returned.

    Initial seeds are scanned until one lands on the chaotic attractor:
    chaotic attractors here can coexist with cycles or unbounded orbits.
    """
    use = None
    for off in range(max_seed_tries):
        c = replace(cfg, seed=cfg.seed + off)
        if classify(params, c, kernel=kernel).kind == "chaotic":
            use = c
            break
    if use is None:
        raise DivergedOrbitError(
            f"no chaotic orbit found at {params} within {max_seed_tries} seeds")
    samples, pred_left = _sample_attractor(params, use, n_samples, kernel=kernel)
    lo = samples.min(axis=0)
    hi = samples.max(axis=0)
    diam = math.hypot(hi[0] - lo[0], hi[1] - lo[1])
    slice_x = np.sort(samples[pred_left, 0])
    if slice_x.size == 0 or diam == 0.0:
        slice_count = 1
    else:
        gaps = np.diff(slice_x)
        slice_count = 1 + int(np.count_nonzero(gaps > gap_threshold * diam))
    fill_count = _flood_fill_count(samples, grid)
    return ComponentCount(
        count=fill_count,
        gap_threshold=gap_threshold,
        reliable=(slice_count == fill_count),
        slice_count=slice_count,
        fill_count=fill_count,
    )


@dataclass
class Attractor:
    """Reference samples of one attractor, for basin matching."""

    kind: str
    period: int | None
    samples: np.ndarray

    @property
    def diameter(self) -> float:
        lo = self.samples.min(axis=0)
        hi = self.samples.max(axis=0)
        return math.hypot(hi[0] - lo[0], hi[1] - lo[1])


def _min_dist_to(samples: np.ndarray, pt: np.ndarray) -> float:
    d = samples - pt
    return float(np.min(np.hypot(d[:, 0], d[:, 1])))


def find_attractors(params: NormalFormParams, cfg: ClassifierConfig = ClassifierConfig(),
                    n_seeds: int = 20, n_samples: int = 4096, kernel=None) -> list[Attractor]:
    """Distinct attractors reached from ``n_seeds`` random initial points."""
    found: list[Attractor] = []
    for s in range(n_seeds):
        c = replace(cfg, seed=cfg.seed + s)
        cls = classify(params, c, kernel=kernel)
        if cls.kind == "diverging":
            continue
        try:
            samples, _ = _sample_attractor(params, c, n_samples, kernel=kernel)
        except DivergedOrbitError:
            continue
        if cls.kind == "periodic":
            samples = samples[: max(cls.period, 1)]
        is_new = True
        for att in found:
            if att.kind != cls.kind or att.period != cls.period:
                continue
            tol = 1e-6 + 0.05 * max(att.diameter, 1e-12)
            if _min_dist_to(att.samples, samples[0]) < tol:
                is_new = False
                break
        if is_new:
            found.append(Attractor(cls.kind, cls.period, samples))
    return found


def basin_raster(params: NormalFormParams, region: tuple[float, float, float, float],
                 resolution: tuple[int, int], cfg: ClassifierConfig = ClassifierConfig(),
                 attractors: list[Attractor] | None = None,
                 burn_in: int | None = None, kernel=None) -> tuple[np.ndarray, list[Attractor]]:
    """Label each grid initial condition by the attractor its orbit approaches.

    Returns (labels, attractors); labels are indices into the attractor list,
    -1 for divergence and -2 when no stored attractor matched.
    """
    k = kernel if kernel is not None else backend.kernel
    if attractors is None:
        attractors = find_attractors(params, cfg, kernel=kernel)
    if not attractors:
        raise DivergedOrbitError("no attractor found to label the basin raster")
    x0, x1, y0, y1 = region
    nx, ny = resolution
    n_burn = cfg.burn_in if burn_in is None else burn_in
    labels = np.full((ny, nx), -2, dtype=np.int16)
    radii = [0.02 * max(att.diameter, 1e-9) + 1e-7 for att in attractors]
    tail = np.empty((8, 2))
    pred = np.zeros(8, dtype=np.int8)
    for iy in range(ny):
        y = y0 + (y1 - y0) * iy / (ny - 1) if ny > 1 else 0.5 * (y0 + y1)
        for ix in range(nx):
            x = x0 + (x1 - x0) * ix / (nx - 1) if nx > 1 else 0.5 * (x0 + x1)
            escaped = k.sample_orbit(params.tau_L, params.tau_R, params.delta_R,
                                     params.mu, x, y, n_burn, len(tail),
                                     cfg.divergence_bound, tail, pred)
            if escaped != -1:
                labels[iy, ix] = -1
                continue
            best = -2
            best_d = math.inf
            for idx, att in enumerate(attractors):
                d = min(_min_dist_to(att.samples, tail[j]) for j in range(len(tail)))
                if d < radii[idx] and d < best_d:
                    best, best_d = idx, d
            labels[iy, ix] = best
    return labels, attractors
