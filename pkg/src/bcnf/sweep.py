"""Two-parameter classification rasters over (tau_R, delta_R) windows.

Cells are classified independently with per-cell seeded initial points, so a
raster is a pure function of its configuration: re-runs and different worker
counts produce byte-identical grids.  Per-cell work is hard-bounded by the
classifier's burn-in, probe, and exponent lengths, so no cell can stall a
sweep.

Class codes (also used in the CSV encoding):

    0  diverging               (white in PPM, 255 in PGM)
    1  periodic, period p      (colour ramp over p = 1..30; PGM 4 + 4*(p-1))
    2  chaotic                 (orange; PGM 128)
    3  quasi-periodic or period > probe length   (yellow; PGM 192)
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .classify import ClassifierConfig
from .curves import CurveSample

__all__ = [
    "SweepConfig",
    "ClassificationRaster",
    "run_sweep",
    "encode_raster",
    "raster_from_csv",
    "overlay_curves",
    "PALETTE_FIXED",
]


@dataclass(frozen=True)
class SweepConfig:
    tau_L: float
    mu: float
    window: tuple[float, float, float, float]
    resolution: tuple[int, int] = (1000, 1000)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    curve_ids: tuple[str, ...] = ()

    def __post_init__(self):
        nx, ny = self.resolution
        if nx < 2 or ny < 2:
            raise ValueError("resolution must be at least 2x2")
        tr_lo, tr_hi, dr_lo, dr_hi = self.window
        if not (tr_lo < tr_hi and dr_lo < dr_hi):
            raise ValueError("window must be non-degenerate")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Equi-spaced grid coordinates, inclusive of the window edges."""
        tr_lo, tr_hi, dr_lo, dr_hi = self.window
        nx, ny = self.resolution
        dtr = (tr_hi - tr_lo) / (nx - 1)
        ddr = (dr_hi - dr_lo) / (ny - 1)
        return (tr_lo + dtr * np.arange(nx), dr_lo + ddr * np.arange(ny))


@dataclass
class ClassificationRaster:
    config: SweepConfig
    codes: np.ndarray      # (ny, nx) int8
    periods: np.ndarray    # (ny, nx) int16
    lyapunov: np.ndarray   # (ny, nx) float64

    def class_fraction(self, code: int) -> float:
        return float(np.count_nonzero(self.codes == code)) / self.codes.size


def run_sweep(cfg: SweepConfig, workers: int = 1, kernel=None) -> ClassificationRaster:
    """Classify every cell of the configured grid.

    ``workers`` only controls scheduling; the raster contents are identical
    for any worker count.
    """
    k = kernel if kernel is not None else backend.kernel
    nx, ny = cfg.resolution
    codes = np.empty((ny, nx), dtype=np.int8)
    periods = np.empty((ny, nx), dtype=np.int16)
    lyap = np.empty((ny, nx), dtype=np.float64)
    cc = cfg.classifier
    bx0, bx1, by0, by1 = cc.box_for(cfg.mu)
    tr_lo, tr_hi, dr_lo, dr_hi = cfg.window

    def work(row0, row1):
        k.classify_grid(cfg.tau_L, cfg.mu, tr_lo, tr_hi, dr_lo, dr_hi,
                        nx, ny, row0, row1,
                        cc.burn_in, cc.divergence_bound, cc.probe_len, cc.match_tol,
                        cc.lyap_threshold, cc.lyap_len,
                        cc.seed, bx0, bx1, by0, by1,
                        codes, periods, lyap)

    workers = max(1, int(workers))
    if workers == 1:
        work(0, ny)
    else:
        block = max(1, ny // (workers * 4))
        spans = [(r, min(r + block, ny)) for r in range(0, ny, block)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda s: work(*s), spans))
    return ClassificationRaster(cfg, codes, periods, lyap)


# ---------------------------------------------------------------------------
# encodings

def _period_colour(p: int) -> tuple[int, int, int]:
    # Fixed colour ramp over periods 1..30 (wraps beyond).
    i = (p - 1) % 30
    h = i / 30.0
    r = int(255 * max(0.0, min(1.0, abs(h * 6.0 - 3.0) - 1.0)))
    g = int(255 * max(0.0, min(1.0, 2.0 - abs(h * 6.0 - 2.0))))
    b = int(255 * max(0.0, min(1.0, 2.0 - abs(h * 6.0 - 4.0))))
    return (r, g, b)


PALETTE_FIXED = {
    "diverging": (255, 255, 255),
    "chaotic": (255, 140, 0),
    "quasi": (255, 255, 0),
}


def encode_raster(raster: ClassificationRaster, fmt: str) -> bytes:
    """Serialise a raster as csv, pgm (P5), or ppm (P6)."""
    cfg = raster.config
    nx, ny = cfg.resolution
    if fmt == "csv":
        trs, drs = cfg.axes()
        buf = io.StringIO()
        buf.write(f"# tau_L={cfg.tau_L:.17g} mu={cfg.mu:.17g}\n")
        buf.write("# window=%s resolution=%dx%d seed=%d\n"
                  % (",".join(f"{w:.17g}" for w in cfg.window), nx, ny, cfg.classifier.seed))
        buf.write("ix,iy,tau_R,delta_R,class_code,period\n")
        for iy in range(ny):
            for ix in range(nx):
                buf.write(f"{ix},{iy},{trs[ix]:.17g},{drs[iy]:.17g},"
                          f"{raster.codes[iy, ix]},{raster.periods[iy, ix]}\n")
        return buf.getvalue().encode()
    if fmt == "pgm":
        grey = np.empty((ny, nx), dtype=np.uint8)
        grey[raster.codes == 0] = 255
        grey[raster.codes == 2] = 128
        grey[raster.codes == 3] = 192
        per = raster.codes == 1
        grey[per] = (4 + 4 * ((raster.periods[per] - 1) % 30)).astype(np.uint8)
        header = f"P5\n{nx} {ny}\n255\n".encode()
        return header + grey[::-1].tobytes()  # top row = largest delta_R
    if fmt == "ppm":
        rgb = np.empty((ny, nx, 3), dtype=np.uint8)
        rgb[raster.codes == 0] = PALETTE_FIXED["diverging"]
        rgb[raster.codes == 2] = PALETTE_FIXED["chaotic"]
        rgb[raster.codes == 3] = PALETTE_FIXED["quasi"]
        for p in np.unique(raster.periods[raster.codes == 1]):
            rgb[(raster.codes == 1) & (raster.periods == p)] = _period_colour(int(p))
        header = f"P6\n{nx} {ny}\n255\n".encode()
        return header + rgb[::-1].tobytes()
    raise ValueError(f"unsupported format {fmt!r}")


def raster_from_csv(data: bytes | str) -> ClassificationRaster:
    """Rebuild a raster from its CSV encoding (inverse of encode_raster)."""
    text = data.decode() if isinstance(data, bytes) else data
    lines = text.strip().splitlines()
    meta1 = dict(kv.split("=") for kv in lines[0][2:].split())
    meta2 = dict(kv.split("=") for kv in lines[1][2:].split())
    window = tuple(float(v) for v in meta2["window"].split(","))
    nx, ny = (int(v) for v in meta2["resolution"].split("x"))
    cfg = SweepConfig(float(meta1["tau_L"]), float(meta1["mu"]), window, (nx, ny),
                      ClassifierConfig(seed=int(meta2["seed"])))
    codes = np.empty((ny, nx), dtype=np.int8)
    periods = np.empty((ny, nx), dtype=np.int16)
    for row in lines[3:]:
        ix, iy, _, _, code, period = row.split(",")
        codes[int(iy), int(ix)] = int(code)
        periods[int(iy), int(ix)] = int(period)
    return ClassificationRaster(cfg, codes, periods, np.full((ny, nx), np.nan))


# ---------------------------------------------------------------------------
# curve overlays

def _liang_barsky(p, q, window):
    """Clip segment p-q to the window; None when fully outside."""
    x0, y0 = p
    x1, y1 = q
    tr_lo, tr_hi, dr_lo, dr_hi = window
    dx, dy = x1 - x0, y1 - y0
    t0, t1 = 0.0, 1.0
    for pval, qval in ((-dx, x0 - tr_lo), (dx, tr_hi - x0),
                       (-dy, y0 - dr_lo), (dy, dr_hi - y0)):
        if pval == 0.0:
            if qval < 0.0:
                return None
            continue
        r = qval / pval
        if pval < 0.0:
            if r > t1:
                return None
            t0 = max(t0, r)
        else:
            if r < t0:
                return None
            t1 = min(t1, r)
    if t0 > t1:
        return None
    return ((x0 + t0 * dx, y0 + t0 * dy), (x0 + t1 * dx, y0 + t1 * dy))


def overlay_curves(raster: ClassificationRaster,
                   samples: list[CurveSample]) -> list[tuple[str, np.ndarray]]:
    """Curve polylines mapped to fractional cell coordinates.

    Segments are clipped to the raster window; polyline order is preserved.
    Returns (curve_id, points) pairs with points in (col, row) units.
    """
    cfg = raster.config
    tr_lo, tr_hi, dr_lo, dr_hi = cfg.window
    nx, ny = cfg.resolution

    def to_cells(pts):
        out = np.empty_like(pts)
        out[:, 0] = (pts[:, 0] - tr_lo) / (tr_hi - tr_lo) * (nx - 1)
        out[:, 1] = (pts[:, 1] - dr_lo) / (dr_hi - dr_lo) * (ny - 1)
        return out

    layers = []
    for sample in samples:
        branches = sample.branches if sample.branches else [sample.points]
        for br in branches:
            if len(br) == 0:
                continue
            run: list[tuple[float, float]] = []
            for i in range(len(br) - 1):
                seg = _liang_barsky(br[i], br[i + 1], cfg.window)
                if seg is None:
                    if len(run) >= 2:
                        layers.append((sample.curve_id, to_cells(np.array(run))))
                    run = []
                    continue
                a, b = seg
                if not run:
                    run.append(a)
                elif run[-1] != tuple(a):
                    run.append(a)
                run.append(b)
            if len(run) >= 2:
                layers.append((sample.curve_id, to_cells(np.array(run))))
    return layers
