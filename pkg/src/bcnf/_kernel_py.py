"""Pure-Python fallback for the compiled kernels in ``bcnf._kernel``.

Every function mirrors its compiled counterpart expression-for-expression so
both backends produce identical floating-point results; only speed differs.
"""

from __future__ import annotations

import math

_MASK = 0xFFFFFFFFFFFFFFFF

CODE_DIVERGING = 0
CODE_PERIODIC = 1
CODE_CHAOTIC = 2
CODE_QUASI = 3

COMPILED = False


def _mix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z


def _u01(h: int) -> float:
    return (h >> 11) * (1.0 / 9007199254740992.0)


def _cell_key(seed: int, ix: int, iy: int) -> int:
    h = _mix(seed & _MASK)
    h = _mix(h ^ ((ix * 0x9E3779B97F4A7C15) & _MASK))
    h = _mix(h ^ ((iy * 0xC2B2AE3D27D4EB4F) & _MASK))
    return h


def cell_initial_point(seed, ix, iy, bx0, bx1, by0, by1):
    """Deterministic per-cell initial point, uniform on the given box."""
    key = _cell_key(seed, ix, iy)
    u1 = _u01(_mix((key + 1) & _MASK))
    u2 = _u01(_mix((key + 2) & _MASK))
    return (bx0 + u1 * (bx1 - bx0), by0 + u2 * (by1 - by0))


def _finite(v: float) -> bool:
    return math.isfinite(v)


def classify_point(tl, tr, dr, mu, x0, y0, burn_in, bound, probe_len, match_tol,
                   lyap_threshold, lyap_len):
    """Classify a single parameter point from the given initial condition."""
    bound2 = bound * bound
    hx, hy = x0, y0
    tx, ty = x0, y0
    steps = 0
    power = 1
    lam = 0
    cycled = False

    while steps < burn_in:
        if lam == power:
            tx, ty = hx, hy
            power <<= 1
            lam = 0
        if hx <= 0.0:
            nx_ = tl * hx + hy + mu
            ny_ = 0.0
        else:
            nx_ = tr * hx + hy + mu
            ny_ = -dr * hx
        hx, hy = nx_, ny_
        steps += 1
        lam += 1
        if not _finite(hx) or not _finite(hy) or hx * hx + hy * hy > bound2:
            return CODE_DIVERGING, 0, 0.0
        if hx == tx and hy == ty:
            cycled = True
            break

    if cycled:
        for _ in range((burn_in - steps) % lam):
            if hx <= 0.0:
                nx_ = tl * hx + hy + mu
                ny_ = 0.0
            else:
                nx_ = tr * hx + hy + mu
                ny_ = -dr * hx
            hx, hy = nx_, ny_

    zx, zy = hx, hy
    px, py = hx, hy
    tol2 = match_tol * match_tol
    for ip in range(1, probe_len + 1):
        if px <= 0.0:
            nx_ = tl * px + py + mu
            ny_ = 0.0
        else:
            nx_ = tr * px + py + mu
            ny_ = -dr * px
        px, py = nx_, ny_
        if not _finite(px) or not _finite(py) or px * px + py * py > bound2:
            return CODE_DIVERGING, 0, 0.0
        dx = px - zx
        dy = py - zy
        if dx * dx + dy * dy < tol2:
            return CODE_PERIODIC, ip, 0.0

    vx, vy = 1.0, 0.0
    px, py = zx, zy
    acc = 0.0
    for i in range(lyap_len):
        if px <= 0.0:
            wx = tl * vx + vy
            wy = 0.0
            nx_ = tl * px + py + mu
            ny_ = 0.0
        else:
            wx = tr * vx + vy
            wy = -dr * vx
            nx_ = tr * px + py + mu
            ny_ = -dr * px
        nrm = math.sqrt(wx * wx + wy * wy)
        if nrm == 0.0:
            acc = -math.inf
            break
        acc += math.log(nrm)
        vx = wx / nrm
        vy = wy / nrm
        px, py = nx_, ny_
        if not _finite(px) or not _finite(py) or px * px + py * py > bound2:
            return CODE_DIVERGING, 0, 0.0
    lyap = acc / lyap_len if acc > -math.inf else -math.inf
    code = CODE_CHAOTIC if lyap > lyap_threshold else CODE_QUASI
    return code, 0, lyap


def classify_grid(tl, mu, tr_lo, tr_hi, dr_lo, dr_hi, nx, ny, row0, row1,
                  burn_in, bound, probe_len, match_tol, lyap_threshold, lyap_len,
                  seed, bx0, bx1, by0, by1, codes, periods, lyaps):
    """Classify rows [row0, row1) of an (ny, nx) grid over (tau_R, delta_R)."""
    dtr = (tr_hi - tr_lo) / (nx - 1) if nx > 1 else 0.0
    ddr = (dr_hi - dr_lo) / (ny - 1) if ny > 1 else 0.0
    for iy in range(row0, row1):
        dr = dr_lo + iy * ddr
        for ix in range(nx):
            tr = tr_lo + ix * dtr
            key = _cell_key(seed, ix, iy)
            x0 = bx0 + _u01(_mix((key + 1) & _MASK)) * (bx1 - bx0)
            y0 = by0 + _u01(_mix((key + 2) & _MASK)) * (by1 - by0)
            code, period, lyap = classify_point(
                tl, tr, dr, mu, x0, y0, burn_in, bound, probe_len, match_tol,
                lyap_threshold, lyap_len)
            codes[iy, ix] = code
            periods[iy, ix] = period
            lyaps[iy, ix] = lyap


def sample_orbit(tl, tr, dr, mu, x0, y0, n_burn, n_samples, bound, out, pred_left):
    """Post-transient orbit samples plus a predecessor-side flag per sample."""
    bound2 = bound * bound
    x, y = x0, y0
    for i in range(n_burn):
        if x <= 0.0:
            nx_ = tl * x + y + mu
            ny_ = 0.0
        else:
            nx_ = tr * x + y + mu
            ny_ = -dr * x
        x, y = nx_, ny_
        if not _finite(x) or not _finite(y) or x * x + y * y > bound2:
            return i + 1
    for i in range(n_samples):
        was_left = x <= 0.0
        if was_left:
            nx_ = tl * x + y + mu
            ny_ = 0.0
        else:
            nx_ = tr * x + y + mu
            ny_ = -dr * x
        x, y = nx_, ny_
        if not _finite(x) or not _finite(y) or x * x + y * y > bound2:
            return n_burn + i + 1
        out[i, 0] = x
        out[i, 1] = y
        pred_left[i] = 1 if was_left else 0
    return -1


def lyapunov_path(tl, tr, dr, mu, x0, y0, n, bound):
    """Maximal Lyapunov exponent estimate along n iterates from (x0, y0)."""
    bound2 = bound * bound
    x, y = x0, y0
    vx, vy = 1.0, 0.0
    acc = 0.0
    for i in range(n):
        if x <= 0.0:
            wx = tl * vx + vy
            wy = 0.0
            nx_ = tl * x + y + mu
            ny_ = 0.0
        else:
            wx = tr * vx + vy
            wy = -dr * vx
            nx_ = tr * x + y + mu
            ny_ = -dr * x
        nrm = math.sqrt(wx * wx + wy * wy)
        if nrm == 0.0:
            return True, -math.inf
        acc += math.log(nrm)
        vx = wx / nrm
        vy = wy / nrm
        x, y = nx_, ny_
        if not _finite(x) or not _finite(y) or x * x + y * y > bound2:
            return False, acc / (i + 1)
    return True, acc / n
