# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: per-cell attractor classification and orbit sampling.

The pure-Python module ``bcnf._kernel_py`` mirrors every function here with
identical arithmetic (same expressions, same evaluation order) so results do
not depend on which backend is active.
"""

from libc.math cimport HUGE_VAL, isfinite, log, sqrt

ctypedef unsigned long long u64

# Classification codes shared with the Python layer.
DEF CODE_DIVERGING = 0
DEF CODE_PERIODIC = 1
DEF CODE_CHAOTIC = 2
DEF CODE_QUASI = 3

COMPILED = True


cdef inline u64 _mix(u64 z) nogil:
    z = z + <u64>0x9E3779B97F4A7C15
    z ^= z >> 30
    z = z * <u64>0xBF58476D1CE4E5B9
    z ^= z >> 27
    z = z * <u64>0x94D049BB133111EB
    z ^= z >> 31
    return z


cdef inline double _u01(u64 h) nogil:
    return <double>(h >> 11) * (1.0 / 9007199254740992.0)


cdef inline u64 _cell_key(u64 seed, u64 ix, u64 iy) nogil:
    cdef u64 h = _mix(seed)
    h = _mix(h ^ (ix * <u64>0x9E3779B97F4A7C15))
    h = _mix(h ^ (iy * <u64>0xC2B2AE3D27D4EB4F))
    return h


def cell_initial_point(seed, ix, iy, bx0, bx1, by0, by1):
    """Deterministic per-cell initial point, uniform on the given box."""
    cdef u64 key = _cell_key(<u64>(seed & 0xFFFFFFFFFFFFFFFF), <u64>ix, <u64>iy)
    cdef double u1 = _u01(_mix(key + <u64>1))
    cdef double u2 = _u01(_mix(key + <u64>2))
    return (bx0 + u1 * (bx1 - bx0), by0 + u2 * (by1 - by0))


cdef struct CellResult:
    int code
    int period
    double lyap


cdef CellResult _classify_cell(double tl, double tr, double dr, double mu,
                               double x0, double y0,
                               long burn_in, double bound,
                               int probe_len, double match_tol,
                               double lyap_threshold, long lyap_len) nogil:
    cdef CellResult res
    cdef double bound2 = bound * bound
    cdef double hx = x0, hy = y0
    cdef double tx = x0, ty = y0
    cdef double nx_, ny_
    cdef long steps = 0, power = 1, lam = 0, rem, i
    cdef bint cycled = False

    res.code = CODE_QUASI
    res.period = 0
    res.lyap = 0.0

    # Burn-in with Brent cycle detection.  Floating-point orbits that settle
    # onto an attracting cycle become exactly periodic, so detecting an exact
    # recurrence lets us jump to iterate `burn_in` without changing the result.
    while steps < burn_in:
        if lam == power:
            tx = hx
            ty = hy
            power = power << 1
            lam = 0
        if hx <= 0.0:
            nx_ = tl * hx + hy + mu
            ny_ = 0.0
        else:
            nx_ = tr * hx + hy + mu
            ny_ = -dr * hx
        hx = nx_
        hy = ny_
        steps += 1
        lam += 1
        if not isfinite(hx) or not isfinite(hy) or hx * hx + hy * hy > bound2:
            res.code = CODE_DIVERGING
            return res
        if hx == tx and hy == ty:
            cycled = True
            break

    if cycled:
        rem = (burn_in - steps) % lam
        for i in range(rem):
            if hx <= 0.0:
                nx_ = tl * hx + hy + mu
                ny_ = 0.0
            else:
                nx_ = tr * hx + hy + mu
                ny_ = -dr * hx
            hx = nx_
            hy = ny_

    # Probe: smallest i with |z_{M+i} - z_M| below the match tolerance.
    cdef double zx = hx, zy = hy
    cdef double px = hx, py = hy
    cdef double tol2 = match_tol * match_tol
    cdef double dx, dy
    cdef int ip
    for ip in range(1, probe_len + 1):
        if px <= 0.0:
            nx_ = tl * px + py + mu
            ny_ = 0.0
        else:
            nx_ = tr * px + py + mu
            ny_ = -dr * px
        px = nx_
        py = ny_
        if not isfinite(px) or not isfinite(py) or px * px + py * py > bound2:
            res.code = CODE_DIVERGING
            return res
        dx = px - zx
        dy = py - zy
        if dx * dx + dy * dy < tol2:
            res.code = CODE_PERIODIC
            res.period = ip
            return res

    # No short period: maximal Lyapunov exponent along the continued orbit,
    # tangent vector propagated by the side-dependent Jacobian.
    cdef double vx = 1.0, vy = 0.0, wx, wy, nrm, acc = 0.0
    px = zx
    py = zy
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
        nrm = sqrt(wx * wx + wy * wy)
        if nrm == 0.0:
            acc = -HUGE_VAL
            break
        acc += log(nrm)
        vx = wx / nrm
        vy = wy / nrm
        px = nx_
        py = ny_
        if not isfinite(px) or not isfinite(py) or px * px + py * py > bound2:
            res.code = CODE_DIVERGING
            return res
    res.lyap = acc / lyap_len if acc > -HUGE_VAL else -HUGE_VAL
    res.code = CODE_CHAOTIC if res.lyap > lyap_threshold else CODE_QUASI
    return res


def classify_point(double tl, double tr, double dr, double mu,
                   double x0, double y0,
                   long burn_in, double bound, int probe_len, double match_tol,
                   double lyap_threshold, long lyap_len):
    """Classify a single parameter point from the given initial condition."""
    cdef CellResult res = _classify_cell(tl, tr, dr, mu, x0, y0, burn_in, bound,
                                         probe_len, match_tol, lyap_threshold, lyap_len)
    return res.code, res.period, res.lyap


def classify_grid(double tl, double mu,
                  double tr_lo, double tr_hi, double dr_lo, double dr_hi,
                  Py_ssize_t nx, Py_ssize_t ny, Py_ssize_t row0, Py_ssize_t row1,
                  long burn_in, double bound, int probe_len, double match_tol,
                  double lyap_threshold, long lyap_len,
                  u64 seed, double bx0, double bx1, double by0, double by1,
                  signed char[:, ::1] codes, short[:, ::1] periods,
                  double[:, ::1] lyaps):
    """Classify rows [row0, row1) of an (ny, nx) grid over (tau_R, delta_R).

    Grid points are equi-spaced and include the window edges.  Every cell is
    independent: results are identical however rows are partitioned.
    """
    cdef double dtr = (tr_hi - tr_lo) / (nx - 1) if nx > 1 else 0.0
    cdef double ddr = (dr_hi - dr_lo) / (ny - 1) if ny > 1 else 0.0
    cdef Py_ssize_t ix, iy
    cdef double tr, dr, x0, y0
    cdef u64 key
    cdef CellResult res
    with nogil:
        for iy in range(row0, row1):
            dr = dr_lo + iy * ddr
            for ix in range(nx):
                tr = tr_lo + ix * dtr
                key = _cell_key(seed, <u64>ix, <u64>iy)
                x0 = bx0 + _u01(_mix(key + <u64>1)) * (bx1 - bx0)
                y0 = by0 + _u01(_mix(key + <u64>2)) * (by1 - by0)
                res = _classify_cell(tl, tr, dr, mu, x0, y0, burn_in, bound,
                                     probe_len, match_tol, lyap_threshold, lyap_len)
                codes[iy, ix] = <signed char>res.code
                periods[iy, ix] = <short>res.period
                lyaps[iy, ix] = res.lyap


def sample_orbit(double tl, double tr, double dr, double mu,
                 double x0, double y0, long n_burn, long n_samples, double bound,
                 double[:, ::1] out, signed char[::1] pred_left):
    """Post-transient orbit samples plus a predecessor-side flag per sample.

    Returns the iterate index at which the orbit escaped the bound, or -1 when
    it stayed bounded and `out` was filled.
    """
    cdef double bound2 = bound * bound
    cdef double x = x0, y = y0, nx_, ny_
    cdef long i
    cdef bint was_left
    for i in range(n_burn):
        if x <= 0.0:
            nx_ = tl * x + y + mu
            ny_ = 0.0
        else:
            nx_ = tr * x + y + mu
            ny_ = -dr * x
        x = nx_
        y = ny_
        if not isfinite(x) or not isfinite(y) or x * x + y * y > bound2:
            return i + 1
    for i in range(n_samples):
        was_left = x <= 0.0
        if was_left:
            nx_ = tl * x + y + mu
            ny_ = 0.0
        else:
            nx_ = tr * x + y + mu
            ny_ = -dr * x
        x = nx_
        y = ny_
        if not isfinite(x) or not isfinite(y) or x * x + y * y > bound2:
            return n_burn + i + 1
        out[i, 0] = x
        out[i, 1] = y
        pred_left[i] = 1 if was_left else 0
    return -1


def lyapunov_path(double tl, double tr, double dr, double mu,
                  double x0, double y0, long n, double bound):
    """Maximal Lyapunov exponent estimate along n iterates from (x0, y0).

    Returns (ok, value); ok is False when the orbit escapes the bound.
    """
    cdef double bound2 = bound * bound
    cdef double x = x0, y = y0, vx = 1.0, vy = 0.0
    cdef double wx, wy, nrm, acc = 0.0, nx_, ny_
    cdef long i
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
        nrm = sqrt(wx * wx + wy * wy)
        if nrm == 0.0:
            return True, -HUGE_VAL
        acc += log(nrm)
        vx = wx / nrm
        vy = wy / nrm
        x = nx_
        y = ny_
        if not isfinite(x) or not isfinite(y) or x * x + y * y > bound2:
            return False, acc / (i + 1)
    return True, acc / n
