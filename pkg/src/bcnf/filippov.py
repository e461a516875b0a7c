"""Grazing-sliding pipeline for a harmonically forced stick-slip oscillator.

The block-on-belt model

    u'' + u = alpha0*sgn(1 - u') - alpha1*(1 - u') + alpha2*(1 - u')^3
              + F*cos(nu*t)

is treated as a Filippov system with discontinuity surface v = u' = 1 (the
belt speed).  Sticking (sliding motion) is integrated exactly: on the surface
u grows affinely until the net non-friction force -u + F*cos(nu*t) reaches
+/-alpha0.  The grazing limit cycle, located by Newton on a stroboscopic map
of the smooth below-surface flow, yields the border-collision normal-form
coefficients by one-sided differencing of the two Poincare-map pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import NormalFormParams
from .errors import DomainError, IntegrationError, NoBracketError
from .ode import Event, integrate_to_event, rk_step

__all__ = [
    "MODE_SLIP_BELOW",
    "MODE_STICK",
    "MODE_SLIP_ABOVE",
    "FrictionParams",
    "Trajectory",
    "GrazingResult",
    "GrazeExtraction",
    "slip_accel",
    "slip_field",
    "sliding_coefficient",
    "stick_exit",
    "integrate",
    "poincare_map",
    "find_cycle",
    "peak_velocity",
    "find_grazing",
    "extract_normal_form",
    "linear_osc_params",
    "linear_sliding_trace_exact",
    "ode_bif_diagram",
]

MODE_SLIP_BELOW = 0   # v < 1, kinetic friction +alpha0
MODE_STICK = 1        # v = 1, static friction
MODE_SLIP_ABOVE = 2   # v > 1, kinetic friction -alpha0


@dataclass(frozen=True)
class FrictionParams:
    alpha0: float = 1.5
    alpha1: float = 1.5
    alpha2: float = 0.45
    F: float = 0.1
    nu: float = 1.7

    def __post_init__(self):
        if self.alpha0 < 0.0:
            raise ValueError("alpha0 must be >= 0")
        if self.nu <= 0.0:
            raise ValueError("nu must be > 0")

    @property
    def forcing_period(self) -> float:
        return 2.0 * math.pi / self.nu

    def replace(self, **kw) -> "FrictionParams":
        data = dict(alpha0=self.alpha0, alpha1=self.alpha1, alpha2=self.alpha2,
                    F=self.F, nu=self.nu)
        data.update(kw)
        return FrictionParams(**data)


def slip_accel(t: float, u: float, v: float, prm: FrictionParams, sgn: float) -> float:
    w = 1.0 - v
    return (-u + prm.alpha0 * sgn - prm.alpha1 * w + prm.alpha2 * w**3
            + prm.F * math.cos(prm.nu * t))


def slip_field(prm: FrictionParams, sgn: float):
    """Right-hand side (u', v') of the slipping flow with fixed friction sign."""
    def f(t, y):
        u, v = y
        return (v, slip_accel(t, u, v, prm, sgn))
    return f


def sliding_coefficient(t: float, u: float, prm: FrictionParams) -> float:
    """Convex combination coefficient on v = 1; sliding is attracting on (0, 1)."""
    a_plus = slip_accel(t, u, 1.0, prm, +1.0)
    return a_plus / (2.0 * prm.alpha0) if prm.alpha0 > 0 else math.inf


def stick_exit(prm: FrictionParams, t0: float, u0: float, t_max: float,
                t_tol: float = 1e-12):
    """First time a sticking segment reaches a sliding-region boundary.

    Returns (t_exit, u_exit, side) with side +1 for the q = 0 boundary (exit
    below, the visible fold) and -1 for q = 1 (exit above); side None when
    sticking persists through t_max.  During sticking u(t) = u0 + (t - t0).
    """
    def a_plus(t):
        return -(u0 + (t - t0)) + prm.alpha0 + prm.F * math.cos(prm.nu * t)

    def a_minus(t):
        return a_plus(t) - 2.0 * prm.alpha0

    dt = prm.forcing_period / 128.0
    t = t0
    fa_p, fa_m = a_plus(t), a_minus(t)
    while t < t_max:
        tn = min(t + dt, t_max)
        fb_p, fb_m = a_plus(tn), a_minus(tn)
        hit = None
        if fa_p > 0.0 >= fb_p:
            hit = (+1, a_plus, fa_p)
        elif fa_m < 0.0 <= fb_m:
            hit = (-1, a_minus, fa_m)
        if hit is not None:
            side, g, glo = hit
            lo, hi = t, tn
            while hi - lo > t_tol:
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if gm == 0.0:
                    lo = hi = mid
                    break
                if (glo > 0.0) == (gm > 0.0):
                    lo, glo = mid, gm
                else:
                    hi = mid
            t_exit = 0.5 * (lo + hi)
            return t_exit, u0 + (t_exit - t0), side
        t, fa_p, fa_m = tn, fb_p, fb_m
    return t_max, u0 + (t_max - t0), None


@dataclass
class Trajectory:
    prm: FrictionParams
    t0: float
    t1: float
    segments: list = field(default_factory=list)   # (mode, ndarray t, ndarray u, ndarray v)
    events: list = field(default_factory=list)     # (t, kind, u, v)

    def section_times(self) -> np.ndarray:
        """Times of recorded section crossings (including sticking entries)."""
        return np.array([t for t, kind, _, _ in self.events
                         if kind in ("section", "stick_entry")])

    def max_v(self) -> float:
        return max(seg[3].max() for seg in self.segments if len(seg[3]))

    def final_state(self) -> tuple[float, float, float]:
        mode, ts, us, vs = self.segments[-1]
        return ts[-1], us[-1], vs[-1]

    def to_csv(self) -> str:
        lines = ["t,u,v,mode"]
        for mode, ts, us, vs in self.segments:
            for t, u, v in zip(ts, us, vs):
                lines.append(f"{t:.17g},{u:.17g},{v:.17g},{mode}")
        return "\n".join(lines) + "\n"


def _initial_mode(prm, t, u, v):
    if v < 1.0:
        return MODE_SLIP_BELOW
    if v > 1.0:
        return MODE_SLIP_ABOVE
    q = sliding_coefficient(t, u, prm)
    if 0.0 < q < 1.0:
        return MODE_STICK
    return MODE_SLIP_BELOW if slip_accel(t, u, 1.0, prm, +1.0) <= 0.0 else MODE_SLIP_ABOVE


def integrate(state: tuple[float, float], prm: FrictionParams, t_span: tuple[float, float],
              mode: int | None = None, rtol: float = 1e-10, atol: float = 1e-12,
              record_sections: bool = False, section_direction: int = -1,
              keep_dense: bool = False) -> Trajectory:
    """Integrate the Filippov system with exact sticking segments.

    Mode switches (surface hits, sticking entries/exits) are localised by
    event bisection and logged; with ``record_sections`` the transversal
    zero-acceleration crossings of the chosen direction are logged too.
    """
    t, t1 = float(t_span[0]), float(t_span[1])
    u, v = float(state[0]), float(state[1])
    traj = Trajectory(prm, t, t1)
    if mode is None:
        mode = _initial_mode(prm, t, u, v)
    guard = 0
    while t < t1:
        guard += 1
        if guard > 1_000_000:
            raise IntegrationError("mode automaton failed to advance")
        if mode == MODE_STICK:
            v = 1.0
            t_exit, u_exit, side = stick_exit(prm, t, u, t1)
            traj.segments.append((MODE_STICK, np.array([t, t_exit]),
                                  np.array([u, u_exit]), np.array([1.0, 1.0])))
            if side is None:
                t, u = t_exit, u_exit
                break
            traj.events.append((t_exit, "stick_exit", u_exit, 1.0))
            t, u = t_exit, u_exit
            mode = MODE_SLIP_BELOW if side == +1 else MODE_SLIP_ABOVE
            continue
        sgn = +1.0 if mode == MODE_SLIP_BELOW else -1.0
        f = slip_field(prm, sgn)
        events = [Event("surface", lambda tt, yy: yy[1] - 1.0,
                        direction=+1 if mode == MODE_SLIP_BELOW else -1)]
        if record_sections:
            events.append(Event("section",
                                lambda tt, yy: slip_accel(tt, yy[0], yy[1], prm, sgn),
                                direction=section_direction))
        dense: list = []
        res = integrate_to_event(f, t, (u, v), t1, events, rtol=rtol, atol=atol,
                                 max_step=prm.forcing_period / 4.0, dense=dense)
        if keep_dense:
            ts = np.array([p[0] for p in dense])
            us = np.array([p[1][0] for p in dense])
            vs = np.array([p[1][1] for p in dense])
        else:
            ts = np.array([dense[0][0], dense[-1][0]])
            us = np.array([dense[0][1][0], dense[-1][1][0]])
            vs = np.array([dense[0][1][1], dense[-1][1][1]])
        traj.segments.append((mode, ts, us, vs))
        t, (u, v) = res.t, res.y
        if res.event == "section":
            traj.events.append((t, "section", u, v))
            continue
        if res.event == "surface":
            a_plus = slip_accel(t, u, 1.0, prm, +1.0)
            a_minus = a_plus - 2.0 * prm.alpha0
            if mode == MODE_SLIP_BELOW:
                if a_plus > 0.0 > a_minus:
                    traj.events.append((t, "stick_entry", u, 1.0))
                    mode = MODE_STICK
                elif a_minus >= 0.0:
                    traj.events.append((t, "surface", u, 1.0))
                    mode = MODE_SLIP_ABOVE
                else:
                    traj.events.append((t, "graze", u, 1.0))
                v = 1.0 if mode == MODE_STICK else v
            else:
                if a_plus > 0.0 > a_minus:
                    traj.events.append((t, "stick_entry", u, 1.0))
                    mode = MODE_STICK
                elif a_plus <= 0.0:
                    traj.events.append((t, "surface", u, 1.0))
                    mode = MODE_SLIP_BELOW
                else:
                    traj.events.append((t, "graze", u, 1.0))
                v = 1.0 if mode == MODE_STICK else v
            continue
    return traj


def poincare_map(state: tuple[float, float], prm: FrictionParams, t0: float = 0.0,
                 direction: int = -1, max_periods: int = 200,
                 rtol: float = 1e-10) -> tuple[float, float, float, float]:
    """Next transversal crossing of the zero-acceleration section.

    Returns (u, phase, t, v) at the crossing, with phase = t mod 2*pi/nu.
    Raises IntegrationError when the orbit does not return within
    ``max_periods`` forcing periods.
    """
    t1 = t0 + max_periods * prm.forcing_period
    traj = integrate(state, prm, (t0, t1), rtol=rtol, record_sections=True,
                     section_direction=direction)
    for t, kind, u, v in traj.events:
        if kind in ("section", "stick_entry") and t > t0 + 1e-12:
            return u, math.fmod(t, prm.forcing_period), t, v
    raise IntegrationError("orbit did not return to the section")


# ---------------------------------------------------------------------------
# smooth-flow cycle machinery (below-surface field continued through v = 1)

def _smooth_flow(prm: FrictionParams, t0: float, z: tuple[float, float], t1: float,
                 rtol: float, atol: float) -> tuple[float, float]:
    res = integrate_to_event(slip_field(prm, +1.0), t0, z, t1, (), rtol=rtol, atol=atol,
                             max_step=prm.forcing_period / 4.0)
    return res.y


def find_cycle(prm: FrictionParams, n_periods: int, z0: tuple[float, float] | None = None,
               t0: float = 0.0, transient: int = 150, rtol: float = 1e-12,
               atol: float = 1e-14, tol: float = 1e-11) -> tuple[float, float]:
    """Fixed point of the smooth-flow stroboscopic map over n forcing periods.

    Newton with finite-difference Jacobian and step halving; without a seed,
    a forward transient supplies one (adequate when the cycle is stable).
    """
    T = n_periods * prm.forcing_period

    def phi(z):
        try:
            return _smooth_flow(prm, t0, z, t0 + T, rtol, atol)
        except (OverflowError, IntegrationError):
            return (math.inf, math.inf)

    if z0 is None:
        z = (0.0, 0.0)
        z = _smooth_flow(prm, t0, z, t0 + transient * prm.forcing_period, 1e-9, 1e-11)
    else:
        z = tuple(z0)

    def gnorm(g):
        return math.hypot(g[0], g[1]) if all(map(math.isfinite, g)) else math.inf

    pz = phi(z)
    g = (pz[0] - z[0], pz[1] - z[1])
    for _ in range(60):
        if gnorm(g) < tol * (1.0 + abs(z[0]) + abs(z[1])):
            return z
        h = 1e-7 * (1.0 + abs(z[0]) + abs(z[1]))
        ju = phi((z[0] + h, z[1]))
        jv = phi((z[0], z[1] + h))
        j = np.array([[(ju[0] - pz[0]) / h - 1.0, (jv[0] - pz[0]) / h],
                      [(ju[1] - pz[1]) / h, (jv[1] - pz[1]) / h - 1.0]])
        try:
            dz = np.linalg.solve(j, np.array(g))
        except np.linalg.LinAlgError:
            raise IntegrationError("singular Newton system in cycle search")
        lam = 1.0
        for _ in range(6):
            cand = (z[0] - lam * dz[0], z[1] - lam * dz[1])
            pc = phi(cand)
            gc = (pc[0] - cand[0], pc[1] - cand[1])
            if gnorm(gc) < gnorm(g):
                z, pz, g = cand, pc, gc
                break
            lam *= 0.5
        else:
            z = (z[0] - dz[0], z[1] - dz[1])
            pz = phi(z)
            g = (pz[0] - z[0], pz[1] - z[1])
    if gnorm(g) < 1e-7:
        return z
    raise IntegrationError(f"cycle Newton did not converge (|G|={gnorm(g):.2e})")


def peak_velocity(prm: FrictionParams, z: tuple[float, float], n_periods: int,
                  t0: float = 0.0, rtol: float = 1e-12, atol: float = 1e-14,
                  smooth: bool = True) -> tuple[float, float]:
    """(max v, time of max) along the flow over n forcing periods.

    Velocity extrema are located as zero-acceleration events, so the peak is
    resolved to event tolerance rather than step resolution.
    """
    f = slip_field(prm, +1.0)
    T = n_periods * prm.forcing_period
    best_v, best_t = -math.inf, t0
    t, z = t0, tuple(z)
    if not smooth:
        raise NotImplementedError("peak_velocity is used on the smooth flow")
    while t < t0 + T - 1e-13:
        res = integrate_to_event(
            f, t, z, t0 + T,
            (Event("vmax", lambda tt, yy: slip_accel(tt, yy[0], yy[1], prm, +1.0),
                   direction=-1),),
            rtol=rtol, atol=atol, max_step=prm.forcing_period / 4.0)
        if res.y[1] > best_v:
            best_v, best_t = res.y[1], res.t
        t, z = res.t, res.y
    return best_v, best_t


@dataclass
class GrazingResult:
    nu: float
    cycle_state: tuple[float, float]
    n_periods: int
    peak_v: float
    peak_time: float


def _map_jacobian(prm, z, n_periods, rtol, atol):
    h = 1e-7 * (1.0 + abs(z[0]) + abs(z[1]))
    T = n_periods * prm.forcing_period
    p0 = _smooth_flow(prm, 0.0, z, T, rtol, atol)
    pu = _smooth_flow(prm, 0.0, (z[0] + h, z[1]), T, rtol, atol)
    pv = _smooth_flow(prm, 0.0, (z[0], z[1] + h), T, rtol, atol)
    return np.array([[(pu[0] - p0[0]) / h, (pv[0] - p0[0]) / h],
                     [(pu[1] - p0[1]) / h, (pv[1] - p0[1]) / h]])


def find_subharmonic_cycle(prm: FrictionParams, n_periods: int,
                           z0: tuple[float, float] | None = None,
                           rtol: float = 1e-12, atol: float = 1e-14) -> tuple[float, float]:
    """Cycle of the n-period stroboscopic map, preferring a genuine subharmonic.

    Newton can land on a lower-period parent cycle (which is also a fixed
    point of the longer map).  When that parent is period-doubling unstable,
    the daughter branch is recovered by kicking the seed along the parent's
    unstable eigenvector and re-solving.
    """
    z = find_cycle(prm, n_periods, z0=z0, rtol=rtol, atol=atol)
    if n_periods % 2 != 0:
        return z
    half = n_periods // 2
    T_half = half * prm.forcing_period
    zh = _smooth_flow(prm, 0.0, z, T_half, rtol, atol)
    scale = 1.0 + abs(z[0]) + abs(z[1])
    if math.hypot(zh[0] - z[0], zh[1] - z[1]) > 1e-8 * scale:
        return z  # already a genuine subharmonic
    j = _map_jacobian(prm, z, half, rtol, atol)
    eigvals, eigvecs = np.linalg.eig(j)
    idx = int(np.argmin(eigvals.real))
    if eigvals[idx].real > -1.0 or abs(eigvals[idx].imag) > 1e-8:
        return z  # no period-doubled daughter to find
    vec = eigvecs[:, idx].real
    vec /= math.hypot(vec[0], vec[1])
    for eps in (1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3):
        for sgn in (+1.0, -1.0):
            e = sgn * eps * scale
            try:
                cand = find_cycle(prm, n_periods,
                                  z0=(z[0] + e * vec[0], z[1] + e * vec[1]),
                                  rtol=rtol, atol=atol)
            except IntegrationError:
                continue
            ch = _smooth_flow(prm, 0.0, cand, T_half, rtol, atol)
            if math.hypot(ch[0] - cand[0], ch[1] - cand[1]) > 1e-8 * scale:
                return cand
    return z


def find_grazing(prm: FrictionParams, nu_lo: float, nu_hi: float,
                 n_periods: int = 4, tol: float = 1e-10) -> GrazingResult:
    """Forcing frequency at which the continued limit cycle grazes v = 1.

    Bisection on (max v) - 1 along the smooth-flow cycle, continued in nu
    with the previous fixed point as the Newton seed.  The subharmonic
    daughter branch is tracked through the nearby period doubling.
    """
    solved: dict[float, tuple[float, float]] = {}

    def measure(nu):
        p = prm.replace(nu=nu)
        seed = solved[min(solved, key=lambda k: abs(k - nu))] if solved else None
        z = find_subharmonic_cycle(p, n_periods, z0=seed)
        solved[nu] = z
        vmax, tmax = peak_velocity(p, z, n_periods)
        return vmax - 1.0, z, tmax

    # Walk the branch down from the high end so each solve is seeded nearby
    # (the subharmonic daughter is hard to reach from a cold seed).
    m_hi, _, _ = measure(nu_hi)
    for nu in np.linspace(nu_hi, nu_lo, 6)[1:]:
        m_lo, _, _ = measure(float(nu))
    if (m_lo < 0.0) == (m_hi < 0.0):
        raise NoBracketError(f"max(v)-1 has no sign change on [{nu_lo}, {nu_hi}]"
                             f" ({m_lo:.3g}, {m_hi:.3g})")
    while nu_hi - nu_lo > tol:
        mid = 0.5 * (nu_lo + nu_hi)
        m, _, _ = measure(mid)
        if (m < 0.0) == (m_lo < 0.0):
            nu_lo, m_lo = mid, m
        else:
            nu_hi, m_hi = mid, m
    nu = 0.5 * (nu_lo + nu_hi)
    p = prm.replace(nu=nu)
    z = find_subharmonic_cycle(p, n_periods, z0=solved[min(solved, key=lambda k: abs(k - nu))])
    vmax, tmax = peak_velocity(p, z, n_periods)
    return GrazingResult(nu, z, n_periods, vmax, tmax)


# ---------------------------------------------------------------------------
# normal-form extraction

@dataclass
class GrazeExtraction:
    nu_graz: float
    tau_L: float
    tau_R: float
    delta_R: float
    delta_L_raw: float
    jac_L: np.ndarray
    jac_R: np.ndarray
    conditioning: dict
    conditioning_ok: bool


def _window_map(prm, t_s, period, rtol, atol):
    """Full Filippov flow over one cycle period from section time t_s,
    together with a flag for whether any sliding occurred."""
    def w(z):
        traj = integrate(z, prm, (t_s, t_s + period), rtol=rtol, atol=atol)
        _, u, v = traj.final_state()
        slid = any(kind == "stick_entry" for _, kind, _, _ in traj.events)
        return (u, v), slid
    return w


def _richardson_ray(w, z0, w0, n_hat, d):
    """One-sided directional derivative along n_hat, exponents {1,3/2,2,5/2}.

    The sliding piece of the return map is C^1 with half-power corrections
    starting at eps^(3/2) (tangential entry into the sliding region), so a
    plain slope is polluted at O(sqrt(d)); fitting and removing the half
    powers leaves an O(d^2) error plus integration noise of O(tol/d).
    """
    eps = (d, 2.0 * d, 4.0 * d, 8.0 * d)
    mat = np.array([[e, e**1.5, e * e, e**2.5] for e in eps])
    rhs = []
    for e in eps:
        val, slid = w((z0[0] + e * n_hat[0], z0[1] + e * n_hat[1]))
        rhs.append((val[0] - w0[0], val[1] - w0[1]))
    rhs = np.array(rhs)
    coef = np.linalg.solve(mat, rhs)
    return coef[0]


def extract_normal_form(prm: FrictionParams, nu_bracket: tuple[float, float] = (1.69, 1.72),
                        grazing: GrazingResult | None = None, n_periods: int = 4,
                        d_slide: float = 2e-4, d_smooth: float = 1e-5,
                        h_values: tuple[float, ...] = (1e-5, 1e-6, 1e-7),
                        cond_tol: float = 1e-2, rtol: float = 1e-12,
                        atol: float = 1e-14) -> GrazeExtraction:
    """Normal-form coefficients (tau_L, tau_R, delta_R) at the grazing cycle.

    The Poincare section is the stroboscopic section half a cycle period away
    from the grazing point.  The non-sliding piece is differenced centrally
    at a small offset into its own side; the sliding piece's normal-direction
    derivative uses the one-sided half-power fit, with its tangential
    derivative taken from the non-sliding piece (the two pieces agree along
    the switching boundary).  The degenerate piece is reported as L.
    """
    if grazing is None:
        grazing = find_grazing(prm, *nu_bracket, n_periods=n_periods)
    p = prm.replace(nu=grazing.nu)
    period = n_periods * p.forcing_period
    t_s = grazing.peak_time - 0.5 * period
    z_s = _smooth_flow(p, 0.0, grazing.cycle_state, t_s, rtol, atol) if t_s >= 0.0 else \
        _smooth_flow(p, 0.0, grazing.cycle_state, t_s + period, rtol, atol)
    if t_s < 0.0:
        t_s += period
    w = _window_map(p, t_s, period, rtol, atol)
    scale = 1.0 + abs(z_s[0]) + abs(z_s[1])

    # Boundary normal from the smooth-flow peak velocity.
    def peak(z):
        v, _ = peak_velocity(p, z, n_periods, t0=t_s, rtol=rtol, atol=atol)
        return v

    hg = 1e-6 * scale
    p0 = peak(z_s)
    gx = (peak((z_s[0] + hg, z_s[1])) - p0) / hg
    gy = (peak((z_s[0], z_s[1] + hg)) - p0) / hg
    gn = math.hypot(gx, gy)
    n_hat = (gx / gn, gy / gn)          # points into the sliding side
    t_hat = (-n_hat[1], n_hat[0])

    w0, _ = w(z_s)

    def jac_r(h):
        base = (z_s[0] - d_smooth * scale * n_hat[0], z_s[1] - d_smooth * scale * n_hat[1])
        cols = []
        for e in ((h, 0.0), (0.0, h)):
            vp, sp = w((base[0] + e[0], base[1] + e[1]))
            vm, sm = w((base[0] - e[0], base[1] - e[1]))
            if sp or sm:
                raise IntegrationError("non-sliding stencil touched the sliding region")
            cols.append(((vp[0] - vm[0]) / (2 * h), (vp[1] - vm[1]) / (2 * h)))
        return np.array(cols).T

    h_mid = h_values[len(h_values) // 2] * scale
    jr = jac_r(h_mid)
    spread = {}
    taus, dets = [], []
    for h in h_values:
        jh = jac_r(h * scale)
        taus.append(float(np.trace(jh)))
        dets.append(float(np.linalg.det(jh)))
    spread["tau_R"] = max(taus) - min(taus)
    spread["delta_R"] = max(dets) - min(dets)

    b_n = _richardson_ray(w, z_s, w0, n_hat, d_slide * scale)
    jt = jr @ np.array(t_hat)
    n_col = np.array(n_hat)
    t_col = np.array(t_hat)
    jl = np.outer(b_n, n_col) + np.outer(jt, t_col)

    tau_r = float(np.trace(jr))
    det_r = float(np.linalg.det(jr))
    tau_l = float(np.trace(jl))
    det_l = float(np.linalg.det(jl))
    ok = spread["tau_R"] < cond_tol and spread["delta_R"] < cond_tol
    return GrazeExtraction(grazing.nu, tau_l, tau_r, det_r, det_l, jl, jr,
                           spread, ok)


def find_grazing_forcing(prm: FrictionParams, f_lo: float, f_hi: float,
                         n_periods: int = 1, tol: float = 1e-11) -> tuple[FrictionParams, GrazingResult]:
    """Forcing amplitude at which the cycle grazes, at fixed frequency.

    Used for the linear (alpha2 = 0) model, whose grazing cycle spans one
    forcing period and is unstable: Newton continuation in F needs no
    transient and handles the instability.
    """
    solved: dict[float, tuple[float, float]] = {}

    def measure(fval):
        p = prm.replace(F=fval)
        seed = solved[min(solved, key=lambda k: abs(k - fval))] if solved else (0.0, 0.0)
        z = find_cycle(p, n_periods, z0=seed)
        solved[fval] = z
        vmax, tmax = peak_velocity(p, z, n_periods)
        return vmax - 1.0, z, tmax

    m_lo, _, _ = measure(f_lo)
    m_hi, _, _ = measure(f_hi)
    if (m_lo < 0.0) == (m_hi < 0.0):
        raise NoBracketError(f"max(v)-1 has no sign change on F in [{f_lo}, {f_hi}]")
    while f_hi - f_lo > tol:
        mid = 0.5 * (f_lo + f_hi)
        m, _, _ = measure(mid)
        if (m < 0.0) == (m_lo < 0.0):
            f_lo, m_lo = mid, m
        else:
            f_hi, m_hi = mid, m
    f = 0.5 * (f_lo + f_hi)
    p = prm.replace(F=f)
    z = find_cycle(p, n_periods, z0=solved[min(solved, key=lambda k: abs(k - f))])
    vmax, tmax = peak_velocity(p, z, n_periods)
    return p, GrazingResult(p.nu, z, n_periods, vmax, tmax)


def linear_osc_params(alpha1: float, nu: float, mu: float = 1.0) -> NormalFormParams:
    """Commonly quoted closed forms for the alpha2 = 0 oscillator.

    tau_R = 2 e^beta cos(alpha) and delta_R = e^(2 beta) are exact (the
    smooth piece's full-period monodromy).  The tau_L given here,
    e^beta cos(alpha), drops the damping-phase term of the true sliding
    trace; see :func:`linear_sliding_trace_exact` for the exact value the
    extraction pipeline reproduces.
    """
    if not alpha1 < 2.0:
        raise DomainError("alpha1 must be < 2 for oscillatory dynamics")
    alpha = (2.0 * math.pi / nu) * math.sqrt(1.0 - alpha1 * alpha1 / 4.0)
    beta = math.pi * alpha1 / nu
    tau_l = math.exp(beta) * math.cos(alpha)
    return NormalFormParams(tau_l, 2.0 * tau_l, math.exp(2.0 * beta), mu)


def linear_sliding_trace_exact(alpha1: float, nu: float) -> float:
    """Exact sliding-piece trace for the alpha2 = 0 oscillator at grazing.

    The sliding piece's derivative is the rank-1 product
    (M_B e_u)(e_u^T M_A), where M_A, M_B are the smooth monodromies before
    and after the graze and e_u spans the surface direction, so its trace is
    the u-u entry of the full-period monodromy:

        e^(b T) (cos(w T) - (b / w) sin(w T)),   b = alpha1/2,
        w = sqrt(1 - alpha1^2 / 4),              T = 2 pi / nu.
    """
    if not alpha1 < 2.0:
        raise DomainError("alpha1 must be < 2 for oscillatory dynamics")
    b = alpha1 / 2.0
    om = math.sqrt(1.0 - b * b)
    T = 2.0 * math.pi / nu
    return math.exp(b * T) * (math.cos(om * T) - (b / om) * math.sin(om * T))


def ode_bif_diagram(prm: FrictionParams, nus, transient_periods: int = 200,
                    record_periods: int = 200, rtol: float = 1e-9,
                    atol: float = 1e-11) -> list[tuple[float, np.ndarray]]:
    """Section times (mod forcing period) per forcing frequency.

    For each nu the orbit is integrated past a transient and the times of
    zero-acceleration crossings (and sticking entries) are recorded modulo
    the forcing period.
    """
    out = []
    for nu in nus:
        p = prm.replace(nu=nu)
        T = p.forcing_period
        try:
            traj = integrate((0.0, 0.0), p, (0.0, transient_periods * T),
                             rtol=rtol, atol=atol)
            _, u, v = traj.final_state()
            t_start = transient_periods * T
            rec = integrate((u, v), p, (t_start, t_start + record_periods * T),
                            rtol=rtol, atol=atol, record_sections=True)
            times = np.mod(rec.section_times(), T)
        except IntegrationError:
            times = np.array([math.nan])
        out.append((nu, times))
    return out
