"""Adaptive Dormand-Prince RK45 with event localisation, for small systems.

State vectors are plain tuples of floats: at this dimension Python-tuple
arithmetic beats numpy arrays and keeps the integrator dependency-free.
Events are detected on cubic-Hermite samples inside each accepted step
(which catches crossings that return within the step) and the hit time is
then refined by bisecting re-integrated partial steps from the step start,
so event times inherit the integrator's accuracy, not the interpolant's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import IntegrationError

__all__ = ["Event", "StepResult", "integrate_to_event", "rk_step"]

_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_B5 = _A[6]
_E = (71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
      -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


def _axpy(y, k, coeffs, h):
    n = len(y)
    out = list(y)
    for c, ki in zip(coeffs, k):
        if c == 0.0:
            continue
        hc = h * c
        for i in range(n):
            out[i] += hc * ki[i]
    return tuple(out)


def rk_step(f, t, y, h, f0=None):
    """One Dormand-Prince step; returns (y5, err_estimate, f0)."""
    k = [f0 if f0 is not None else f(t, y)]
    for s in range(1, 7):
        k.append(f(t + _C[s] * h, _axpy(y, k, _A[s], h)))
    y5 = _axpy(y, k, _B5, h)
    err = _axpy((0.0,) * len(y), k, _E, h)
    return y5, err, k[0]


def _hermite(y0, f0, y1, f1, h, s):
    """Cubic Hermite value at fraction s of the step."""
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return tuple(h00 * a + h10 * h * fa + h01 * b + h11 * h * fb
                 for a, fa, b, fb in zip(y0, f0, y1, f1))


@dataclass
class Event:
    """Zero crossing of g(t, y) with the given direction (+1, -1, or 0=any)."""

    name: str
    g: Callable
    direction: int = 0


@dataclass
class StepResult:
    t: float
    y: tuple
    event: str | None = None


def _err_norm(err, y0, y1, rtol, atol):
    acc = 0.0
    for e, a, b in zip(err, y0, y1):
        sc = atol + rtol * max(abs(a), abs(b))
        acc = max(acc, abs(e) / sc)
    return acc


def _refine_event(f, ev, t, y, f0, h, lo, hi, glo):
    """Bisect the event fraction in [lo, hi] using re-integrated sub-steps."""
    for _ in range(100):
        if (hi - lo) * abs(h) < 1e-13 * (1.0 + abs(t)):
            break
        mid = 0.5 * (lo + hi)
        ym, _, _ = rk_step(f, t, y, h * mid, f0)
        gm = ev.g(t + h * mid, ym)
        if gm == 0.0:
            return mid
        if (glo < 0.0) != (gm < 0.0):
            hi = mid
        else:
            lo, glo = mid, gm
    return hi


def integrate_to_event(f, t0, y0, t1, events: Sequence[Event] = (),
                       rtol=1e-10, atol=1e-12, max_step=math.inf,
                       dense: list | None = None, n_sub=8,
                       on_sample: Callable | None = None) -> StepResult:
    """Integrate y' = f(t, y) until t1 or the first event crossing.

    ``dense`` (if a list) collects (t, y) at accepted steps; ``on_sample``
    receives consecutive interpolant samples, which is how section crossings
    are recorded without terminating the integration.
    """
    t, y = t0, tuple(float(v) for v in y0)
    if t1 == t0:
        return StepResult(t, y)
    direction = 1.0 if t1 > t0 else -1.0
    h = direction * min(max_step, max(1e-6, abs(t1 - t0) / 100.0))
    f0 = f(t, y)
    gvals = [ev.g(t, y) for ev in events]
    if dense is not None:
        dense.append((t, y))
    rejected = 0
    while (t1 - t) * direction > 0.0:
        if (t + h - t1) * direction > 0.0:
            h = t1 - t
        y5, err, _ = rk_step(f, t, y, h, f0)
        en = _err_norm(err, y, y5, rtol, atol)
        if en > 1.0:
            h *= max(0.2, 0.9 * en ** -0.2)
            rejected += 1
            if rejected > 60 or abs(h) < 1e-15 * max(1.0, abs(t)):
                raise IntegrationError(f"step size underflow at t={t}")
            continue
        rejected = 0
        t_next, y_next = t + h, y5
        f1 = f(t_next, y_next)
        hit_name, hit_frac = None, None
        if events or on_sample is not None:
            prev_t, prev_y, prev_g, prev_s = t, y, gvals, 0.0
            for j in range(1, n_sub + 1):
                s = j / n_sub
                ys = y_next if j == n_sub else _hermite(y, f0, y_next, f1, h, s)
                ts = t + h * s
                if on_sample is not None:
                    on_sample(prev_t, prev_y, ts, ys)
                gs = [ev.g(ts, ys) for ev in events]
                for idx, ev in enumerate(events):
                    ga, gb = prev_g[idx], gs[idx]
                    if not (math.isfinite(ga) and math.isfinite(gb)) or ga == 0.0:
                        continue
                    crossed = (ga < 0.0 <= gb and ev.direction >= 0) or \
                              (ga > 0.0 >= gb and ev.direction <= 0)
                    if crossed:
                        frac = _refine_event(f, ev, t, y, f0, h, prev_s, s, ga)
                        if hit_frac is None or frac < hit_frac:
                            hit_name, hit_frac = ev.name, frac
                if hit_name is not None:
                    break
                prev_t, prev_y, prev_g, prev_s = ts, ys, gs, s
        if hit_name is not None:
            y_hit, _, _ = rk_step(f, t, y, h * hit_frac, f0)
            t_hit = t + h * hit_frac
            if dense is not None:
                dense.append((t_hit, y_hit))
            return StepResult(t_hit, y_hit, event=hit_name)
        t, y, f0 = t_next, y_next, f1
        gvals = [ev.g(t, y) for ev in events]
        if dense is not None:
            dense.append((t, y))
        h = direction * min(max_step, abs(h) * min(5.0, 0.9 * (en + 1e-16) ** -0.2))
    return StepResult(t, y)
