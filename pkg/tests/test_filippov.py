import math

import numpy as np
import pytest

from bcnf.errors import DomainError, NoBracketError
from bcnf.filippov import (
    MODE_SLIP_BELOW,
    MODE_STICK,
    FrictionParams,
    extract_normal_form,
    find_cycle,
    find_grazing,
    find_grazing_forcing,
    integrate,
    linear_osc_params,
    linear_sliding_trace_exact,
    ode_bif_diagram,
    peak_velocity,
    poincare_map,
    slip_accel,
    sliding_coefficient,
)
from bcnf.ode import integrate_to_event
from bcnf.filippov import slip_field


def exact_linear_flow(prm, t0, y0, t):
    """Closed-form solution of the alpha2 = 0 slipping flow (v < 1 branch)."""
    a1 = prm.alpha1
    b = a1 / 2.0
    om = math.sqrt(1.0 - b * b)
    # particular: constant + forced response of u'' - a1 u' + u = c0 + F cos(nu t)
    c0 = prm.alpha0 - a1
    den = (1.0 - prm.nu**2) ** 2 + (a1 * prm.nu) ** 2
    cr = (1.0 - prm.nu**2) / den
    ci = -(-a1 * prm.nu) / den
    up = lambda t: c0 + prm.F * (cr * math.cos(prm.nu * t) - ci * math.sin(prm.nu * t))
    vp = lambda t: prm.F * prm.nu * (-cr * math.sin(prm.nu * t) - ci * math.cos(prm.nu * t))
    du0 = y0[0] - up(t0)
    dv0 = y0[1] - vp(t0)
    # homogeneous in (du, dv): exp(A t) with A = [[0,1],[-1,a1]]
    s = t - t0
    e = math.exp(b * s)
    cw, sw = math.cos(om * s), math.sin(om * s)
    m11 = e * (cw - b / om * sw)
    m12 = e * sw / om
    m21 = -e * sw / om
    m22 = e * (cw + b / om * sw)
    return (up(t) + m11 * du0 + m12 * dv0, vp(t) + m21 * du0 + m22 * dv0)


class TestFieldsAndSliding:
    def test_accel_substitution(self):
        prm = FrictionParams(alpha0=1.5, alpha1=1.5, alpha2=0.45, F=0.3, nu=2.0)
        assert slip_accel(0.0, 0.0, 0.0, prm, +1.0) == pytest.approx(1.5 - 1.5 + 0.45 + 0.3)

    def test_field_affine_without_cubic(self):
        prm = FrictionParams(alpha2=0.0, F=0.2, nu=1.3)
        f = slip_field(prm, +1.0)
        y1 = np.array(f(0.7, (0.2, 0.3)))
        y2 = np.array(f(0.7, (0.4, 0.9)))
        y3 = np.array(f(0.7, (0.3, 0.6)))
        np.testing.assert_allclose(0.5 * (y1 + y2), y3, atol=1e-14)

    def test_sliding_coefficient_bounds(self):
        prm = FrictionParams(F=0.1, nu=1.7)
        # interior of the sliding region
        assert 0.0 < sliding_coefficient(0.0, 0.0, prm) < 1.0
        # far outside
        assert not 0.0 < sliding_coefficient(0.0, 5.0, prm) < 1.0

    def test_energy_conserved_without_friction(self):
        prm = FrictionParams(alpha0=0.0, alpha1=0.0, alpha2=0.0, F=0.0, nu=1.0)
        res = integrate_to_event(slip_field(prm, +1.0), 0.0, (0.6, 0.2), 30.0, (),
                                 rtol=1e-10, atol=1e-12)
        assert res.y[0] ** 2 + res.y[1] ** 2 == pytest.approx(0.4, abs=1e-8)

    def test_linear_flow_matches_closed_form(self):
        prm = FrictionParams(alpha2=0.0, F=0.15, nu=1.9)
        res = integrate_to_event(slip_field(prm, +1.0), 0.2, (0.1, -0.4), 7.0, (),
                                 rtol=1e-11, atol=1e-13)
        exact = exact_linear_flow(prm, 0.2, (0.1, -0.4), 7.0)
        assert res.y[0] == pytest.approx(exact[0], abs=1e-9)
        assert res.y[1] == pytest.approx(exact[1], abs=1e-9)


class TestSticking:
    def test_sticking_holds_velocity(self):
        prm = FrictionParams(F=0.1, nu=1.7)
        traj = integrate((0.0, 1.0), prm, (0.0, 0.5))
        assert traj.segments[0][0] == MODE_STICK
        np.testing.assert_array_equal(traj.segments[0][3], 1.0)

    def test_stick_exit_on_static_limit(self):
        # Exit when -u + F cos(nu t) reaches -alpha0, i.e. u = F cos + alpha0.
        prm = FrictionParams(F=0.1, nu=1.7)
        traj = integrate((0.0, 1.0), prm, (0.0, 10.0))
        exits = [(t, u) for t, kind, u, _ in traj.events if kind == "stick_exit"]
        assert exits
        t_e, u_e = exits[0]
        assert u_e == pytest.approx(prm.F * math.cos(prm.nu * t_e) + prm.alpha0, abs=1e-9)

    def test_interior_sticking_persists(self):
        prm = FrictionParams(F=0.05, nu=1.7)
        traj = integrate((0.0, 1.0), prm, (0.0, 0.2))
        assert all(kind != "stick_exit" for _, kind, _, _ in traj.events)

    def test_exit_independent_of_tolerance(self):
        prm = FrictionParams(F=0.1, nu=1.7)
        t1 = integrate((0.0, 1.0), prm, (0.0, 10.0), rtol=1e-8, atol=1e-10)
        t2 = integrate((0.0, 1.0), prm, (0.0, 10.0), rtol=1e-12, atol=1e-14)
        e1 = [t for t, k, _, _ in t1.events if k == "stick_exit"][0]
        e2 = [t for t, k, _, _ in t2.events if k == "stick_exit"][0]
        assert e1 == pytest.approx(e2, abs=1e-10)

    def test_attracting_surface_entry(self):
        # An orbit hitting v = 1 inside the sliding region sticks.
        prm = FrictionParams(F=0.1, nu=1.7)
        traj = integrate((0.0, 0.9), prm, (0.0, 30.0))
        kinds = [k for _, k, _, _ in traj.events]
        assert "stick_entry" in kinds


class TestPoincare:
    def test_returns_section_state(self):
        prm = FrictionParams(nu=1.75)
        u, phase, t, v = poincare_map((1.6, -0.1), prm)
        assert 0.0 <= phase < prm.forcing_period
        assert abs(slip_accel(t, u, v, prm, +1.0)) < 1e-9

    def test_grazing_cycle_period_and_section(self):
        # The grazing cycle spans four forcing periods (two loops).
        prm = FrictionParams()
        g = find_grazing(prm, 1.706, 1.710, n_periods=4, tol=1e-8)
        assert g.nu == pytest.approx(1.7078, abs=1e-3)
        assert g.peak_v == pytest.approx(1.0, abs=1e-7)


@pytest.mark.slow
class TestGrazingPipeline:
    def test_nu_graz_and_extraction(self):
        prm = FrictionParams()
        g = find_grazing(prm, 1.70, 1.713, n_periods=4, tol=1e-9)
        assert g.nu == pytest.approx(1.7078, abs=1e-3)
        ex = extract_normal_form(prm, grazing=g)
        assert ex.tau_L == pytest.approx(-1.653, abs=5e-3)
        assert ex.tau_R == pytest.approx(0.848, abs=5e-3)
        assert ex.delta_R == pytest.approx(0.006, abs=5e-3)
        assert abs(ex.delta_L_raw) < 1e-4
        assert ex.conditioning_ok

    def test_no_bracket_error(self):
        prm = FrictionParams()
        with pytest.raises(NoBracketError):
            find_grazing(prm, 1.75, 1.78, n_periods=2, tol=1e-6)


class TestLinearOscillator:
    def test_closed_form_values(self):
        p = linear_osc_params(0.5, 2.0)
        beta = math.pi * 0.5 / 2.0
        alpha = (2.0 * math.pi / 2.0) * math.sqrt(1.0 - 0.25 / 4.0)
        assert p.tau_L == pytest.approx(math.exp(beta) * math.cos(alpha))
        assert p.tau_R == pytest.approx(2.0 * p.tau_L)
        assert p.delta_R == pytest.approx(math.exp(2.0 * beta))

    def test_beta_quarter_delta(self):
        nu = 2.0
        alpha1 = 0.25 * nu / math.pi
        p = linear_osc_params(alpha1, nu)
        assert p.delta_R == pytest.approx(math.exp(0.5), abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            linear_osc_params(2.0, 1.0)

    @pytest.mark.slow
    def test_extraction_cross_validation(self):
        # The smooth piece matches the closed forms to machine-ish accuracy;
        # the sliding-piece trace matches the exact monodromy entry, which
        # the quoted tau_L approximates only when sin(alpha) is small.
        nu = 2.0
        alpha1 = 0.25 * nu / math.pi
        prm = FrictionParams(alpha1=alpha1, alpha2=0.0, nu=nu, F=0.5)
        p, g = find_grazing_forcing(prm, 0.1, 3.0, n_periods=1)
        ex = extract_normal_form(p, grazing=g, n_periods=1,
                                 d_slide=2e-4, d_smooth=0.05, h_values=(0.02, 0.01))
        ref = linear_osc_params(alpha1, nu)
        assert ex.tau_R == pytest.approx(ref.tau_R, abs=1e-9)
        assert ex.delta_R == pytest.approx(ref.delta_R, abs=1e-9)
        assert ex.tau_L == pytest.approx(linear_sliding_trace_exact(alpha1, nu), abs=1e-6)
        assert abs(ex.delta_L_raw) < 1e-5


@pytest.mark.slow
def test_bif_diagram_gap_below_grazing():
    # Just below grazing the chaotic attractor has two components: the
    # scattered section times show an internal gap much wider than the
    # typical spacing (for uniform scatter the largest spacing would be
    # around ln(n)/n of the range).
    prm = FrictionParams(nu=1.70)
    data = ode_bif_diagram(prm, [1.70], transient_periods=100, record_periods=250)
    _, times = data[0]
    times = np.sort(times[np.isfinite(times)])
    assert times.size > 100
    rng = times.max() - times.min()
    assert np.diff(times).max() > 0.08 * rng


def test_cycle_stability_above_grazing():
    prm = FrictionParams(nu=1.75)
    z = find_cycle(prm, 2)
    vmax, _ = peak_velocity(prm, z, 2)
    assert vmax < 1.0
