import math

import numpy as np
import pytest

from bcnf.errors import NoBracketError
from bcnf.flu import (
    FluParams,
    find_period_doubling,
    flu_bif_diagram,
    flu_k_window,
    flu_normal_form,
    flu_orbit,
    flu_step,
    normal_form_window_scan,
    outbreak_size,
    reproduction_number,
)


def final_size_oracle(S, T, k, R0, n=200_000):
    """Plain bisection on the final-size equation, for cross-checking."""
    lo, hi = 1e-12, 1.0
    f = lambda p: -S * math.expm1(-R0 * p) - T * math.expm1(-k * R0 * p) - p
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestOutbreakSize:
    def test_below_threshold_zero(self):
        prm = FluParams(0.5, 0.9, 2.0)
        assert outbreak_size(0.2, 0.2, prm) == 0.0

    def test_classic_final_size(self):
        prm = FluParams(0.5, 0.9, 2.0)
        p = outbreak_size(1.0, 0.0, prm)
        assert p == pytest.approx(0.7968121300200199, abs=1e-12)
        assert p == pytest.approx(final_size_oracle(1.0, 0.0, 0.5, 2.0), abs=1e-10)

    def test_threshold_continuity(self):
        # p grows like (2/R0)(r-1) just above threshold; exactly 0 below.
        prm = FluParams(0.5, 0.9, 2.0)
        above = outbreak_size((1.0 + 1e-6) / 2.0, 0.0, prm)
        below = outbreak_size((1.0 - 1e-6) / 2.0, 0.0, prm)
        assert below == 0.0
        assert 0.0 < above < 2e-6

    def test_exact_threshold(self):
        prm = FluParams(0.5, 0.9, 2.0)
        assert reproduction_number(0.0, 1.0, FluParams(0.5, 0.9, 2.0)) == pytest.approx(1.0)
        assert outbreak_size(0.0, 1.0, prm) == 0.0

    def test_mixed_susceptibility_root_verified(self):
        prm = FluParams(0.3, 0.8, 3.0)
        S, T = 0.55, 0.35
        p = outbreak_size(S, T, prm)
        res = (-S * math.expm1(-prm.R0 * p) - T * math.expm1(-prm.k * prm.R0 * p) - p)
        assert abs(res) < 1e-12
        assert p == pytest.approx(final_size_oracle(S, T, 0.3, 3.0), abs=1e-10)


class TestFluStep:
    def test_no_outbreak_image_on_unit_line(self):
        prm = FluParams(0.5, 0.9, 0.8)
        for state in ((0.0, 1.0), (0.3, 0.4), (0.6, 0.2)):
            if reproduction_number(*state, prm) <= 1.0:
                s2, t2 = flu_step(state, prm)
                assert s2 + t2 == pytest.approx(1.0, abs=1e-15)

    def test_full_susceptibility_fixed_point_below_threshold(self):
        # With R0 < 1 immunity wanes to nothing: (1, 0) is fixed and
        # (0, 1) reaches it in one step.
        prm = FluParams(0.5, 0.9, 0.8)
        assert flu_step((1.0, 0.0), prm) == (1.0, 0.0)
        assert flu_step((0.0, 1.0), prm) == (1.0, 0.0)

    def test_orbit_stays_in_simplex(self):
        prm = FluParams(0.4, 0.9, 2.0)
        pts = flu_orbit(prm, 500)
        assert np.all(pts[1:, 0] >= -1e-12)
        assert np.all(pts[1:, 1] >= -1e-12)
        assert np.all(pts[1:].sum(axis=1) <= 1.0 + 1e-12)


class TestNormalForm:
    def test_values(self):
        p = flu_normal_form(0.5, 0.9)
        assert p.tau_L == 0.0
        assert p.tau_R == pytest.approx(-1.8)
        assert p.delta_R == pytest.approx(0.81)

    def test_k_to_one_limit(self):
        p = flu_normal_form(1.0 - 1e-9, 0.9)
        assert abs(p.delta_R) < 1e-8

    def test_window_endpoints(self):
        k1, k2 = flu_k_window(0.9)
        assert k1 == pytest.approx(0.382716, abs=1e-6)
        assert k2 == pytest.approx(0.506173, abs=1e-6)

    def test_window_scan_matches_formulas(self):
        k1, k2 = normal_form_window_scan(0.9, 0.34, 0.55, 1e-3)
        w1, w2 = flu_k_window(0.9)
        assert k1 == pytest.approx(w1, abs=1.5e-3)
        assert k2 == pytest.approx(w2, abs=1.5e-3)


class TestDiagram:
    def test_period_doubling_location(self):
        kpd = find_period_doubling(0.9, 2.0, 0.45, 0.52)
        assert kpd == pytest.approx(0.48182, abs=5e-3)

    def test_annual_outbreak_fixed_point_midrange(self):
        ks, recs = flu_bif_diagram(0.9, 2.0, [0.42], transient=3000, record=50)
        S = recs[:, 0]
        assert S.max() - S.min() < 1e-9

    def test_biennial_beyond_doubling(self):
        ks, recs = flu_bif_diagram(0.9, 2.0, [0.52], transient=4000, record=50)
        S = recs[:, 0]
        assert np.max(np.abs(S[1:] - S[:-1])) > 1e-3
        assert np.max(np.abs(S[2:] - S[:-2])) < 1e-8

    def test_small_k_band_and_period_three(self):
        ks, recs = flu_bif_diagram(0.9, 2.0, [0.08, 0.2], transient=4000, record=96)
        s3 = recs[:, 0]
        assert np.max(np.abs(s3[3:] - s3[:-3])) < 1e-7   # period-3 window
        sq = recs[:, 1]
        assert np.max(np.abs(sq[1:] - sq[:-1])) > 1e-4   # invariant-circle band
        for p in range(1, 31):
            assert np.max(np.abs(sq[p:] - sq[:-p])) > 1e-7

    def test_no_bracket(self):
        with pytest.raises(NoBracketError):
            find_period_doubling(0.9, 2.0, 0.30, 0.34)
