import numpy as np
import pytest

from bcnf.classify import (
    Attractor,
    AttractorClass,
    ClassifierConfig,
    basin_raster,
    classify,
    count_components,
    detect_period,
    find_attractors,
    lyapunov_max,
)
from bcnf.core import NormalFormParams, SkewTentParams, orbit, skew_tent_orbit, solve_cycle
from bcnf.errors import DivergedOrbitError


def params(tl, tr, dr, mu):
    return NormalFormParams(tl, tr, dr, mu)


CFG = ClassifierConfig()


class TestClassify:
    def test_deterministic(self):
        p = params(-1.2, 1.0, 3.0, -1.0)
        a = classify(p, CFG)
        b = classify(p, CFG)
        assert a == b

    def test_coexistence_point_both_classes_over_seeds(self):
        # Chaotic and period-3 attractors coexist; random seeds find both.
        p = params(-1.2, 1.0, 3.0, -1.0)
        kinds = set()
        for s in range(20):
            c = classify(p, ClassifierConfig(seed=s))
            kinds.add(str(c))
        assert kinds <= {"periodic(3)", "chaotic"}
        assert len(kinds) == 2

    def test_chaotic_point(self):
        c = classify(params(-1.2, 1.6, 0.5, -1.0), CFG)
        assert c.kind == "chaotic"

    def test_stable_two_cycle(self):
        # tau_L = 0 line with |tau_L*tau_R - delta_R| < 1: attracting LR-cycle.
        c = classify(params(0.0, -1.8, 0.648, 1.0), CFG)
        assert c == AttractorClass("periodic", period=2)

    def test_stable_fixed_point_region(self):
        c = classify(params(-1.653, 0.848, 0.006, 1.0), CFG)
        assert c == AttractorClass("periodic", period=1)

    def test_diverging(self):
        c = classify(params(2.0, 2.0, 0.0, -1.0), CFG)
        assert c.kind == "diverging"

    def test_classify_near_stable_cycle_returns_its_period(self):
        p = params(-0.4, -0.55, 2.1, 1.0)
        sol = solve_cycle("LLR", p)
        assert sol.stable
        x, y = sol.points[0]
        box = (x - 1e-4, x + 1e-4, y - 1e-4, y + 1e-4)
        c = classify(p, ClassifierConfig(init_box=box, seed=3))
        assert c.kind == "periodic"
        assert c.period in (1, 3)
        assert c.period % 3 == 0 or 3 % c.period == 0


class TestDetectPeriod:
    def test_constant_tail(self):
        tail = np.tile([0.3, -0.2], (31, 1))
        assert detect_period(tail, 1e-10) == 1

    def test_cycle_tail(self):
        p = params(-0.4, -0.55, 2.1, 1.0)
        sol = solve_cycle("LLR", p)
        tail = np.array([sol.points[i % 3] for i in range(31)])
        assert detect_period(tail, 1e-10) == 3

    def test_quasiperiodic_tail_has_no_short_period(self):
        p = params(-1.2, -1.5, 1.15, 1.0)
        orb = orbit((0.1, 0.0), p, 100_031)
        tail = orb.points[100_000:]
        assert detect_period(tail, 1e-10) is None

    def test_reduce_to_divisor(self):
        pts = np.tile([[1.0, 0.0], [-1.0, 0.0]], (16, 1))[:31]
        # Raw rule already finds 2; a doctored tolerance cannot shrink below it.
        assert detect_period(pts, 1e-10) == 2
        assert detect_period(pts, 1e-10, reduce=True) == 2


class TestLyapunov:
    def test_negative_at_stable_fixed_point(self):
        p = params(-1.653, 0.848, 0.006, 1.0)
        assert lyapunov_max(p, (0.8, -0.001), 5000) < 0.0

    def test_positive_in_chaotic_region(self):
        p = params(-1.2, 1.2, 5.5, -1.0)
        assert lyapunov_max(p, (0.05, 0.0), 20_000) > 0.001

    def test_matches_skew_tent_oracle_at_zero_determinant(self):
        p = params(1.2, -1.8, 0.0, 1.0)
        n = 10_000
        val = lyapunov_max(p, (0.3, 0.0), n)
        xs = skew_tent_orbit(0.3, SkewTentParams(1.2, -1.8, 1.0), n)
        oracle = np.mean(np.where(xs[:n] <= 0.0, np.log(1.2), np.log(1.8)))
        assert val == pytest.approx(oracle, abs=2e-3)

    def test_cycle_exponent_equals_log_spectral_radius(self):
        p = params(-0.4, -0.55, 2.1, 1.0)
        sol = solve_cycle("LRR", p)  # saddle: positive exponent on the cycle
        rho = max(abs(m) for m in sol.multipliers)
        # The tangent aligns with the rank-1 eigendirection after one loop;
        # the O(1/n) start-up bias needs a long run to drop below 1e-6.
        n = 3 * 500_000
        val = lyapunov_max(p, tuple(sol.points[0]), n)
        assert val == pytest.approx(np.log(rho) / 3.0, abs=1e-6)

    def test_diverged_orbit_raises(self):
        with pytest.raises(DivergedOrbitError):
            lyapunov_max(params(2.0, 2.0, 0.0, -1.0), (1.5, 0.0), 1000)


class TestComponents:
    def test_one_component(self):
        c = count_components(params(-1.2, 1.5, 3.0, -1.0))
        assert c.count == 1

    def test_two_components(self):
        c = count_components(params(-1.2, 1.6, 0.5, -1.0))
        assert c.count == 2

    def test_four_components(self):
        c = count_components(params(1.2, -1.15, -0.3, 1.0))
        assert c.count == 4

    def test_invariant_under_doubling_samples(self):
        p = params(-1.2, 1.6, 0.5, -1.0)
        a = count_components(p, n_samples=1 << 16)
        b = count_components(p, n_samples=1 << 17)
        assert a.count == b.count


class TestBasins:
    def test_two_attractor_basin(self):
        p = params(-0.4, -0.55, 2.1, 1.0)
        atts = find_attractors(p, ClassifierConfig(), n_seeds=24)
        kinds = {a.kind for a in atts}
        assert "periodic" in kinds and "chaotic" in kinds
        labels, _ = basin_raster(p, (-3.0, 2.0, -4.0, 1.0), (24, 24),
                                 ClassifierConfig(), attractors=atts, burn_in=20_000)
        present = set(labels.ravel().tolist())
        assert len(present & set(range(len(atts)))) >= 2

    def test_single_attractor_uniform(self):
        p = params(-1.653, 0.848, 0.006, 1.0)
        atts = find_attractors(p, ClassifierConfig(), n_seeds=6)
        assert len(atts) == 1
        labels, _ = basin_raster(p, (-0.5, 1.5, -0.5, 0.5), (8, 8),
                                 ClassifierConfig(), attractors=atts, burn_in=20_000)
        assert set(labels.ravel().tolist()) == {0}
