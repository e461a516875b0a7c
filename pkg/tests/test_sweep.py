import numpy as np
import pytest

from bcnf.classify import ClassifierConfig
from bcnf.curves import CurveSample
from bcnf.sweep import (
    ClassificationRaster,
    SweepConfig,
    encode_raster,
    overlay_curves,
    raster_from_csv,
    run_sweep,
)

FAST = ClassifierConfig(burn_in=20_000, lyap_len=4000)


def small_cfg(**kw):
    defaults = dict(tau_L=-1.2, mu=-1.0, window=(0.8, 1.8, 0.0, 4.0),
                    resolution=(12, 12), classifier=FAST)
    defaults.update(kw)
    return SweepConfig(**defaults)


class TestRunSweep:
    def test_triangle_interior_all_fixed_point(self):
        # Window strictly inside |tau_R| - 1 < delta_R < 1 (edges are marginal).
        cfg = SweepConfig(0.3, 1.0, (-0.35, 0.35, -0.55, 0.55), (10, 10), FAST)
        r = run_sweep(cfg)
        assert np.all(r.codes == 1)
        assert np.all(r.periods == 1)

    def test_deterministic_across_runs(self):
        cfg = small_cfg()
        a = run_sweep(cfg)
        b = run_sweep(cfg)
        assert a.codes.tobytes() == b.codes.tobytes()
        assert a.periods.tobytes() == b.periods.tobytes()
        assert a.lyapunov.tobytes() == b.lyapunov.tobytes()

    def test_parallel_equivalence(self):
        cfg = small_cfg(resolution=(16, 16))
        serial = run_sweep(cfg, workers=1)
        threaded = run_sweep(cfg, workers=4)
        assert serial.codes.tobytes() == threaded.codes.tobytes()
        assert serial.periods.tobytes() == threaded.periods.tobytes()
        assert serial.lyapunov.tobytes() == threaded.lyapunov.tobytes()

    def test_diverging_region_present_above_homoclinic_family(self):
        # tau_L = 1.2, mu = 1: top-right of the window has no attractor.
        cfg = SweepConfig(1.2, 1.0, (1.0, 1.6, 2.6, 3.4), (8, 8), FAST)
        r = run_sweep(cfg)
        assert r.class_fraction(0) > 0.4

    def test_axes_inclusive(self):
        cfg = small_cfg()
        trs, drs = cfg.axes()
        assert trs[0] == 0.8 and trs[-1] == pytest.approx(1.8)
        assert drs[0] == 0.0 and drs[-1] == pytest.approx(4.0)


class TestEncoding:
    def fixture_raster(self):
        cfg = SweepConfig(-1.2, -1.0, (0.0, 1.0, 0.0, 1.0), (2, 2), FAST)
        codes = np.array([[1, 2], [0, 3]], dtype=np.int8)
        periods = np.array([[3, 0], [0, 0]], dtype=np.int16)
        return ClassificationRaster(cfg, codes, periods, np.zeros((2, 2)))

    def test_csv_fixture_byte_exact(self):
        data = encode_raster(self.fixture_raster(), "csv").decode()
        lines = data.strip().splitlines()
        assert lines[2] == "ix,iy,tau_R,delta_R,class_code,period"
        assert lines[3] == "0,0,0,0,1,3"
        assert lines[4] == "1,0,1,0,2,0"
        assert lines[5] == "0,1,0,1,0,0"
        assert lines[6] == "1,1,1,1,3,0"

    def test_pgm_header_and_levels(self):
        data = encode_raster(self.fixture_raster(), "pgm")
        assert data.startswith(b"P5\n2 2\n255\n")
        pixels = np.frombuffer(data[len(b"P5\n2 2\n255\n"):], dtype=np.uint8)
        # top row is the larger delta_R row: [diverging, quasi] = [255, 192]
        assert pixels.tolist() == [255, 192, 12, 128]

    def test_ppm_header_and_palette(self):
        data = encode_raster(self.fixture_raster(), "ppm")
        assert data.startswith(b"P6\n2 2\n255\n")
        body = np.frombuffer(data[len(b"P6\n2 2\n255\n"):], dtype=np.uint8).reshape(2, 2, 3)
        assert body[0, 0].tolist() == [255, 255, 255]   # diverging white
        assert body[0, 1].tolist() == [255, 255, 0]     # quasi yellow
        assert body[1, 1].tolist() == [255, 140, 0]     # chaotic orange

    def test_csv_round_trip_identity(self):
        r = self.fixture_raster()
        data = encode_raster(r, "csv")
        back = raster_from_csv(data)
        assert encode_raster(back, "csv") == data

    def test_unsupported_format(self):
        with pytest.raises(ValueError):
            encode_raster(self.fixture_raster(), "png")


class TestOverlay:
    def test_diagonal_clip(self):
        cfg = SweepConfig(-1.2, -1.0, (0.0, 1.0, 0.0, 1.0), (11, 11), FAST)
        r = ClassificationRaster(cfg, np.zeros((11, 11), np.int8),
                                 np.zeros((11, 11), np.int16), np.zeros((11, 11)))
        line = CurveSample("diag", -1.2, -1.0,
                           np.array([[-0.5, -0.5], [1.5, 1.5]]),
                           [np.array([[-0.5, -0.5], [1.5, 1.5]])])
        layers = overlay_curves(r, [line])
        assert len(layers) == 1
        _, pts = layers[0]
        np.testing.assert_allclose(pts[0], [0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(pts[-1], [10.0, 10.0], atol=1e-12)

    def test_outside_segment_dropped(self):
        cfg = SweepConfig(-1.2, -1.0, (0.0, 1.0, 0.0, 1.0), (4, 4), FAST)
        r = ClassificationRaster(cfg, np.zeros((4, 4), np.int8),
                                 np.zeros((4, 4), np.int16), np.zeros((4, 4)))
        line = CurveSample("far", -1.2, -1.0,
                           np.array([[5.0, 5.0], [6.0, 9.0]]),
                           [np.array([[5.0, 5.0], [6.0, 9.0]])])
        assert overlay_curves(r, [line]) == []


@pytest.mark.slow
def test_refinement_stability_fig4_window():
    # Cells whose four coarse corners agree keep their class at double
    # resolution for the vast majority of such cells.  The failures are
    # the coexistence speckle (chaotic/diverging flips left of alpha_3 and
    # chaotic/periodic flips in the two-attractor zone), whose area fraction
    # on this window caps the agreement near 94% at any resolution.
    window = (-1.0, 3.0, -2.0, 8.0)
    coarse = run_sweep(SweepConfig(-1.2, -1.0, window, (61, 61)), workers=4)
    fine = run_sweep(SweepConfig(-1.2, -1.0, window, (121, 121)), workers=4)
    agree = total = 0
    for iy in range(60):
        for ix in range(60):
            corners = coarse.codes[iy:iy + 2, ix:ix + 2]
            if np.all(corners == corners[0, 0]):
                total += 1
                if fine.codes[2 * iy + 1, 2 * ix + 1] == corners[0, 0]:
                    agree += 1
    assert total > 1000
    assert agree / total >= 0.93
