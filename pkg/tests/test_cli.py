import json
import math

import numpy as np
import pytest

from bcnf.cli import main
from bcnf.config import parse_config
from bcnf.curves import CurveSample


def run(argv):
    return main(argv)


class TestConfigGrammar:
    def test_parse(self):
        cfg = parse_config("# comment\ntau_l = -1.2\nwindow = -1:3,-2:8  # inline\n\n")
        assert cfg == {"tau_l": "-1.2", "window": "-1:3,-2:8"}

    def test_bad_line(self):
        with pytest.raises(ValueError):
            parse_config("tau_l -1.2")


class TestSweepCommand:
    def test_smoke_run_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = run(["sweep", "--tau-l=-1.2", "--mu=-1", "--window=-1:3,-2:8",
                    "--res=12x12", "--burn-in=20000", "--workers=2",
                    "--out", str(out)])
        assert code == 0
        for ext in (".csv", ".pgm", ".ppm"):
            assert out.with_suffix(ext).exists()
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        assert manifest["subcommand"] == "sweep"
        assert len(manifest["outputs"]) == 3
        assert manifest["seed"] == 0

    def test_missing_window_is_usage_error(self, tmp_path):
        code = run(["sweep", "--tau-l=-1.2", "--mu=-1", "--res=8x8",
                    "--out", str(tmp_path / "x")])
        assert code == 2

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("tau_l = -1.2\nmu = -1\nwindow = -1:3,-2:8\nres = 8x8\n")
        out = tmp_path / "cfgrun"
        code = run(["sweep", "--config", str(cfg), "--res=6x6",
                    "--burn-in=5000", "--out", str(out)])
        assert code == 0
        header = out.with_suffix(".csv").read_bytes().decode().splitlines()[1]
        assert "resolution=6x6" in header

    def test_seed_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BCNF_SEED", "7")
        out = tmp_path / "seeded"
        code = run(["sweep", "--tau-l=-1.2", "--mu=-1", "--window=0:1,0:1",
                    "--res=4x4", "--burn-in=2000", "--out", str(out)])
        assert code == 0
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        assert manifest["seed"] == 7


class TestClassifyCommand:
    def test_prints_class(self, capsys):
        code = run(["classify", "--tau-l=-1.653", "--tau-r=0.848",
                    "--delta-r=0.006", "--mu=1"])
        assert code == 0
        assert "periodic(1)" in capsys.readouterr().out


class TestCurveCommand:
    def test_eta3_matches_formula(self, capsys):
        code = run(["curve", "eta3", "--tau-l=-1.2", "--window=0.5:1.5,-2:8",
                    "--cols=11"])
        assert code == 0
        sample = CurveSample.from_csv(capsys.readouterr().out)
        for tr, dr in sample.points:
            assert dr == pytest.approx(-1.2 * tr + 6.0, abs=1e-12)

    def test_kappa2_line(self, capsys):
        code = run(["curve", "kappa", "--n=2", "--window=-2:0.5,0.3:2",
                    "--cols=20"])
        assert code == 0
        sample = CurveSample.from_csv(capsys.readouterr().out)
        np.testing.assert_allclose(sample.points[:, 0], -1.0, atol=1e-9)

    def test_invalid_name_exit2(self):
        assert run(["curve", "nonsense"]) == 2

    def test_missing_required_flag_exit2(self):
        assert run(["curve", "eta", "--tau-l=1.2"]) == 2

    def test_file_output(self, tmp_path):
        out = tmp_path / "a2.csv"
        code = run(["curve", "alpha2", "--tau-l=-1.2", "--window=0:2,-4:2",
                    "--cols=9", "--out", str(out)])
        assert code == 0
        sample = CurveSample.from_csv(out.read_text())
        for tr, dr in sample.points:
            assert dr == pytest.approx(-1.2 * tr - 1.0, abs=1e-12)


class TestOrbitAndPhase:
    def test_orbit_csv(self, capsys):
        code = run(["orbit", "--tau-l=0.4", "--tau-r=-0.55", "--delta-r=2.1",
                    "--mu=1", "--x0=0", "--y0=0", "--n=2"])
        assert code == 0
        rows = capsys.readouterr().out.strip().splitlines()
        assert rows[0] == "i,x,y"
        assert rows[1] == "0,0,0"
        assert rows[2] == "1,1,0"

    def test_orbit_divergence_note(self, capsys):
        code = run(["orbit", "--tau-l=2", "--tau-r=2", "--delta-r=0", "--mu=-1",
                    "--x0=1.5", "--y0=0", "--n=200"])
        assert code == 0
        assert "diverged" in capsys.readouterr().err

    def test_phase_with_cycles(self, tmp_path):
        out = tmp_path / "phase.csv"
        code = run(["phase", "--tau-l=-0.4", "--tau-r=-0.55", "--delta-r=2.1",
                    "--mu=1", "--n-seeds=8", "--n-samples=512",
                    "--cycles=LLR,LRR", "--out", str(out)])
        assert code == 0
        assert out.exists()
        cyc = (tmp_path / "phase_cycles.csv").read_text().splitlines()
        words = {row.split(",")[0] for row in cyc[1:]}
        assert words == {"LLR", "LRR"}

    def test_mu_homogeneity_of_phase_portraits(self):
        # Attractor samples at mu and mu/2 differ by the exact factor 1/2.
        from bcnf.classify import ClassifierConfig, _sample_attractor
        from bcnf.core import NormalFormParams
        cfg = ClassifierConfig(seed=5, burn_in=20_000, init_box=(0.1, 0.1, 0.0, 0.0))
        a, _ = _sample_attractor(NormalFormParams(-0.4, -0.55, 2.1, 1.0), cfg, 64)
        cfg2 = ClassifierConfig(seed=5, burn_in=20_000, init_box=(0.05, 0.05, 0.0, 0.0))
        b, _ = _sample_attractor(NormalFormParams(-0.4, -0.55, 2.1, 0.5), cfg2, 64)
        np.testing.assert_allclose(b, 0.5 * a, atol=1e-12)


class TestFluCommand:
    def test_diagram_csv(self, capsys):
        code = run(["flu", "--c=0.9", "--r0=2", "--k=0.4:0.45:3",
                    "--transient=500", "--record=5"])
        assert code == 0
        rows = capsys.readouterr().out.strip().splitlines()
        assert rows[0] == "k,S"
        assert len(rows) == 1 + 3 * 5


class TestFrictionCommand:
    def test_linear_mode_values(self, capsys):
        code = run(["friction", "--mode=linear", "--beta=0.25",
                    "--nu-range=1.6:2.6:3"])
        assert code == 0
        rows = capsys.readouterr().out.strip().splitlines()
        assert rows[0] == "nu,alpha1,tau_L,tau_R,delta_R"
        for row in rows[1:]:
            nu, a1, tl, tr, dr = (float(v) for v in row.split(","))
            assert tr == pytest.approx(2 * tl, rel=1e-12)
            assert dr == pytest.approx(math.exp(0.5), abs=1e-12)

    def test_trajectory_csv(self, capsys):
        code = run(["friction", "--mode=trajectory", "--nu=1.75", "--t1=5"])
        assert code == 0
        rows = capsys.readouterr().out.strip().splitlines()
        assert rows[0] == "t,u,v,mode"
        assert len(rows) > 10
