import json
import subprocess
import sys

import pytest

from ruledev import formats
from ruledev.cli import EXIT_VALIDATION, run_cli
from ruledev.pipelines import initial_interpolation


def run(argv):
    return run_cli(argv)


class TestGenStrip:
    def test_writes_rul_document(self, tmp_path):
        out = tmp_path / "strip.rul"
        assert run(["gen-strip", "--kind", "planar", "--count", "5", "--out", str(out)]) == 0
        seq = formats.parse_rulings(out.read_text())
        assert len(seq) == 5

    def test_bad_kind_exits_two(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run(["gen-strip", "--kind", "saddle", "--count", "5",
                 "--out", str(tmp_path / "x.rul")])
        assert err.value.code == 2


class TestFitRelaxed:
    def test_planar_chain_reaches_zero_warp(self, tmp_path):
        strip = tmp_path / "strip.rul"
        out = tmp_path / "out.json"
        run(["gen-strip", "--kind", "planar", "--count", "5", "--out", str(strip)])
        assert run(["fit-relaxed", "--rulings", str(strip), "--metrics", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["beta_max"] < 1e-6

    def test_deterministic_metrics(self, tmp_path):
        strip = tmp_path / "strip.rul"
        run(["gen-strip", "--kind", "perturbed", "--count", "8", "--seed", "1",
             "--perturbation", "0.01", "--out", str(strip)])
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        assert run(["fit-relaxed", "--rulings", str(strip), "--metrics", str(out1)]) == 0
        assert run(["fit-relaxed", "--rulings", str(strip), "--metrics", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_all_exports_written(self, tmp_path):
        strip = tmp_path / "strip.rul"
        run(["gen-strip", "--kind", "cylinder", "--count", "6", "--out", str(strip)])
        metrics = tmp_path / "m.json"
        mesh = tmp_path / "m.ply"
        net = tmp_path / "net.json"
        assert run(["fit-relaxed", "--rulings", str(strip), "--metrics", str(metrics),
                    "--mesh", str(mesh), "--control-net", str(net),
                    "--mesh-grid", "20x4"]) == 0
        assert mesh.read_text().startswith("ply")
        formats.parse_control_net(net.read_text())

    def test_missing_rulings_file(self, tmp_path):
        assert run(["fit-relaxed", "--rulings", str(tmp_path / "nope.rul")]) == EXIT_VALIDATION


class TestFitFixed:
    def test_missing_curve_flag_exits_two(self, tmp_path):
        strip = tmp_path / "strip.rul"
        run(["gen-strip", "--kind", "planar", "--count", "5", "--out", str(strip)])
        with pytest.raises(SystemExit) as err:
            run(["fit-fixed", "--rulings", str(strip)])
        assert err.value.code == 2

    def test_fixed_run(self, tmp_path):
        strip = tmp_path / "strip.rul"
        run(["gen-strip", "--kind", "planar", "--count", "6", "--out", str(strip)])
        seq = formats.parse_rulings(strip.read_text())
        c0, _, _ = initial_interpolation(seq)
        curve_doc = tmp_path / "c0.json"
        curve_doc.write_text(formats.write_curve(c0))
        out = tmp_path / "m.json"
        assert run(["fit-fixed", "--rulings", str(strip), "--curve", str(curve_doc),
                    "--metrics", str(out)]) == 0
        assert json.loads(out.read_text())["mode"] == "fixed-boundary"


class TestMetricsCommand:
    def test_evaluates_existing_surface(self, tmp_path):
        strip = tmp_path / "strip.rul"
        run(["gen-strip", "--kind", "cylinder", "--count", "6", "--out", str(strip)])
        net = tmp_path / "net.json"
        run(["fit-relaxed", "--rulings", str(strip), "--control-net", str(net)])
        out = tmp_path / "eval.json"
        assert run(["metrics", "--rulings", str(strip), "--control-net", str(net),
                    "--metrics", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["mode"] == "evaluate"
        assert doc["beta_max"] < 0.5


class TestUsage:
    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as err:
            run(["fit-relaxed", "--nonsense"])
        assert err.value.code == 2

    def test_config_file_supplies_defaults(self, tmp_path):
        strip = tmp_path / "strip.rul"
        run(["gen-strip", "--kind", "planar", "--count", "5", "--out", str(strip)])
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"samples": 40}))
        out = tmp_path / "m.json"
        assert run(["--config", str(config), "fit-relaxed", "--rulings", str(strip),
                    "--metrics", str(out)]) == 0

    def test_entry_point_subprocess(self, tmp_path):
        out = tmp_path / "strip.rul"
        proc = subprocess.run(
            [sys.executable, "-m", "ruledev.cli", "gen-strip", "--kind", "cone",
             "--count", "4", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert out.exists()
