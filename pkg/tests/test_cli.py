"""CLI: exit codes, report determinism, CSV round-trips, plot script."""

import json
import math

import numpy as np
import pytest

from heisconvex.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VIOLATIONS, main


def run(tmp_path, command, config=None, extra=(), name="cfg.json"):
    argv = [command]
    if config is not None:
        cfg = tmp_path / name
        cfg.write_text(json.dumps(config))
        argv += ["--config", str(cfg)]
    out = tmp_path / f"report-{command}.json"
    argv += ["--out", str(out), *extra]
    code = main(argv)
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


class TestExitCodes:
    def test_section_h_ok(self, tmp_path):
        code, report = run(
            tmp_path, "section-h",
            {"function": {"builtin": "sqnorm", "n": 1}, "height": 1.0, "seed": 3},
        )
        assert code == EXIT_OK
        assert report["stages"][0]["status"] == "pass"
        assert report["config"]["seed"] == 3

    def test_convexity_violations_exit_one(self, tmp_path):
        csv_path = tmp_path / "viol.csv"
        code, report = run(
            tmp_path, "convexity", {"function": {"expr": "-(x1^2)", "n": 1}, "seed": 1},
            extra=["--csv", str(csv_path)],
        )
        assert code == EXIT_VIOLATIONS
        assert report["stages"][0]["status"] == "fail"
        assert len(csv_path.read_text().splitlines()) > 1

    def test_unknown_subcommand_exit_two(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_malformed_json_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{ not json")
        assert main(["section-h", "--config", str(bad)]) == EXIT_USAGE
        assert "malformed JSON" in capsys.readouterr().err

    def test_bad_function_exit_two(self, tmp_path, capsys):
        code, _ = run(tmp_path, "convexity", {"function": {"builtin": "nope"}})
        assert code == EXIT_USAGE

    def test_numerical_failure_exit_three(self, tmp_path, capsys):
        code, _ = run(
            tmp_path, "engulfing",
            {"function": {"expr": "-(x1^2)", "n": 1}, "n_pairs": 200, "seed": 0},
        )
        assert code == EXIT_NUMERICAL


class TestDeterminism:
    def test_reports_byte_identical(self, tmp_path):
        cfg = {"function": {"builtin": "sqnorm", "n": 1}, "r": [0.5, 1.0], "seed": 11}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["m-M", "--config", str(cfg_path), "--out", str(out1)]) == EXIT_OK
        assert main(["m-M", "--config", str(cfg_path), "--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_seed_echoed_and_mandatory_default(self, tmp_path):
        code, report = run(tmp_path, "m-M", {"function": {"builtin": "sqnorm"}})
        assert code == EXIT_OK
        assert report["config"]["seed"] == 0

    def test_provenance_fields(self, tmp_path):
        code, report = run(
            tmp_path, "m-M", {"function": {"builtin": "sqnorm"}, "r": [1.0]}
        )
        for stage in report["stages"]:
            for name, entry in stage["constants"].items():
                assert entry["provenance"] in ("exact", "est", "bracket"), name

    def test_bracket_provenance_in_quasimetric(self, tmp_path):
        cfg = {
            "function": {"builtin": "sqnorm", "n": 1},
            "points": [[0, 0, 0], [1, 0, 0]],
            "n_triples": 2,
            "seed": 2,
        }
        code, report = run(tmp_path, "quasimetric", cfg, extra=["--budget", "quick"])
        assert code == EXIT_OK
        entry = report["stages"][0]["constants"]["d_0_1"]
        assert entry["provenance"] == "bracket"
        assert entry["s_lo"] <= entry["value"] == entry["s_hi"]


class TestCsv:
    def test_roundtrip_17_digits(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"function": {"builtin": "sqnorm"}, "height": 2.0}))
        csv_path = tmp_path / "b.csv"
        assert main([
            "section-h", "--config", str(cfg), "--csv", str(csv_path),
            "--out", str(tmp_path / "r.json"),
        ]) == EXIT_OK
        lines = csv_path.read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header == ["dir_1", "dir_2", "radius"]
        values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        # every radius is sqrt(2); the text round-trips losslessly
        np.testing.assert_allclose(values[:, 2], math.sqrt(2.0), atol=1e-9)
        rewritten = [f"{v:.17g}" for v in values[:, 2]]
        assert [float(s) for s in rewritten] == values[:, 2].tolist()

    def test_quasimetric_matrix(self, tmp_path):
        cfg = {
            "function": {"builtin": "sqnorm", "n": 1},
            "points": [[0, 0, 0], [3, 0, 0]],
            "n_triples": 2,
            "seed": 5,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        csv_path = tmp_path / "d.csv"
        code = main([
            "quasimetric", "--config", str(cfg_path), "--csv", str(csv_path),
            "--out", str(tmp_path / "q.json"), "--budget", "quick",
        ])
        assert code == EXIT_OK
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "row,col,value,s_lo,s_hi"
        row = [float(v) for v in lines[1].split(",")]
        assert row[2] == pytest.approx(1.0, rel=5e-3)
        assert row[3] <= row[2] <= row[4]


class TestDecompose:
    def test_decompose_reports_constant(self, tmp_path):
        code, report = run(
            tmp_path, "decompose",
            {"points": [[0.0, 0.0, 1.7320508]], "strategy": "minmax", "decomposition_samples": 50},
        )
        assert code == EXIT_OK
        consts = report["stages"][0]["constants"]
        assert 0 < consts["decomposition_constant_est"]["value"] < 2


class TestExampleVerify:
    def test_small_grid_quick_budget(self, tmp_path):
        cfg = {"grid": {"n_rho": 7, "n_t": 7}, "seed": 0}
        code, report = run(tmp_path, "example-verify", cfg, extra=["--budget", "quick"])
        assert code == EXIT_OK
        consts = report["stages"][0]["constants"]
        assert consts["agreement_rate"]["value"] >= 0.99
        assert consts["false_in"]["value"] == 0


class TestPlotScript:
    def test_profile_emits_script(self, tmp_path):
        cfg = {
            "function": {"builtin": "sqnorm", "n": 1},
            "height": 1.0,
            "grid": {"n_rho": 4, "rho_max": 3.0},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        csv_path = tmp_path / "p.csv"
        script = tmp_path / "plot.txt"
        code = main([
            "section-hn", "--config", str(cfg_path), "--csv", str(csv_path),
            "--plot-script", str(script), "--out", str(tmp_path / "r.json"),
            "--budget", "quick",
        ])
        assert code == EXIT_OK
        text = script.read_text()
        assert str(csv_path) in text and "plot" in text
        assert csv_path.read_text().startswith("rho,t_sup")


class TestJobsPlumbing:
    def test_env_var_overrides_flag(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HEIS_JOBS", "1")
        code, report = run(
            tmp_path, "m-M", {"function": {"builtin": "sqnorm"}, "r": [1.0]},
            extra=["--jobs", "4"],
        )
        assert code == EXIT_OK
