"""CLI contract: exit codes, trace files, config precedence, sweeps."""

from __future__ import annotations

import json
import math

import pytest

from cycproj.cli import main
from cycproj.scenarios import build_scenario
from cycproj.traceio import read_trace_csv, row_to_point


def run_cli(*argv) -> int:
    return main(list(argv))


class TestRun:
    def test_tripod_summary(self, tmp_path, capsys):
        out = tmp_path / "tripod.csv"
        code = run_cli("run", "tripod", "--n", "100", "--start", "endpoint",
                       "--out", str(out))
        assert code == 0
        text = capsys.readouterr().out
        assert "verdict=NotRegular" in text
        assert "final_r=1" in text

    def test_unknown_scenario_is_usage_error(self, capsys):
        assert run_cli("run", "unknown-name") == 2
        assert "unknown scenario" in capsys.readouterr().err

    def test_unknown_start_is_usage_error(self, tmp_path, capsys):
        code = run_cli("run", "tripod", "--start", "nowhere",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 2

    def test_csv_columns_and_roundtrip(self, tmp_path):
        out = tmp_path / "two-sets.csv"
        code = run_cli("run", "plane-two-sets", "--epsilon", "0.5", "--n", "200",
                       "--out", str(out))
        assert code == 0
        columns = read_trace_csv(out)
        assert list(columns) == ["n", "r", "s", "a", "b", "x", "y"]
        assert len(columns["n"]) == 201
        # recompute r from the stored points
        space = build_scenario("plane-two-sets", epsilon=0.5).space
        points = [row_to_point(space, (x, y)) for x, y in zip(columns["x"], columns["y"])]
        for i in range(200):
            r = space.distance(points[i], points[i + 1])
            assert abs(r - columns["r"][i]) <= 1e-9
        # diagnostics NaN padding shows up as empty cells -> None
        assert columns["s"][0] is None
        assert columns["a"][0] is None
        assert columns["r"][200] is None

    def test_json_summary_schema(self, tmp_path):
        out = tmp_path / "run.json"
        code = run_cli("run", "two-lines", "--n", "50", "--format", "json",
                       "--out", str(out))
        assert code == 0
        payload = json.loads(out.read_text())
        for key in ("scenario", "params", "n", "verdict", "final_r",
                    "liminf_r", "slope", "sums"):
            assert key in payload
        assert payload["verdict"] == "Regular"
        assert payload["sums"]["r_sq"] > 0.0
        assert payload["trace"]["r"]

    def test_explicit_start_coords(self, tmp_path, capsys):
        code = run_cli("run", "plane-two-sets", "--n", "5",
                       "--start-coords", "2.0,0.5", "--out", str(tmp_path / "c.csv"))
        assert code == 0
        assert "start=explicit" in capsys.readouterr().out

    def test_numerical_failure_exits_3(self, tmp_path, capsys):
        out = tmp_path / "fail.csv"
        code = run_cli("run", "plane-two-sets", "--n", "5",
                       "--start-coords", "1e300,0", "--out", str(out))
        assert code == 3
        assert "numerical failure" in capsys.readouterr().err
        assert out.exists()  # partial trace still written

    def test_out_dir_env_var(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("CYCPROJ_OUT_DIR", str(tmp_path))
        code = run_cli("run", "two-lines", "--n", "10")
        assert code == 0
        assert (tmp_path / "two-lines-n10.csv").exists()


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_win(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("n=25\nepsilon=1.0\nformat=json\n# comment\n")
        out = tmp_path / "out.json"
        code = run_cli("run", "plane-two-sets", "--config", str(config),
                       "--n", "30", "--out", str(out))
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["n"] == 30  # flag wins over config
        assert payload["params"]["epsilon"] == 1.0  # config fills the gap

    def test_malformed_config(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("this is not a pair\n")
        assert run_cli("run", "tripod", "--config", str(config)) == 2


class TestRate:
    def test_rate_prints_slope(self, tmp_path, capsys):
        out = tmp_path / "rate.csv"
        code = run_cli("rate", "plane-two-sets", "--epsilon", "0.5", "--n", "2000",
                       "--window", "100", "2000", "--out", str(out))
        assert code == 0
        text = capsys.readouterr().out
        assert "rate: slope=" in text
        slope = float(text.split("slope=")[1].split()[0])
        assert -0.75 < slope < -0.45
        assert "sqrt(n)*r" in text

    def test_tripod_rate_is_flat(self, tmp_path, capsys):
        code = run_cli("rate", "tripod", "--n", "100", "--window", "1", "99",
                       "--out", str(tmp_path / "t.csv"))
        assert code == 0
        slope = float(capsys.readouterr().out.split("rate: slope=")[1].split()[0])
        assert abs(slope) <= 1e-9


class TestVerify:
    def test_two_set_suite_passes(self, capsys):
        assert run_cli("verify", "two-set") == 0
        text = capsys.readouterr().out
        assert "checks passed" in text
        assert "FAIL" not in text

    def test_unknown_suite(self, capsys):
        assert run_cli("verify", "bogus") == 2


class TestSweep:
    def test_epsilon_sweep_ordered(self, tmp_path):
        out = tmp_path / "sweep.json"
        code = run_cli("sweep", "plane-two-sets", "--param", "epsilon",
                       "--values", "0.25,0.5,1.0", "--n", "300", "--out", str(out))
        assert code == 0
        results = json.loads(out.read_text())
        assert [r["grid_index"] for r in results] == [0, 1, 2]
        assert [r["params"]["epsilon"] for r in results] == [0.25, 0.5, 1.0]

    def test_jobs_do_not_change_output(self, tmp_path):
        seq = tmp_path / "seq.json"
        par = tmp_path / "par.json"
        base = ["sweep", "two-lines", "--param", "theta",
                "--values", "0.3,0.6,0.9", "--n", "50"]
        assert run_cli(*base, "--out", str(seq)) == 0
        assert run_cli(*base, "--out", str(par), "--jobs", "3") == 0
        assert seq.read_bytes() == par.read_bytes()

    def test_empty_grid(self, tmp_path):
        out = tmp_path / "empty.json"
        code = run_cli("sweep", "plane-two-sets", "--param", "epsilon",
                       "--values", "", "--out", str(out))
        assert code == 0
        assert json.loads(out.read_text()) == []

    def test_chain_sweep_liminf(self, tmp_path):
        out = tmp_path / "chain.json"
        code = run_cli("sweep", "twisted-chain", "--param", "alpha",
                       "--values", "0.5,1.0,2.0", "--n", "200", "--out", str(out))
        assert code == 0
        results = json.loads(out.read_text())
        for entry in results:
            alpha = entry["params"]["alpha"]
            expected = 2.0 * 0.1 * abs(math.sin(alpha / 2.0))
            assert entry["liminf_r"] == pytest.approx(expected, abs=1e-9)
            assert entry["verdict"] == "NotRegular"

    def test_failed_runs_recorded_and_exit_nonzero(self, tmp_path):
        out = tmp_path / "bad.json"
        code = run_cli("sweep", "plane-two-sets", "--param", "epsilon",
                       "--values", "0.5,-1.0", "--n", "20", "--out", str(out))
        assert code == 3
        results = json.loads(out.read_text())
        assert "error" in results[1]
        assert results[0]["verdict"]
