"""
Command-line tests: exit codes and emitted files
"""

import csv
import json
import os

from cli import main
from config import Config
from services.report_service import ReportService


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def test_check_geometry_all_pairs(tmp_path):
    assert main(["check-geometry", "--all", "--samples", "200", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "check_geometry.json") as handle:
        report = json.load(handle)
    assert report["passed"] is True
    assert len(report["reports"]) == 6


def test_bad_pair_is_configuration_error(tmp_path):
    assert main(["run", "--pair", "hyperbolic", "--out", str(tmp_path)]) == 1


def test_unknown_flag_exits_1_not_2(tmp_path):
    """Test argparse usage errors share the configuration exit code"""
    assert main(["run", "--no-such-flag", "--out", str(tmp_path)]) == 1


def test_malformed_command_lines_exit_1(capsys):
    assert main([]) == 1
    assert main(["train"]) == 1
    assert main(["run", "--T", "many"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_unknown_config_key_is_configuration_error(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("colour = blue\n")
    assert main(["run", "--config", str(path), "--out", str(tmp_path)]) == 1


def test_run_writes_trace_and_summary(tmp_path):
    code = main(["run", "--pair", "eg", "--learner", "ogd", "--T", "30", "--eta", "0.1", "--out", str(tmp_path)])
    assert code == 0
    rows = read_rows(tmp_path / "trace_eg_ogd_seed0.csv")
    assert rows[0] == ["t", "loss", "grad_norm", "perturb_norm", "x_0", "x_1", "u_0", "u_1"]
    assert len(rows) == 31
    with open(tmp_path / "trace_eg_ogd_seed0.json") as handle:
        summary = json.load(handle)
    assert summary["regret"]["certified"] is True


def test_replayed_run_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        args = ["run", "--pair", "tempered", "--T", "40", "--eta", "0.05", "--seed", "3", "--out", str(tmp_path / name)]
        assert main(args) == 0
    first = (tmp_path / "a" / "trace_tempered_omd_seed3.csv").read_bytes()
    second = (tmp_path / "b" / "trace_tempered_omd_seed3.csv").read_bytes()
    assert first == second


def test_aborted_run_keeps_partial_trace(tmp_path):
    """Test a numerical abort exits 2 and leaves the rounds played so far"""
    code = main([
        "run", "--pair", "logbarrier", "--eps-min", "0.01", "--loss", "quadratic",
        "--T", "10", "--eta", "5000", "--out", str(tmp_path),
    ])
    assert code == 2
    rows = read_rows(tmp_path / "trace_logbarrier_omd_seed0_partial.csv")
    assert len(rows) == 2
    assert rows[1][0] == "1"
    assert not os.path.exists(tmp_path / "trace_logbarrier_omd_seed0.csv")


def test_closeness_acceptance(tmp_path):
    assert main(["closeness", "--pair", "eg", "--trials", "10", "--out", str(tmp_path)]) == 0
    assert os.path.exists(tmp_path / "closeness_eg.csv")
    assert os.path.exists(tmp_path / "closeness_eg.svg")


def test_failed_acceptance_exits_3(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, "CLOSENESS_SLOPE_MIN", 5.0)
    assert main(["closeness", "--pair", "eg", "--trials", "5", "--out", str(tmp_path)]) == 3


def test_flow_check(tmp_path):
    assert main(["flow-check", "--pair", "eg", "--out", str(tmp_path)]) == 0
    assert len(read_rows(tmp_path / "flow_eg.csv")) == 4


def test_figure_eg(tmp_path):
    assert main(["figure-eg", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "figure_eg_ogd.csv")
    assert len(rows) == 202
    assert os.path.exists(tmp_path / "figure_eg_ogd.svg")


def test_reconstruct_single_map(tmp_path):
    code = main([
        "reconstruct", "--map", "exponential", "--lower", "-2", "--upper", "0",
        "--known", "log-barrier", "--out", str(tmp_path),
    ])
    assert code == 0
    rows = read_rows(tmp_path / "reconstruct_exponential.csv")
    assert rows[0] == ["u", "link", "slope", "ode_residual"]


def test_reconstruct_builtin_suite(tmp_path):
    assert main(["reconstruct", "--out", str(tmp_path)]) == 0
    for name in ("quarter-square", "exponential", "identity", "power"):
        assert os.path.exists(tmp_path / f"reconstruct_{name}.json")


def test_reconstruct_map_needs_interval(tmp_path):
    assert main(["reconstruct", "--map", "exponential", "--out", str(tmp_path)]) == 1


def test_constants(tmp_path):
    assert main(["constants", "--pair", "euclid", "--T", "20", "--samples", "200", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "constants_euclid.json") as handle:
        assert json.load(handle)["samples"] == 200


def test_plot_csv(tmp_path, capsys):
    path = ReportService.write_csv(str(tmp_path / "table.csv"), ["T", "regret"], [[10, 1.0], [100, 3.0], [1000, 9.0]])
    assert main(["plot", "--csv", path, "--log"]) == 0
    svg = capsys.readouterr().out.strip().splitlines()[-1]
    assert svg == str(tmp_path / "table.svg")
    assert os.path.exists(svg)
