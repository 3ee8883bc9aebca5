import json

import numpy as np
import pytest

from steplab import cli, experiments
from steplab.midpoint import SearchPoint, SearchReport


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_table1_writes_four_rows_and_manifest(tmp_path, capsys):
    out = tmp_path / "results"
    code, stdout, _ = run_cli(capsys, "table1", "--out", str(out),
                              "--tol", "1e-3")
    assert code == 0
    lines = (out / "table1.csv").read_text().strip().split("\n")
    assert len(lines) == 5  # header + one row per grid size
    assert (out / "manifest.json").exists()
    assert stdout.strip().startswith("table1:")


def test_descent_lsd_reaches_tolerance(tmp_path, capsys):
    out = tmp_path / "results"
    code, _, _ = run_cli(capsys, "descent", "--method", "lsd", "--m", "63",
                         "--tol", "1e-6", "--out", str(out))
    assert code == 0
    rows = np.genfromtxt(out / "trace.csv", delimiter=",", names=True)
    b_norm = 63.0  # ||ones(63^2)||
    assert rows["Er"][-1] <= 1e-6 * b_norm


def test_bogus_method_is_a_usage_error(tmp_path, capsys):
    code, _, stderr = run_cli(capsys, "descent", "--method", "bogus",
                              "--out", str(tmp_path))
    assert code == 1
    assert "--method" in stderr


def test_unknown_flag_rejected(tmp_path, capsys):
    code, _, stderr = run_cli(capsys, "table1", "--out", str(tmp_path),
                              "--frobnicate", "3")
    assert code == 1
    assert "--frobnicate" in stderr


def test_constant_method_requires_alpha(tmp_path, capsys):
    code, _, stderr = run_cli(capsys, "descent", "--method", "constant",
                              "--out", str(tmp_path))
    assert code == 1
    assert "--alpha" in stderr


def test_unexpected_divergence_exits_two(tmp_path, capsys):
    code, _, stderr = run_cli(capsys, "descent", "--method", "constant",
                              "--alpha", "1.0", "--m", "15",
                              "--out", str(tmp_path))
    assert code == 2
    assert "descent" in stderr
    # the trace is still written for post-mortem inspection
    assert (tmp_path / "trace.csv").exists()


def test_scientific_notation_flags_parse(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "descent", "--method", "cg", "--m", "15",
                         "--tol", "1E-8", "--out", str(tmp_path))
    assert code == 0


def test_solve_writes_solution(tmp_path, capsys):
    code, stdout, _ = run_cli(capsys, "solve", "--m", "7", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "solution.csv").read_text().strip().split("\n")
    assert lines[0] == "i,x"
    assert len(lines) == 50  # header + 49 unknowns
    assert "f(x*)" in stdout


def test_filter_curves_cli_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(capsys, "filter-curves", "--out", str(a))[0] == 0
    assert run_cli(capsys, "filter-curves", "--out", str(b))[0] == 0
    assert (a / "filter_curves.csv").read_bytes() == (b / "filter_curves.csv").read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma == mb


def test_compare_cli_small_grid(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "compare", "--m", "15", "--out", str(tmp_path))
    assert code == 0
    header = (tmp_path / "compare.csv").read_text().split("\n", 1)[0]
    assert header == "k,Er_sd,Ef_sd,Er_lsd,Ef_lsd,Er_cg,Ef_cg,Er_nes,Ef_nes"


def test_midpoint_search_cli(tmp_path, capsys, monkeypatch):
    # the full search is exercised in test_midpoint; stub it at the CLI seam
    def fake_search(spec):
        pt = SearchPoint(p=1.0, c=3.0, gamma=spec.parameters["gamma"],
                         rho_original=0.5, rho_ghost=2.0,
                         amplifications=(1.0, 2.0, 3.0), flag=True)
        return SearchReport(gamma=spec.parameters["gamma"], omega_ref=16.0,
                            points=[pt])

    monkeypatch.setattr(experiments, "run_midpoint_search", fake_search)
    code, stdout, _ = run_cli(capsys, "midpoint-search", "--gamma", "1.0",
                              "--out", str(tmp_path))
    assert code == 0
    assert "1 witness" in stdout
    lines = (tmp_path / "midpoint_search.csv").read_text().strip().split("\n")
    assert lines[1].endswith(",1")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["experiments"][0]["name"] == "midpoint_search"


def test_missing_subcommand_is_usage_error(capsys):
    code, _, stderr = run_cli(capsys)
    assert code == 1


def test_manifest_spec_replayed_through_cli_reproduces_outputs(tmp_path, capsys):
    first = tmp_path / "first"
    assert run_cli(capsys, "filter-curves", "--t", "2.0", "--beta", "0.25",
                   "--out", str(first))[0] == 0
    recorded = json.loads((first / "manifest.json").read_text())["experiments"][0]
    params = recorded["spec"]["parameters"]
    replay = tmp_path / "replay"
    assert run_cli(capsys, "filter-curves", "--t", str(params["t"]),
                   "--beta", str(params["beta"]), "--out", str(replay))[0] == 0
    assert (replay / "filter_curves.csv").read_bytes() == (first / "filter_curves.csv").read_bytes()
    replayed = json.loads((replay / "manifest.json").read_text())["experiments"][0]
    assert replayed["outputs"] == recorded["outputs"]
