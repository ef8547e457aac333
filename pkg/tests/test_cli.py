"""Tests for the command-line front end and artifact writers."""

import json
import math

import pytest

from fxtqp.cli import main
from fxtqp.outputs import TRAJECTORY_COLUMNS


def test_bounds_non_positive(capsys):
    code = main(["bounds", "--c1", "1", "--c2", "1", "--c3", "0", "--mu", "2"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["regime"] == "non_positive"
    assert doc["domain_level"] == 0.0
    assert math.isclose(doc["time_bound"], math.pi)
    assert doc["time_bound_valid"]


def test_bounds_with_oracle(capsys):
    code = main(
        ["bounds", "--c1", "1", "--c2", "1", "--c3", "1", "--mu", "2",
         "--v0", "10", "--variant", "theorem_k2", "--dt", "1e-3"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["regime"] == "subcritical"
    assert math.isclose(doc["domain_level"], 0.5)
    assert doc["oracle_time"] <= doc["time_bound"]


def test_bounds_supercritical_flag(capsys):
    code = main(["bounds", "--c1", "1", "--c2", "1", "--c3", "2.5", "--mu", "2"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["regime"] == "supercritical"
    assert not doc["time_bound_valid"]
    assert doc["time_bound"] == "inf"


def test_bounds_validation_error(capsys):
    code = main(["bounds", "--c1", "-1", "--c2", "1", "--c3", "0", "--mu", "2"])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParameterError"


def test_run_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"gains": {"kxv": 1.0}}')
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError"


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--seed", "7", "--out", str(out)])
    assert code == 0
    for name in (
        "manifest.json", "trajectory.csv", "summary.json",
        "paths.svg", "inputs.svg", "certificates.svg",
    ):
        assert (out / name).is_file()

    manifest = json.loads((out / "manifest.json").read_text())
    summary = json.loads((out / "summary.json").read_text())
    assert summary["manifest_sha256"] == manifest["manifest_sha256"]
    assert summary["status"] == "completed"
    assert summary["min_h_lane"] >= 0.0
    assert summary["min_h_lead"] >= 0.0
    phases = summary["phases"]
    assert set(phases) == {"merge_out", "pass", "merge_back"}
    total = sum(p["T_actual"] for p in phases.values())
    assert total <= 27.65 + 0.01
    for p in phases.values():
        assert p["T_actual"] <= p["T_budget"] + 0.01

    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == f"# manifest_sha256={manifest['manifest_sha256']}"
    assert lines[1] == ",".join(TRAJECTORY_COLUMNS)
    assert len(lines) > 1000

    stdout = json.loads(capsys.readouterr().out)
    assert stdout["status"] == "completed"


def test_run_byte_identical_with_same_seed(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["run", "--seed", "7", "--out", str(out_a)]) == 0
    assert main(["run", "--seed", "7", "--out", str(out_b)]) == 0
    assert (out_a / "trajectory.csv").read_bytes() == (out_b / "trajectory.csv").read_bytes()
    ma = json.loads((out_a / "manifest.json").read_text())["manifest_sha256"]
    mb = json.loads((out_b / "manifest.json").read_text())["manifest_sha256"]
    assert ma == mb


def test_montecarlo_small(tmp_path, capsys):
    out = tmp_path / "mc"
    code = main(["montecarlo", "--levels", "2", "--trials", "1",
                 "--seed", "11", "--out", str(out)])
    captured = capsys.readouterr()
    summary = json.loads(captured.out.strip().splitlines()[-1])
    assert summary["trials"] == 2
    assert summary["safe"] == 2
    assert code in (0, 2)  # safe regardless; strict budget clause may miss
    lines = (out / "montecarlo.csv").read_text().splitlines()
    assert lines[1].startswith("level,phi_inf,trial,seed,status")
    assert len(lines) == 4
