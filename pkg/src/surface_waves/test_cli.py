"""
End-to-end tests of the command-line front end and its exit codes
"""

import json

import pytest

from . import cli
from .export import read_csv
from .validation import INVARIANT, CheckResult

HOMOGENEOUS = ["--set", "layer_a.eps_rel=5", "--set", "layer_b.eps_rel=5"]


def _run(tmp_path, *argv):
    out = tmp_path / "out.csv"
    code = cli.main([*argv, "--out", str(out), "--no-timestamp", "--log-level", "WARNING"])
    text = out.read_text(encoding="utf-8") if out.exists() else ""
    return code, text


def test_permittivity_command(tmp_path):
    code, text = _run(tmp_path, "permittivity", "--omega-range", "0", "2", "5")
    assert code == cli.EXIT_OK
    manifest, columns, rows = read_csv(text)
    assert manifest["command"] == "permittivity"
    assert columns == ["omega_hat", "re_eps", "im_eps"]
    # Omega = 1 is the lossless resonance and is skipped
    assert [row[0] for row in rows] == [0.0, 0.5, 1.5, 2.0]
    assert rows[0][1] == pytest.approx(5.5369)
    assert rows[-1][1] == pytest.approx(-0.5123)


def test_scan_command_writes_branches(tmp_path):
    code, text = _run(
        tmp_path, "scan", *HOMOGENEOUS, "--k-range", "2", "6", "30", "--omega-range", "1.05", "1.15", "5"
    )
    assert code == cli.EXIT_OK
    _, columns, rows = read_csv(text)
    assert columns == ["branch_id", "k_hat", "omega_hat"]
    # column roots plus the row crossings between them, all on one branch
    assert len(rows) > 5
    assert {row[0] for row in rows} == {0.0}


def test_scan_both_polarizations_writes_two_files(tmp_path):
    out = tmp_path / "scan.csv"
    code = cli.main([
        "scan", *HOMOGENEOUS, "--polarizations", "TE,TM",
        "--k-range", "2", "6", "10", "--omega-range", "1.05", "1.15", "3",
        "--out", str(out), "--no-timestamp",
    ])
    assert code == cli.EXIT_OK
    assert (tmp_path / "scan_TE.csv").exists()
    assert (tmp_path / "scan_TM.csv").exists()


def test_scan_with_loss_is_mode_misuse(tmp_path):
    code, _ = _run(tmp_path, "scan", "--set", "lorentz.loss_ratio=0.1")
    assert code == cli.EXIT_MODE


def test_bad_grid_is_config_error(tmp_path):
    code, _ = _run(tmp_path, "scan", "--k-range", "3", "1", "10")
    assert code == cli.EXIT_CONFIG


def test_invalid_config_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"h": 2.0}', encoding="utf-8")
    code, _ = _run(tmp_path, "permittivity", "--config", str(bad))
    assert code == cli.EXIT_CONFIG


def test_trace_from_a_bad_seed_fails(tmp_path):
    code, text = _run(
        tmp_path, "trace", "--set", "lorentz.plasma_ratio=0",
        "--seed-k", "1", "--seed-omega", "1", "--log-gamma", "-3", "-1", "3",
    )
    assert code == cli.EXIT_CONTINUATION
    _, columns, rows = read_csv(text)
    assert columns == ["log10_gamma", "omega_hat", "k_hat", "residual_norm"]
    assert rows == []


def test_trace_follows_a_lossy_root(tmp_path):
    seed = ["--seed-k", "2.7528", "--seed-omega", "1.0437"]
    code, text = _run(tmp_path, "trace", *seed, "--log-gamma", "-1", "-1.5", "3")
    assert code == cli.EXIT_OK
    _, _, rows = read_csv(text)
    assert [row[0] for row in rows] == pytest.approx([-1.0, -1.25, -1.5])
    assert all(row[3] < 2e-9 for row in rows)

    code, text = _run(tmp_path, "trace", *seed, "--log-gamma", "-1", "-1", "1")
    assert code == cli.EXIT_OK
    assert len(read_csv(text)[2]) == 1


def test_profile_at_a_band_point_is_not_decaying(tmp_path):
    code, _ = _run(tmp_path, "profile", *HOMOGENEOUS, "--k", "2.0", "--omega", "1.1")
    assert code == cli.EXIT_NOT_DECAYING


def test_profile_at_a_root(tmp_path):
    from .validation import fixture_root, homogeneous_fixture

    seed = fixture_root(homogeneous_fixture(), 1.1)
    code, text = _run(
        tmp_path, "profile", *HOMOGENEOUS, "--k", repr(seed.k_hat), "--omega", "1.1",
        "--periods", "2", "--samples-per-layer", "4", "--lorentz-samples", "5",
    )
    assert code == cli.EXIT_OK
    _, columns, rows = read_csv(text)
    assert columns[:2] == ["x3_over_d", "Re_E1"]
    assert rows[0][0] == -3.0
    assert rows[-1][0] == 2.0


def test_validate_exit_status_follows_invariants(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_invariant_suite", lambda: [CheckResult("ok", INVARIANT, True, "fine")])
    code = cli.main(["validate", "--no-timestamp"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "✅" in out
    summary = json.loads(out[out.index("{"):])
    assert summary["passed"] is True

    monkeypatch.setattr(cli, "run_invariant_suite", lambda: [CheckResult("bad", INVARIANT, False, "off")])
    report = tmp_path / "report.json"
    code = cli.main(["validate", "--out", str(report)])
    assert code == cli.EXIT_FAILURE
    assert json.loads(report.read_text(encoding="utf-8"))["checks"][0]["name"] == "bad"


def test_validate_lists_an_invalid_config(tmp_path, capsys):
    report = tmp_path / "report.json"
    code = cli.main(["validate", "--set", "h=0", "--out", str(report)])
    assert code == cli.EXIT_CONFIG
    summary = json.loads(report.read_text(encoding="utf-8"))
    assert summary["passed"] is False
    [check] = summary["checks"]
    assert check["name"] == "config validation"
    assert check["kind"] == INVARIANT
    assert not check["passed"]
    assert "❌ [invariant] config validation" in capsys.readouterr().out
