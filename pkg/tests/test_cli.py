"""Command-line harness: exit codes, report shape, determinism, artifacts."""
import json

import numpy as np
import pytest

from polyfock import cli
from polyfock.basis import TruncationSpec
from polyfock.operators import save_operator
from polyfock.sampling import PRNG_NAME, random_toeplitz

SMALL = ["--k", "1", "--n", "1", "--m", "2", "--L", "5"]


def run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


# -- exit codes --------------------------------------------------------------


def test_verify_passes_with_exit_zero(capsys):
    code, report = run_json(capsys, ["verify", *SMALL])
    assert code == cli.EXIT_PASS
    assert report["overall_pass"] is True


def test_dense_operator_fails_with_exit_one(capsys):
    code, report = run_json(
        capsys, ["toeplitz", *SMALL, "--source", "random-dense"]
    )
    assert code == cli.EXIT_CHECK_FAILURE
    assert report["overall_pass"] is False
    by_name = {c["name"]: c for c in report["checks"]}
    assert by_name["structure_detect"]["pass"] is False
    assert by_name["bh_residual"]["pass"] is False
    assert by_name["tests_agree"]["pass"] is True


def test_unusable_truncation_is_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["verify", "--k", "1", "--n", "1", "--m", "1", "--L", "0"])
    assert info.value.code == cli.EXIT_USAGE


def test_truncation_below_weight_order_is_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["verify", "--k", "1", "--n", "1", "--m", "2", "--L", "1"])
    assert info.value.code == cli.EXIT_USAGE


def test_file_source_requires_operator_flag():
    with pytest.raises(SystemExit) as info:
        cli.main(["toeplitz", *SMALL, "--source", "file"])
    assert info.value.code == cli.EXIT_USAGE


def test_point_outside_ball_is_precondition_error(capsys):
    code = cli.main(["berezin", *SMALL, "--radial", "1.2"])
    assert code == cli.EXIT_PRECONDITION
    assert "error" in capsys.readouterr().err


def test_missing_operator_file_is_precondition_error(tmp_path, capsys):
    missing = tmp_path / "nope.npz"
    code = cli.main(
        ["toeplitz", *SMALL, "--source", "file", "--operator", str(missing)]
    )
    assert code == cli.EXIT_PRECONDITION
    assert "error" in capsys.readouterr().err


# -- report shape ------------------------------------------------------------


def test_report_fields_and_ordering(capsys):
    _, report = run_json(capsys, ["verify", *SMALL, "--seed", "3"])
    assert report["prng"] == PRNG_NAME
    assert report["suite"] == "verify"
    assert report["seed"] == 3
    assert report["spec"]["L"] == [5]
    names = [c["name"] for c in report["checks"]]
    assert names == sorted(names)
    for check in report["checks"]:
        assert set(check) >= {"name", "pass", "residual", "guard_band", "elapsed_ms"}
        assert isinstance(check["pass"], bool)
        assert check["residual"] >= 0.0


def test_tolerance_override_recorded(capsys):
    _, report = run_json(capsys, ["verify", *SMALL, "--tol", "1e-6"])
    assert report["tol"] == 1e-6


def test_json_written_to_out_path(tmp_path, capsys):
    out = tmp_path / "verify.json"
    code = cli.main(["verify", *SMALL, "--out", str(out)])
    assert code == cli.EXIT_PASS
    report = json.loads(out.read_text())
    assert report["overall_pass"] is True
    assert str(out) in capsys.readouterr().out


# -- determinism -------------------------------------------------------------


def strip_timing(report):
    for check in report["checks"]:
        check.pop("elapsed_ms")
    return report


def test_identical_runs_match_after_dropping_timing(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        cli.main(["toeplitz", *SMALL, "--seed", "5", "--out", str(p)])
    a, b = (strip_timing(json.loads(p.read_text())) for p in paths)
    assert a == b


def test_seed_changes_sampled_operator(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p, seed in zip(paths, ("1", "2")):
        cli.main(["toeplitz", *SMALL, "--seed", seed, "--out", str(p)])
    a, b = (strip_timing(json.loads(p.read_text())) for p in paths)
    assert a != b


# -- file-backed operators ---------------------------------------------------


def test_operator_file_roundtrip_through_cli(tmp_path, capsys):
    spec = TruncationSpec.make(1, [1], [2], [5])
    path = tmp_path / "op.npz"
    save_operator(path, random_toeplitz(spec, seed=2), spec)
    code, report = run_json(
        capsys, ["toeplitz", *SMALL, "--source", "file", "--operator", str(path)]
    )
    assert code == cli.EXIT_PASS
    assert report["overall_pass"] is True


def test_operator_file_spec_mismatch_rejected(tmp_path, capsys):
    other = TruncationSpec.make(1, [1], [1], [5])
    path = tmp_path / "op.npz"
    save_operator(path, random_toeplitz(other, seed=2), other)
    code = cli.main(
        ["toeplitz", *SMALL, "--source", "file", "--operator", str(path)]
    )
    assert code == cli.EXIT_PRECONDITION
    assert "error" in capsys.readouterr().err


# -- report directory --------------------------------------------------------


def test_report_writes_all_artifacts(tmp_path, capsys):
    out = tmp_path / "rep"
    code = cli.main(["report", *SMALL, "--out", str(out)])
    assert code == cli.EXIT_PASS
    for name in (
        "report.json",
        "summary.csv",
        "fejer_convergence.png",
        "weight_ratio_limit.png",
        "residual_summary.png",
    ):
        assert (out / name).exists(), name
    combined = json.loads((out / "report.json").read_text())
    assert combined["overall_pass"] is True
    assert [r["suite"] for r in combined["suites"]] == [
        "verify",
        "toeplitz",
        "berezin",
        "fourier",
    ]
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0] == "suite,check,pass,residual,guard_band,elapsed_ms"
    assert len(lines) == 1 + sum(len(r["checks"]) for r in combined["suites"])
    stdout = capsys.readouterr().out
    assert "overall: pass" in stdout


def test_report_figures_are_png(tmp_path):
    out = tmp_path / "rep"
    cli.main(["report", *SMALL, "--out", str(out)])
    for name in ("fejer_convergence.png", "weight_ratio_limit.png"):
        assert (out / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
