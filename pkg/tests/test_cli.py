import csv
import json

import pytest

from csmult.app.main import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main, parse_args
from csmult.app.suite import KINDS, load_manifest
from csmult.experiment import default_experiment

SMALL_MANIFEST = """
[suite]
seed = 7
battery_cases = 3

[domains]
disc = [[1.0, 0.0]]

[[check]]
kind = "s0"
name = "s0-disc"
domain = "disc"
expected = 6.283185307179586
tol = 1e-12

[[check]]
kind = "trapezoid-kink"
name = "kink-1024"
n = 1024
expected = 8.0
tol = 1e-5

[[check]]
kind = "battery-trapezoid"
name = "trapezoid-battery"
expected = 0.0
tol = 1e-12

[[check]]
kind = "chord-arc"
name = "chord-arc-disc"
domain = "disc"
"""


@pytest.fixture(autouse=True)
def _quiet_env(monkeypatch, tmp_path):
    monkeypatch.setenv("CSMULT_THREADS", "1")
    monkeypatch.setenv("CSMULT_OUT_DIR", str(tmp_path / "default-out"))


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_args_global_flags():
    args = parse_args(["--out", "x", "--n-override", "512", "theorem2", "f_square", "--p", "2", "--p", "4"])

    assert args.out == "x"
    assert args.n_override == 512
    assert args.p == [2.0, 4.0]


def test_lambda_command_writes_reports(tmp_path):
    out = tmp_path / "out"
    assert main(["--quiet", "--out", str(out), "lambda", "f_square"]) == EXIT_OK

    data = json.loads((out / "report.json").read_text())
    check = data["checks"][0]
    assert check["check"] == "lambda"
    assert abs(check["value"] - 8.0) < 1e-6
    assert check["verdict"] == "not-asserted"
    assert _rows(out / "summary.csv")[0]["name"] == "lambda-f_square"


def test_domain_info(tmp_path):
    out = tmp_path / "out"
    assert main(["--quiet", "--out", str(out), "domain-info"]) == EXIT_OK

    rows = {r["name"]: r for r in _rows(out / "summary.csv")}
    assert abs(float(rows["s0"]["value"]) - 6.283185307179586) < 1e-12
    assert abs(float(rows["chord-arc"]["value"]) - 0.6366197723675814) < 1e-9


def test_non_univalent_phi_exits_with_config_error(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"domain": {"phi": [[1, 0], [0.6, 0]]}}))

    assert main(["--quiet", "--config", str(config), "--out", str(tmp_path), "domain-info"]) == EXIT_CONFIG
    assert "phi'" in capsys.readouterr().err


def test_unknown_function_exits_with_config_error(tmp_path, capsys):
    assert main(["--quiet", "--out", str(tmp_path), "lambda", "f_missing"]) == EXIT_CONFIG
    assert "functions.f_missing" in capsys.readouterr().err


def test_verify_with_custom_manifest(tmp_path):
    manifest = tmp_path / "acceptance.toml"
    manifest.write_text(SMALL_MANIFEST)
    out = tmp_path / "out"

    assert main(["--quiet", "--out", str(out), "verify", "--manifest", str(manifest)]) == EXIT_OK

    rows = _rows(out / "summary.csv")
    assert [r["name"] for r in rows] == ["s0-disc", "kink-1024", "trapezoid-battery", "chord-arc-disc"]
    assert [r["verdict"] for r in rows] == ["pass", "pass", "pass", "not-asserted"]
    data = json.loads((out / "report.json").read_text())
    assert data["config"]["seed"] == 7
    assert data["counts"]["pass"] == 3


def test_verify_failure_exits_one(tmp_path):
    manifest = tmp_path / "acceptance.toml"
    manifest.write_text(SMALL_MANIFEST.replace("expected = 6.283185307179586", "expected = 7.0"))

    assert main(["--quiet", "--out", str(tmp_path / "out"), "verify", "--manifest", str(manifest)]) == EXIT_FAILED


def test_verify_is_deterministic(tmp_path):
    manifest = tmp_path / "acceptance.toml"
    manifest.write_text(SMALL_MANIFEST)
    values = []
    for run in ("a", "b"):
        out = tmp_path / run
        main(["--quiet", "--out", str(out), "verify", "--manifest", str(manifest)])
        values.append([r["value"] for r in _rows(out / "summary.csv")])

    assert values[0] == values[1]


def test_manifest_errors_exit_with_config_error(tmp_path, capsys):
    manifest = tmp_path / "acceptance.toml"
    manifest.write_text('[[check]]\nkind = "nope"\nname = "x"\n')

    assert main(["--quiet", "--out", str(tmp_path), "verify", "--manifest", str(manifest)]) == EXIT_CONFIG
    assert "check[0].kind" in capsys.readouterr().err

    manifest.write_text("[[check]\n")
    assert main(["--quiet", "--out", str(tmp_path), "verify", "--manifest", str(manifest)]) == EXIT_CONFIG


def test_shipped_manifest_loads():
    manifest = load_manifest(default_experiment())
    names = [c.name for c in manifest.checks]
    kinds = {c.kind for c in manifest.checks}

    assert len(names) == len(set(names))
    assert kinds <= set(KINDS)
    assert {"disc", "quad"} <= set(manifest.domains)
    assert manifest.battery_cases == 50
    # Every registered kind is exercised by the suite
    assert kinds == set(KINDS)


def test_interior_pole_fails_instead_of_reporting_a_value(tmp_path):
    config = tmp_path / "pole.json"
    config.write_text(json.dumps({
        "functions": {"f_inner": {"kind": "rational", "poles": [{"a": [0.37, 0.21]}]}},
    }))
    out = tmp_path / "out"

    assert main(["--quiet", "--config", str(config), "--out", str(out), "lambda", "f_inner"]) == EXIT_FAILED

    check = json.loads((out / "report.json").read_text())["checks"][0]
    assert check["verdict"] == "fail"
    assert "FunctionEvaluationError" in check["details"]["error"]


def test_verify_records_baseline_drift(tmp_path):
    manifest = tmp_path / "acceptance.toml"
    manifest.write_text(
        '[domains]\ndisc = [[1.0, 0.0]]\n\n'
        '[[check]]\nkind = "chord-arc"\nname = "chord-arc-disc"\ndomain = "disc"\n'
        "baseline = 0.6366197723675814\n"
    )
    out = tmp_path / "out"

    assert main(["--quiet", "--out", str(out), "verify", "--manifest", str(manifest)]) == EXIT_OK

    check = json.loads((out / "report.json").read_text())["checks"][0]
    assert check["verdict"] == "not-asserted"
    assert check["details"]["baseline"] == 0.6366197723675814
    assert abs(check["details"]["baseline_drift"]) < 1e-9


def test_non_numeric_baseline_is_a_config_error(tmp_path, capsys):
    manifest = tmp_path / "acceptance.toml"
    manifest.write_text('[[check]]\nkind = "s0"\nname = "s0"\nbaseline = "high"\n')

    assert main(["--quiet", "--out", str(tmp_path), "verify", "--manifest", str(manifest)]) == EXIT_CONFIG
    assert "check[0].baseline" in capsys.readouterr().err
