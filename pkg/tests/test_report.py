import csv
import json
import math

import numpy as np

from csmult.app.report import (
    CSV_COLUMNS,
    FAIL,
    NOT_ASSERTED,
    PASS,
    CheckRecord,
    RunReport,
    judge,
    to_jsonable,
    write_reports,
)


def test_judge_relations():
    assert judge(1.0, 1.0 + 1e-9, "eq", 1e-8, True) == PASS
    assert judge(1.0, 1.1, "eq", 1e-8, True) == FAIL
    assert judge(0.5, 0.0, "le", 0.6, True) == PASS
    assert judge(-1e-7, 0.0, "ge", 1e-6, True) == PASS
    assert judge(-1e-5, 0.0, "ge", 1e-6, True) == FAIL
    assert judge(3.0, None, "none", None, True) == NOT_ASSERTED


def test_judge_fails_unconverged_or_nan():
    assert judge(1.0, 1.0, "eq", 1e-3, False) == FAIL
    assert judge(math.nan, 1.0, "eq", 1e-3, True) == FAIL
    # Unasserted values are reported whatever they are
    assert judge(math.nan, None, "none", None, False) == NOT_ASSERTED


def test_to_jsonable_handles_numeric_types():
    payload = to_jsonable({"z": 1 + 2j, "nan": math.nan, "arr": np.array([1.0, 2.0]), "t": (np.int64(3), True)})

    assert payload == {"z": [1.0, 2.0], "nan": None, "arr": [1.0, 2.0], "t": [3, True]}


def test_write_reports(tmp_path):
    report = RunReport(command="verify", config={"seed": 1})
    report.checks.append(CheckRecord("s0", "s0-disc", 6.283185307179586, 6.283185307179586, "eq", 1e-12, PASS, 1.25))
    report.checks.append(CheckRecord("knorm", "knorm-dzeta", -0.5, 0.0, "le", 1e-9, PASS, 2.0))
    report.checks.append(CheckRecord("vinogradov", "vino", 8.0, details={"fprime_h1": 2.0}))

    json_path, csv_path = write_reports(report, tmp_path / "out", "report.json", "summary.csv")

    data = json.loads(json_path.read_text())
    assert data["counts"] == {PASS: 2, FAIL: 0, NOT_ASSERTED: 1}
    assert data["checks"][2]["details"]["fprime_h1"] == 2.0
    assert not report.failed

    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4
    assert rows[1][3] == "6.28318530717959"
    assert rows[2][3] == "<= 0"
    assert rows[3][3] == ""
    assert rows[3][5] == NOT_ASSERTED
