"""Run reports: per-check records, JSON and CSV writers."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
NOT_ASSERTED = "not-asserted"
VERDICTS = (PASS, FAIL, NOT_ASSERTED)

RELATIONS = ("eq", "le", "ge", "none")

CSV_COLUMNS = ("check", "name", "value", "expected", "tol", "verdict", "wall_time_ms")


@dataclass
class CheckRecord:
    check: str
    name: str
    value: float
    expected: Optional[float] = None
    relation: str = "none"
    tol: Optional[float] = None
    verdict: str = NOT_ASSERTED
    wall_time_ms: float = 0.0
    est_error: float = math.nan
    converged: bool = True
    inputs: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    def expected_text(self) -> str:
        if self.relation == "none" or self.expected is None:
            return ""
        if self.relation == "le":
            return f"<= {_fmt(self.expected)}"
        if self.relation == "ge":
            return f">= {_fmt(self.expected)}"
        return _fmt(self.expected)


def judge(value: float, expected: Optional[float], relation: str, tol: Optional[float], converged: bool) -> str:
    """Verdict for one value; non-converged asserted checks fail."""
    if relation == "none" or expected is None:
        return NOT_ASSERTED
    if not converged or value is None or not math.isfinite(value):
        return FAIL
    tol = 0.0 if tol is None else tol
    if relation == "eq":
        ok = abs(value - expected) <= tol
    elif relation == "le":
        ok = value <= expected + tol
    elif relation == "ge":
        ok = value >= expected - tol
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return PASS if ok else FAIL


@dataclass
class RunReport:
    command: str
    config: Dict[str, Any]
    checks: List[CheckRecord] = field(default_factory=list)
    started: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def counts(self) -> Dict[str, int]:
        return {v: sum(1 for c in self.checks if c.verdict == v) for v in VERDICTS}

    @property
    def failed(self) -> bool:
        return any(c.verdict == FAIL for c in self.checks)


# ── Serialization ────────────────────────────────────────────────────────


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".15g")
    return str(value)


def to_jsonable(obj: Any) -> Any:
    """Complex → [re, im], non-finite floats → None, tuples and arrays → lists."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(report: RunReport, path: Path) -> Path:
    payload = {
        "command": report.command,
        "started": report.started,
        "config": report.config,
        "counts": report.counts(),
        "checks": [asdict(c) for c in report.checks],
    }
    path.write_text(json.dumps(to_jsonable(payload), indent=2) + "\n", encoding="utf-8")
    return path


def write_csv(report: RunReport, path: Path) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in report.checks:
            writer.writerow([
                c.check,
                c.name,
                _fmt(c.value),
                c.expected_text(),
                _fmt(c.tol),
                c.verdict,
                format(c.wall_time_ms, ".1f"),
            ])
    return path


def write_reports(report: RunReport, out_dir: Path, json_name: str, csv_name: str) -> Tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = write_json(report, out_dir / json_name)
    csv_path = write_csv(report, out_dir / csv_name)
    logger.info("Wrote %s and %s", json_path, csv_path)
    return json_path, csv_path


__all__ = [
    "CSV_COLUMNS",
    "CheckRecord",
    "FAIL",
    "NOT_ASSERTED",
    "PASS",
    "RELATIONS",
    "RunReport",
    "VERDICTS",
    "judge",
    "to_jsonable",
    "write_csv",
    "write_json",
    "write_reports",
]
