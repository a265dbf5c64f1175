"""
Experiment reports and their file formats (see docs/FORMATS.md).
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

REPORT_FORMAT_VERSION = 1


@dataclass
class ClaimResult:
    """One asserted claim; `anchor` states the mathematical fact being checked."""
    claim_id: str
    anchor: str
    passed: bool
    measured: Any
    expected: Any
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "anchor": self.anchor,
            "passed": self.passed,
            "measured": self.measured,
            "expected": self.expected,
            "detail": self.detail,
        }


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    tolerances: dict
    claims: list[ClaimResult] = field(default_factory=list)
    measurements: dict = field(default_factory=dict)
    samples: list[dict] = field(default_factory=list)
    error: Optional[str] = None
    duration_s: Optional[float] = None

    def add_claim(self, claim_id: str, anchor: str, passed: bool, measured: Any, expected: Any, detail: str = ""):
        self.claims.append(ClaimResult(claim_id, anchor, bool(passed), measured, expected, detail))
        level = logging.INFO if passed else logging.WARNING
        logger.log(level, "[RUN] %s: %s (measured %s, expected %s)", claim_id, "PASS" if passed else "FAIL", measured, expected)

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.claims)

    def to_dict(self) -> dict:
        doc = {
            "experiment": self.experiment,
            "passed": self.passed,
            "claims": [c.to_dict() for c in self.claims],
            "measurements": self.measurements,
            "tolerances": self.tolerances,
            "config": self.config,
            "error": self.error,
        }
        if self.duration_s is not None:
            doc["duration_s"] = self.duration_s
        return _jsonable(doc)


def _jsonable(value: Any) -> Any:
    """numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_report(reports: Sequence[ExperimentReport], path: str | Path) -> dict:
    """Write the run document and return it."""
    doc = {
        "format_version": REPORT_FORMAT_VERSION,
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    logger.info("[RUN] Report written to %s", path)
    return doc


def write_samples_csv(reports: Sequence[ExperimentReport], path: str | Path) -> int:
    """One row per sample across all reports; returns the row count."""
    rows = [{"experiment": r.experiment, **_jsonable(s)} for r in reports for s in r.samples]
    columns = ["experiment"] + sorted({k for row in rows for k in row} - {"experiment"})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    logger.info("[RUN] %d sample rows written to %s", len(rows), path)
    return len(rows)
