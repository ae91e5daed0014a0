"""Structured results for experiment-style checks.

A report records what was measured, the bound it was held against, and the
verdict, in a JSON shape shared by the library and the command line:
``{check, params, measured, bound, pass, details}``.  Curve-style outputs
(one dict per row) go to a companion CSV.  Serialization is deterministic:
sorted keys, no timestamps.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ExperimentReport", "load_report"]


@dataclass(frozen=True)
class ExperimentReport:
    check: str
    params: dict
    measured: float
    bound: float
    passed: bool
    details: dict = field(default_factory=dict)
    curve: list[dict] | None = None

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "measured": self.measured,
            "bound": self.bound,
            "pass": self.passed,
            "details": self.details,
        }

    def save(self, base) -> None:
        """Write <base>.json, plus <base>.csv when a curve is attached."""
        base = Path(base)
        base.parent.mkdir(parents=True, exist_ok=True)
        base.with_suffix(".json").write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=2,
                       default=_json_fallback) + "\n",
            encoding="utf-8",
        )
        if self.curve:
            cols = list(self.curve[0].keys())
            with base.with_suffix(".csv").open("w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=cols)
                writer.writeheader()
                for row in self.curve:
                    writer.writerow({k: _csv_cell(row[k]) for k in cols})

    def summary_line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"[{verdict}] {self.check}: measured {self.measured:.6g} "
            f"vs bound {self.bound:.6g}"
        )


def _json_fallback(obj):
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _csv_cell(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def load_report(base) -> ExperimentReport:
    base = Path(base)
    data = json.loads(base.with_suffix(".json").read_text(encoding="utf-8"))
    return ExperimentReport(
        check=data["check"],
        params=data["params"],
        measured=float(data["measured"]),
        bound=float(data["bound"]),
        passed=bool(data["pass"]),
        details=data.get("details", {}),
    )
