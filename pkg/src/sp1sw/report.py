"""Check records and the report document written by the command-line tool."""

import csv
import io
import json
import math
from dataclasses import dataclass, field

__all__ = ["Record", "ReportDocument", "record"]


def _clean(v):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(v, dict):
        return {str(k): _clean(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(w) for w in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


@dataclass
class Record:
    check_id: str
    anchor: str
    max_residual: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        # NaN never passes
        return bool(self.max_residual <= self.tolerance)

    def to_dict(self):
        return _clean({"check_id": self.check_id, "anchor": self.anchor,
                       "max_residual": float(self.max_residual),
                       "tolerance": float(self.tolerance), "pass": self.passed,
                       "details": self.details})


def record(check_id, anchor, residual, tolerance, **details):
    return Record(check_id, anchor, float(residual), float(tolerance), details)


@dataclass
class ReportDocument:
    version: str
    config: dict
    records: list
    notes: list = field(default_factory=list)
    attachments: dict = field(default_factory=dict)

    @property
    def n_failed(self):
        return sum(not r.passed for r in self.records)

    @property
    def all_passed(self):
        return self.n_failed == 0

    def to_dict(self):
        out = {
            "toolkit": "sp1sw",
            "version": self.version,
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
            "summary": {"checks": len(self.records),
                        "passed": len(self.records) - self.n_failed,
                        "failed": self.n_failed},
        }
        if self.notes:
            out["notes"] = list(self.notes)
        out.update(self.attachments)
        return _clean(out)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check_id", "anchor", "max_residual", "tolerance", "pass"])
        for r in self.records:
            w.writerow([r.check_id, r.anchor, repr(float(r.max_residual)),
                        repr(float(r.tolerance)), int(r.passed)])
        return buf.getvalue()
