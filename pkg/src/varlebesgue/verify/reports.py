"""Inequality reports and their deterministic serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["Case", "InequalityReport", "trend_verdict", "emit_report", "render_report", "STABLE_TOL"]

STABLE_TOL = 0.2
VERDICTS = ("bounded-stable", "growing", "inconclusive", "pass", "fail")


@dataclass(frozen=True)
class Case:
    function_id: str
    lhs: float
    rhs: float
    ratio: float


@dataclass
class InequalityReport:
    """Outcome of one check.

    ``constant`` is the max of the per-case ratios at the finest resolution;
    ``trend`` lists ``(resolution, constant)`` over the refinement ladder.
    Audit-style checks use ``pass``/``fail`` verdicts and fill ``clauses``.
    """

    check: str
    constant: float
    cases: list[Case]
    trend: list[tuple[int, float]]
    verdict: str
    config_hash: str = ""
    label: str = "exploratory"
    notes: str = ""
    threshold: float = STABLE_TOL
    clauses: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.cases:
            ratios = [c.ratio for c in self.cases]
            if self.constant != max(ratios):
                raise ValueError("constant must equal the max of the per-case ratios")
        if self.verdict in ("bounded-stable", "growing") and len(self.trend) < 2:
            raise ValueError("a trend verdict needs at least two resolutions")

    @property
    def ok(self) -> bool:
        return self.verdict in ("bounded-stable", "pass")

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "constant": self.constant,
            "cases": [
                {"function_id": c.function_id, "lhs": c.lhs, "rhs": c.rhs, "ratio": c.ratio} for c in self.cases
            ],
            "trend": [[int(r), v] for r, v in self.trend],
            "verdict": self.verdict,
            "label": self.label,
            "notes": self.notes,
            "threshold": self.threshold,
            "clauses": dict(self.clauses),
            "config_hash": self.config_hash,
        }


def trend_verdict(constants, tol: float = STABLE_TOL) -> str:
    """``bounded-stable`` iff every successive relative change is within ``tol``.

    A step up by more than ``tol`` marks ``growing``; anything else
    (a drop, non-finite values, fewer than two points) is ``inconclusive``.
    """
    c = np.asarray(constants, dtype=float)
    if len(c) < 2 or not np.all(np.isfinite(c)):
        return "growing" if len(c) >= 2 and np.isinf(c[-1]) else "inconclusive"
    prev, nxt = c[:-1], c[1:]
    scale = np.maximum(np.maximum(np.abs(prev), np.abs(nxt)), 1e-300)
    rel = np.where(prev == nxt, 0.0, (nxt - prev) / scale)
    if np.all(np.abs(rel) <= tol):
        return "bounded-stable"
    if np.any(rel > tol):
        return "growing"
    return "inconclusive"


def _fmt(v):
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            return "nan" if np.isnan(v) else ("inf" if v > 0 else "-inf")
        return float(f"{v:.12g}")
    if isinstance(v, dict):
        return {str(k): _fmt(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_fmt(x) for x in v]
    return str(v)


def render_report(reports, fmt: str = "json", config_hash: str = "") -> str:
    """Serialize to a string; sorted keys, 12 significant digits, no timestamps."""
    if fmt == "json":
        doc = {"config_hash": config_hash, "reports": [_fmt(r.as_dict()) for r in reports]}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["config_hash", "check", "verdict", "constant", "function_id", "lhs", "rhs", "ratio"])
        for r in reports:
            rows = r.cases or [Case("", float("nan"), float("nan"), float("nan"))]
            for c in rows:
                w.writerow(
                    [config_hash, r.check, r.verdict, _fmt(r.constant), c.function_id]
                    + [_fmt(v) for v in (c.lhs, c.rhs, c.ratio)]
                )
        return buf.getvalue()
    raise ValueError(f"format must be 'json' or 'csv', got {fmt!r}")


def emit_report(reports, fmt: str, path, config_hash: str = "") -> None:
    Path(path).write_text(render_report(reports, fmt, config_hash))
