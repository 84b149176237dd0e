"""Text and JSON renderings of a verification report."""
from __future__ import annotations

import json
from importlib import resources

from .executor import (
    ASSERTION_VIOLATION, CONTRACT_VIOLATION, OVERFLOW_VIOLATION, PARTIALLY_CORRECT,
    POSTCONDITION_VIOLATION, VerificationReport,
)

SCHEMA_VERSION = 1

EXIT_CODES = {
    PARTIALLY_CORRECT: 0,
    POSTCONDITION_VIOLATION: 1,
    ASSERTION_VIOLATION: 2,
    CONTRACT_VIOLATION: 2,
    OVERFLOW_VIOLATION: 2,
}
EXIT_USAGE = 3
EXIT_RESOURCE = 4


def exit_code(report: VerificationReport) -> int:
    return EXIT_CODES[report.verdict]


def schema() -> dict:
    text = resources.files("cpverify").joinpath("report.schema.json").read_text("utf-8")
    return json.loads(text)


def to_document(report: VerificationReport, params=None, options=None,
                timing: bool = False) -> dict:
    """Plain-data form of ``report``; wall time only when ``timing`` is set."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "program": report.program,
        "params": dict(sorted((params or {}).items())),
        "options": dict(sorted((options or {}).items())),
        "verdict": report.verdict,
        "exit_code": exit_code(report),
        "witness": report.witness,
        "trace": list(report.trace),
        "line": report.line,
        "message": report.message,
        "paths": {"feasible": report.feasible_paths, "pruned": report.pruned_paths},
        "pruned": [{"trace": list(p.trace), "layer": p.layer} for p in report.pruned],
        "solver": dict(sorted(report.stats.items())),
    }
    if timing:
        doc["elapsed_seconds"] = round(report.elapsed, 6)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _value(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return str(v)


def to_text(report: VerificationReport, timing: bool = False) -> str:
    lines = [f"{report.program}: {report.verdict}",
             f"  feasible paths: {report.feasible_paths}, pruned: {report.pruned_paths}"]
    if report.witness is not None:
        lines.append("  trace: <" + ",".join(report.trace) + ">")
        if report.line is not None:
            lines.append(f"  line: {report.line}")
        if report.message:
            lines.append(f"  {report.message}")
        lines.append("  witness:")
        lines += [f"    {k} = {_value(v)}" for k, v in report.witness.items()]
    if timing:
        lines.append(f"  time: {report.elapsed:.3f}s")
    return "\n".join(lines) + "\n"
