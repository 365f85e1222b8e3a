"""CSV / JSON emission. Floats are written with 17 significant digits so
repeated serial runs can be compared byte for byte."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from ryflow.diagnostics import CSV_COLUMNS

SCHEMA_VERSION = 1


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow([fmt(v) for v in rec.csv_row()])
    return buf.getvalue()


def write_csv(records, path):
    Path(path).write_text(records_csv(records), encoding="utf-8")


def read_csv(path):
    """Parse a records CSV back into a list of column -> float dicts."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: float(v) for k, v in row.items()} for row in rows]


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(payload) -> str:
    return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"


def write_json(payload, path):
    Path(path).write_text(dumps(payload), encoding="utf-8")


SUMMARY_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version",
        "status",
        "t_final",
        "exit_code",
        "message",
        "monitors",
        "all_monitors_passed",
        "config",
        "summary",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "status": {
            "enum": ["reached_t_end", "blowup_detected", "degenerate_metric", "max_steps"]
        },
        "t_final": {"type": "number"},
        "exit_code": {"enum": [0, 2, 3]},
        "message": {"type": "string"},
        "all_monitors_passed": {"type": "boolean"},
        "monitors": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "applicable", "worst_margin", "t_worst"],
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "applicable": {"type": "boolean"},
                    "worst_margin": {"type": ["number", "null"]},
                    "t_worst": {"type": ["number", "null"]},
                },
            },
        },
        "config": {"type": "object"},
        "summary": {"type": "object"},
    },
}

VERIFY_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "scenario", "passed", "criteria"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "scenario": {"type": "string"},
        "passed": {"type": "boolean"},
        "criteria": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "value", "threshold", "detail"],
            },
        },
    },
}
