"""Writing reports: one CSV per table, ``summary.json`` and ``plot_data.json``
under ``<directory>/<kind>-<config hash>/``."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .runners import ExperimentReport

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["kind", "config_hash", "seed", "config", "constants", "assertions", "passed", "flags", "runtime", "files"],
    "properties": {
        "kind": {"type": "string"},
        "config_hash": {"type": "string", "pattern": "^[0-9a-f]{12}$"},
        "seed": {"type": "integer", "minimum": 0},
        "config": {"type": "object"},
        "constants": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "value", "source", "tolerance"],
                "properties": {
                    "name": {"type": "string"},
                    "value": {"type": ["number", "string"]},
                    "source": {"type": "string"},
                    "tolerance": {"type": ["number", "null"]},
                },
            },
        },
        "assertions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "detail"],
                "properties": {"name": {"type": "string"}, "passed": {"type": "boolean"}, "detail": {"type": "string"}},
            },
        },
        "passed": {"type": "boolean"},
        "flags": {"type": "object"},
        "runtime": {"type": "number", "minimum": 0},
        "files": {"type": "array", "items": {"type": "string"}},
    },
}


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)  # "inf", "-inf", "nan"
    return x


def output_dir(report: ExperimentReport, directory) -> Path:
    return Path(directory) / f"{report.kind}-{report.config_hash}"


def emit_outputs(report: ExperimentReport, directory) -> list[Path]:
    """Write the report; rerunning the same config overwrites identically
    (apart from ``runtime`` in the summary)."""
    out = output_dir(report, directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, tab in sorted(report.tables.items()):
            p = out / f"{name}.csv"
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(tab["columns"])
                for row in tab["rows"]:
                    w.writerow([_cell(v) for v in row])
            written.append(p)
        p = out / "plot_data.json"
        p.write_text(json.dumps(_jsonable(report.curves), indent=1, sort_keys=True) + "\n")
        written.append(p)
        summary = {
            "kind": report.kind,
            "config_hash": report.config_hash,
            "seed": report.seed,
            "config": _jsonable(report.config),
            "constants": _jsonable(report.constants),
            "assertions": _jsonable(report.assertions),
            "passed": report.passed,
            "flags": _jsonable(report.flags),
            "runtime": float(report.runtime),
            "files": [q.name for q in written],
        }
        jsonschema.validate(summary, SUMMARY_SCHEMA)
        p = out / "summary.json"
        p.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        written.append(p)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write outputs: {exc.strerror}", str(getattr(exc, "filename", out))) from exc
    return written
