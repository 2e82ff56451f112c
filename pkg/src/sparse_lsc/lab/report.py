"""CSV and JSON emission for experiment reports."""
from __future__ import annotations

import csv
import json
import math
import subprocess
from pathlib import Path

from .runner import ExperimentReport

__all__ = ["SCHEMA_VERSION", "write_report", "git_describe"]

SCHEMA_VERSION = 1


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, timeout=10, cwd=Path(__file__).parent)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def _cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int)) and not isinstance(value, float):
        return str(int(value))
    return repr(float(value))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_report(report: ExperimentReport, out_dir) -> list[Path]:
    """Write ``<experiment>.csv`` and ``summary.json`` into ``out_dir``.

    Floats are written with ``repr`` so rows round-trip exactly. Returns the
    paths written.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from exc
    name = report.config.experiment
    csv_path = out / f"{name}.csv"
    json_path = out / "summary.json"
    columns = report.columns
    try:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in report.rows:
                w.writerow([_cell(row[c]) for c in columns])
        summary = {
            "schema_version": SCHEMA_VERSION,
            "experiment": name,
            "config": report.config.to_dict(),
            "git_describe": git_describe(),
            "pass": report.passed,
            "wall_time": report.wall_time,
            "summary": report.summary,
            "failures": report.failures,
        }
        with open(json_path, "w") as fh:
            json.dump(_json_safe(summary), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return [csv_path, json_path]
