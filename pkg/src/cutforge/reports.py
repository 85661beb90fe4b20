"""Result tables and provenance sidecars.

Every run emits a CSV whose columns mirror the benchmark tables (instance,
relaxation, value, cuts added, time, gap) plus a JSON sidecar carrying full
provenance: seed, configuration, and package versions.  Bound values are
written with 17 significant digits so a round-trip read is bit-exact; the
gap column keeps the conventional two-decimal percent format.
"""

from __future__ import annotations

import csv
import json
import os
import platform
from dataclasses import asdict, is_dataclass

import numpy as np

from . import __version__


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_report(rows: list, out_dir: str, provenance: dict,
                 basename: str = "report") -> dict:
    """Write `<basename>.csv` and `<basename>.json`; returns the paths.

    ``rows`` are dicts with keys instance, relaxation, value, cuts_added,
    time_s, gap (gap may be None when no upper bound is known).
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{basename}.csv")
    json_path = os.path.join(out_dir, f"{basename}.json")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "relaxation", "value", "cuts_added",
                         "time_s", "gap"])
        for row in rows:
            gap = "" if row.get("gap") is None else f"{row['gap']:.2f}%"
            writer.writerow([
                row["instance"], row["relaxation"], f"{row['value']:.17g}",
                row.get("cuts_added", 0), f"{row.get('time_s', 0.0):.3f}", gap,
            ])
    payload = {"rows": _jsonable(rows), "provenance": _jsonable(provenance)}
    payload["provenance"].setdefault("versions", {})
    payload["provenance"]["versions"].update({
        "cutforge": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    })
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"csv": csv_path, "json": json_path}


def write_trace(trace_rows: list, path: str) -> None:
    """Per-iteration trace CSV: stage, cuts added, bound, elapsed seconds."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "cuts_added", "bound", "time_s"])
        for stage, cuts, bound, secs in trace_rows:
            writer.writerow([stage, cuts, f"{bound:.17g}", f"{secs:.3f}"])


def read_report_values(csv_path: str) -> list:
    out = []
    with open(csv_path) as fh:
        for row in csv.DictReader(fh):
            out.append(float(row["value"]))
    return out
