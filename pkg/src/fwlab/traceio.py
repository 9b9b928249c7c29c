"""Trace CSV and summary JSON serialization.

The CSV schema is a bit-exact contract shared with downstream tooling:

    header  t,F,g,d,gamma,delta,h
    floats  shortest round-trip decimal (CPython repr)
    missing non-finite values (delta without minimizer witnesses, F/h
            without a reference value) serialize as the empty field

Writing the same trace twice must produce byte-identical files, and reading
a file back must reproduce the written values exactly, so every analysis
verdict survives a round trip.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os

import numpy as np

TRACE_COLUMNS = ("t", "F", "g", "d", "gamma", "delta", "h")
TRACE_HEADER = ",".join(TRACE_COLUMNS)


def _field(value: float) -> str:
    v = float(value)
    return repr(v) if math.isfinite(v) else ""


def write_trace_csv(trace, path) -> None:
    """Write solver trace records under the bit-exact CSV schema."""
    with open(path, "w", newline="") as fh:
        fh.write(TRACE_HEADER + "\n")
        for r in trace.records:
            row = (str(int(r.t)), _field(r.F), _field(r.g), _field(r.d),
                   _field(r.gamma), _field(r.delta), _field(r.h))
            fh.write(",".join(row) + "\n")


@dataclasses.dataclass(frozen=True)
class TraceFrame:
    """Columnar view of a trace read back from CSV.

    Quacks enough like a live solver Trace (`.t`, `.column`, `.meta`) for the
    analysis module to consume either interchangeably.
    """

    t: np.ndarray
    columns: dict
    meta: dict

    def column(self, name: str) -> np.ndarray:
        if name == "t":
            return self.t
        return self.columns[name]

    def __len__(self) -> int:
        return self.t.shape[0]


def read_trace_csv(path) -> TraceFrame:
    """Read a schema CSV back; empty fields become NaN."""
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(TRACE_COLUMNS):
            raise ValueError(
                f"{path}: expected header {TRACE_HEADER!r}, got {header!r}")
        rows = [row for row in reader if row]
    for i, row in enumerate(rows):
        if len(row) != len(TRACE_COLUMNS):
            raise ValueError(f"{path}: row {i + 2} has {len(row)} fields")
    t = np.array([int(row[0]) for row in rows], dtype=np.int64)
    cols = {}
    for j, name in enumerate(TRACE_COLUMNS[1:], start=1):
        cols[name] = np.array(
            [float(row[j]) if row[j] != "" else math.nan for row in rows])
    return TraceFrame(t=t, columns=cols, meta={"path": str(path)})


def _jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats -> null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def write_summary_json(summary: dict, path) -> None:
    """Deterministic summary document: sorted keys, round-trip floats."""
    with open(path, "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary_json(path) -> dict:
    with open(path, "r") as fh:
        return json.load(fh)


def ensure_out_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return str(path)
