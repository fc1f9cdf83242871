"""Deterministic CSV / JSON emission: fixed column order, stable float
formatting, newline-normalized output.  Every row carries the build id and
the seed so artifacts are traceable."""

from __future__ import annotations

import csv
import io
import json
import os
import subprocess
from fractions import Fraction

RESULT_COLUMNS = [
    "experiment_id", "structure", "engine", "n", "trial",
    "cells_raw", "cells_deduped", "census_lb", "covered", "uncrossed",
    "slope", "build", "seed",
]

ZARANKIEWICZ_COLUMNS = ["experiment", "m", "n", "edges", "q", "r", "ratio", "build", "seed"]

SUMPRODUCT_COLUMNS = [
    "experiment", "size_a", "size_b", "sumset", "productset", "max_size",
    "exponent", "incidences", "lower_bound", "identity_ok", "build", "seed",
]


def build_id() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=os.path.dirname(__file__),
            capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except Exception:
        pass
    return "distalcells-0.1.0"


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, Fraction):
        return str(value)
    return str(value)


def write_csv(path: str, columns: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(col)) for col in columns])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=fmt)
        fh.write("\n")
