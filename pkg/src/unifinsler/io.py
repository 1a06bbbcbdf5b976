"""Matrix JSON format and deterministic CSV output.

Matrix JSON: ``{"n": int, "entries": [[[re, im], ...], ...]}``, row-major.
CSV floats are written with 17 significant digits, '.' decimal, no locale.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import MatrixFormatError


def matrix_to_json(m) -> dict:
    a = np.asarray(m, dtype=complex)
    return {"n": int(a.shape[0]),
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a]}


def matrix_from_json(obj) -> np.ndarray:
    """Parse the matrix JSON object; rejects non-square or non-finite data."""
    if not isinstance(obj, dict) or "n" not in obj or "entries" not in obj:
        raise MatrixFormatError("matrix JSON needs 'n' and 'entries'")
    n = obj["n"]
    rows = obj["entries"]
    if not isinstance(n, int) or isinstance(n, bool) or n <= 0:
        raise MatrixFormatError(f"'n' must be a positive integer, got {n!r}")
    if not isinstance(rows, list) or len(rows) != n:
        raise MatrixFormatError(f"expected {n} rows")
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise MatrixFormatError(f"row {i} does not have {n} entries")
        for j, pair in enumerate(row):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise MatrixFormatError(f"entry ({i}, {j}) is not a [re, im] pair")
            try:
                re, im = float(pair[0]), float(pair[1])
            except (TypeError, ValueError):
                raise MatrixFormatError(f"entry ({i}, {j}) is not numeric") from None
            if not (math.isfinite(re) and math.isfinite(im)):
                raise MatrixFormatError(f"entry ({i}, {j}) is not finite")
            out[i, j] = complex(re, im)
    return out


def load_json(path) -> object:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(obj, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))


def flow_csv(samples) -> str:
    return csv_text(["t", "theta_min", "theta_max", "branch_ok"],
                    ([s.t, s.theta_min, s.theta_max, s.branch_ok] for s in samples))
