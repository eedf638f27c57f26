"""Plain-text and JSON matrix serialisation.

Both formats round-trip float64 exactly: entries are written with 17
significant digits, which is enough to reproduce every double bit for bit.

Text layout::

    rows cols
    a11 a12 ...
    a21 a22 ...

JSON layout::

    {"rows": r, "cols": c, "data": [row-major entries]}
"""

import json

import numpy as np

from .errors import DimensionMismatch
from .validation import as_matrix


def format_matrix_text(m):
    m = as_matrix(m, "matrix")
    rows, cols = m.shape
    lines = [f"{rows} {cols}"]
    for row in m:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"


def parse_matrix_text(text):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise DimensionMismatch("empty matrix text")
    header = lines[0].split()
    if len(header) != 2:
        raise DimensionMismatch(f"bad matrix header: {lines[0]!r}")
    rows, cols = int(header[0]), int(header[1])
    if len(lines) - 1 != rows:
        raise DimensionMismatch(f"expected {rows} rows, got {len(lines) - 1}")
    data = []
    for ln in lines[1:]:
        entries = [float(x) for x in ln.split()]
        if len(entries) != cols:
            raise DimensionMismatch(f"expected {cols} columns in row {ln!r}")
        data.append(entries)
    return np.array(data, dtype=float).reshape(rows, cols)


def write_matrix_text(m, path):
    with open(path, "w") as fh:
        fh.write(format_matrix_text(m))


def read_matrix_text(path):
    with open(path) as fh:
        return parse_matrix_text(fh.read())


def matrix_to_json_dict(m):
    m = as_matrix(m, "matrix")
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]),
            "data": [float(x) for x in m.ravel()]}


def matrix_from_json_dict(d):
    rows, cols = int(d["rows"]), int(d["cols"])
    data = np.asarray(d["data"], dtype=float)
    if data.size != rows * cols:
        raise DimensionMismatch(
            f"data length {data.size} does not match {rows}x{cols}")
    return data.reshape(rows, cols)


def write_matrix_json(m, path):
    with open(path, "w") as fh:
        json.dump(matrix_to_json_dict(m), fh)


def read_matrix_json(path):
    with open(path) as fh:
        return matrix_from_json_dict(json.load(fh))
