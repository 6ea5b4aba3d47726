"""Deterministic CSV and manifest output.

Every data file opens with a format tag line and the hash of the run
configuration that produced it, so a renderer (or a later run) can
check it is looking at a coherent bundle.  Floats are written with
repr, the shortest round-tripping form, which makes identical
configurations produce byte-identical files.  Writes go through a
temporary file and os.replace, so readers never see a half-written
file.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

FORMAT_TAG = "esqpt-lab v1"


class FormatError(ValueError):
    """A data file does not carry the expected header."""


def _format_cell(value, integer: bool) -> str:
    if integer:
        return str(int(value))
    return repr(float(value))


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, columns: dict, config_hash: str) -> None:
    """Write named columns (equal-length 1-d arrays) under the header."""
    names = list(columns)
    if not names:
        raise ValueError("refusing to write a CSV with no columns")
    arrays, is_int, is_str = [], [], []
    n_rows = None
    for name in names:
        arr = np.asarray(columns[name])
        if arr.ndim != 1:
            raise ValueError(f"column {name} is not one-dimensional")
        if n_rows is None:
            n_rows = arr.size
        elif arr.size != n_rows:
            raise ValueError(f"column {name} length {arr.size} != {n_rows}")
        arrays.append(arr)
        is_int.append(np.issubdtype(arr.dtype, np.integer))
        is_str.append(arr.dtype.kind in "US")

    lines = [f"# {FORMAT_TAG}", f"# config={config_hash}", ",".join(names)]
    for row in zip(*arrays):
        cells = [str(v) if s else _format_cell(v, i)
                 for v, i, s in zip(row, is_int, is_str)]
        lines.append(",".join(cells))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv(path: str):
    """Parse a file written by write_csv.

    Returns (columns, config_hash) where columns maps names to float
    arrays when every cell parses as a number, else object arrays.
    """
    with open(path, "r", newline="") as fh:
        tag = fh.readline().strip()
        if tag != f"# {FORMAT_TAG}":
            raise FormatError(f"{path}: unexpected header {tag!r}")
        cfg = fh.readline().strip()
        if not cfg.startswith("# config="):
            raise FormatError(f"{path}: missing config line")
        config_hash = cfg[len("# config="):]
        names = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    columns = {}
    for i, name in enumerate(names):
        raw = [r[i] for r in rows]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = np.array(raw, dtype=object)
    return columns, config_hash


def write_manifest(path: str, payload: dict) -> None:
    _atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True)
                       + "\n")
