"""Delimited-text output with a commented provenance header.

Every data file starts with ``#`` lines carrying the artifact version, the
config hash and the seeds. Everything after the header is the data section,
which is byte-identical across re-runs of the same config.
"""
from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

from . import __version__
from .readout import ReadoutWeights


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def header_lines(meta: dict | None = None) -> list[str]:
    meta = dict(meta or {})
    lines = [f"# stno_reservoir {__version__}"]
    lines += [f"# {k}: {meta[k]}" for k in meta]
    return lines


def write_table(path, columns, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    for line in header_lines(meta):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    """Return ``(meta, columns, rows)``; values are left as strings."""
    meta, body = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition(": ")
            if sep:
                meta[key] = value
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise ValueError(f"{path}: no column header")
    return meta, rows[0], rows[1:]


def data_section(path) -> str:
    return "".join(line for line in Path(path).read_text(encoding="utf-8").splitlines(True)
                   if not line.startswith("#"))


def write_matrix(path, row_axis, col_axis, values, corner: str, meta: dict | None = None) -> Path:
    """A heatmap-ready grid: header row = column axis, first column = row axis."""
    columns = [corner] + [fmt(c) for c in col_axis]
    rows = [[r, *vals] for r, vals in zip(row_axis, np.asarray(values))]
    return write_table(path, columns, rows, meta)


def write_trace(path, trace, meta: dict | None = None) -> Path:
    return write_table(path, ["t_ns", "v_mV"], zip(trace.times, trace.samples), meta)


def read_drive(path) -> tuple[np.ndarray, float]:
    """Two-column ``t_ns,i_mA`` file with uniform spacing -> (samples, dt)."""
    _, columns, rows = read_table(path)
    if len(columns) != 2:
        raise ValueError(f"{path}: expected columns t_ns,i_mA, got {columns}")
    arr = np.array(rows, dtype=float)
    if arr.shape[0] < 2:
        raise ValueError(f"{path}: need at least two samples")
    steps = np.diff(arr[:, 0])
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12) or steps[0] <= 0:
        raise ValueError(f"{path}: time column must be uniformly increasing")
    return arr[:, 1], float(steps[0])


def save_weights(path, weights: ReadoutWeights, meta: dict | None = None) -> Path:
    meta = {**(meta or {}), "ridge": fmt(weights.ridge), "shape": "x".join(map(str, weights.values.shape))}
    cols = [f"s{k}" for k in range(weights.n_features)]
    return write_table(path, cols, weights.values, meta)


def load_weights(path) -> ReadoutWeights:
    meta, cols, rows = read_table(path)
    values = np.array(rows, dtype=float).reshape(-1, len(cols))
    return ReadoutWeights(values, float(meta.get("ridge", 0.0)))
