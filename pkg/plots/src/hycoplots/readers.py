"""Readers for the run-directory file formats.

history.csv: one row per epoch, empty cells for unavailable metrics.
summary.json: run identity, resolved config, final metrics.
dataset.csv: observation records (x, y, [t], value components, noise flag).
fields/*.csv: long-format grids (x, y, [t], named value columns).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    pass


def read_history(path):
    """Columns of history.csv as float arrays (missing cells become nan)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty")
        rows = list(reader)
    if "epoch" not in header:
        raise SchemaError(f"{path} has no epoch column")
    cols = {}
    for j, name in enumerate(header):
        vals = np.array(
            [float(r[j]) if j < len(r) and r[j] != "" else np.nan for r in rows]
        )
        cols[name] = vals
    return cols


def read_summary(path):
    return json.loads(Path(path).read_text())


def read_dataset(path):
    """Observation coordinates and values: (points (M, d), values (M, k))."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(c) for c in row] for row in reader])
    coord_names = [c for c in ("x", "y", "t") if c in header]
    coord_idx = [header.index(c) for c in coord_names]
    val_idx = [
        j for j, name in enumerate(header) if name not in coord_names and name != "noisy"
    ]
    return data[:, coord_idx], data[:, val_idx]


def read_field(path):
    """Pivot a long-format field CSV into grids.

    Returns (xs, ys, {column: 2D array}); a t column, if present and
    constant, is exposed under key "t" as a scalar.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(c) for c in row] for row in reader])
    if "x" not in header or "y" not in header:
        raise SchemaError(f"{path} lacks x/y columns")
    x = data[:, header.index("x")]
    y = data[:, header.index("y")]
    xs = np.unique(x)
    ys = np.unique(y)
    if len(xs) * len(ys) != len(data):
        raise SchemaError(f"{path} is not a full grid")
    ix = np.searchsorted(xs, x)
    iy = np.searchsorted(ys, y)
    out = {}
    for j, name in enumerate(header):
        if name in ("x", "y"):
            continue
        if name == "t":
            tvals = data[:, j]
            out["t"] = float(tvals[0]) if np.all(tvals == tvals[0]) else tvals
            continue
        grid = np.full((len(xs), len(ys)), np.nan)
        grid[ix, iy] = data[:, j]
        out[name] = grid
    return xs, ys, out


def run_label(run_dir):
    """Method name from summary.json, else the directory name."""
    s = Path(run_dir) / "summary.json"
    if s.is_file():
        try:
            return read_summary(s).get("method", Path(run_dir).name)
        except (json.JSONDecodeError, OSError):
            pass
    return Path(run_dir).name
