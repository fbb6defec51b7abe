"""
Raster and text output of sampled fields.

PGM files are 16-bit binary graymaps (``P5``, maxval 65535, big-endian),
rows ordered from the largest z at the top. CSV files carry one line per
z row in the same order, preceded by a ``#`` header line.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .fields import Grid, ScalarField2D, Unit

MAXVAL = 65535
FIXED_RANGE_UNITS = (Unit.INTENSITY, Unit.VISIBILITY)


def _image_rows(values: np.ndarray) -> np.ndarray:
    # (nx, nz) -> rows of constant z, top row = max z
    return values.T[::-1]


def _from_image_rows(rows: np.ndarray) -> np.ndarray:
    return rows[::-1].T


def quantize(field: ScalarField2D) -> np.ndarray:
    """Map field values to 16-bit levels, rounding half up.

    Intensity and visibility use the fixed range [0, 1] (values outside are
    clipped); other units are stretched linearly from min to max.
    """
    v = field.values
    if not np.isfinite(v).all():
        raise ValueError("cannot write non-finite values")
    if field.unit in FIXED_RANGE_UNITS:
        lo, hi = 0.0, 1.0
    else:
        lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        u = np.clip((v - lo) / (hi - lo), 0.0, 1.0)
    else:
        u = np.zeros_like(v)
    return np.floor(u * MAXVAL + 0.5).astype(np.uint16)


def write_pgm(field: ScalarField2D, path) -> Path:
    path = Path(path)
    rows = _image_rows(quantize(field))
    header = f"P5\n{field.nx} {field.nz}\n{MAXVAL}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rows.astype(">u2").tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    """Return the stored levels as a ``(nx, nz)`` uint16 array."""
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if not m:
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != MAXVAL:
        raise ValueError(f"{path}: expected maxval {MAXVAL}, got {maxval}")
    rows = np.frombuffer(data, dtype=">u2", count=w * h, offset=m.end()).reshape(h, w)
    return _from_image_rows(rows).astype(np.uint16)


def write_csv(field: ScalarField2D, path) -> Path:
    path = Path(path)
    g = field.grid
    lines = [f"# nx={g.nx} nz={g.nz} extent_x={g.extent_x!r} extent_z={g.extent_z!r} "
             f"unit={field.unit.value} rows=z_descending"]
    for row in _image_rows(field.values):
        lines.append(",".join(repr(float(x)) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def read_csv(path) -> ScalarField2D:
    text = Path(path).read_text(encoding="ascii").splitlines()
    meta = dict(kv.split("=", 1) for kv in text[0].lstrip("# ").split())
    rows = np.array([[float(x) for x in line.split(",")] for line in text[1:] if line])
    grid = Grid(int(meta["nx"]), int(meta["nz"]), float(meta["extent_x"]), float(meta["extent_z"]))
    return ScalarField2D(grid, _from_image_rows(rows), Unit(meta["unit"]))


def write_table_csv(path, header: list[str], columns) -> Path:
    """Plain column table (profiles, series) at full double precision."""
    path = Path(path)
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(repr(float(x)) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path
