"""CSV readers for the solver's artifact files."""

import csv
from pathlib import Path

import numpy as np

from .errors import FigureError


def read_columns(path, required: list[str]) -> dict[str, np.ndarray]:
    """Read a headed CSV into float arrays, one per column.

    Any column listed in `required` but absent from the header is reported
    by name. Empty cells and "nan" become NaN.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FigureError(f"{path}: file is empty")
            rows = [row for row in reader if row]
    except OSError as e:
        raise FigureError(f"{path}: {e}")
    missing = [c for c in required if c not in header]
    if missing:
        raise FigureError(f"{path}: missing column(s): {', '.join(missing)}")

    out = {}
    for j, name in enumerate(header):
        cells = []
        for i, row in enumerate(rows):
            cell = row[j].strip() if j < len(row) else ""
            if cell == "":
                cells.append(np.nan)
                continue
            try:
                cells.append(float(cell))
            except ValueError:
                raise FigureError(f"{path}: row {i + 2}, column '{name}': not a number: {cell!r}")
        out[name] = np.array(cells, dtype=float)
    return out


def read_grid(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a field snapshot into (x, y, Z) with Z shaped (ny, nx).

    The snapshot must cover a complete tensor lattice: every combination of
    the distinct x and y values exactly once.
    """
    cols = read_columns(path, ["x", "y", "abs_u"])
    x, y, v = cols["x"], cols["y"], cols["abs_u"]
    xs = np.unique(x)
    ys = np.unique(y)
    if xs.size * ys.size != x.size:
        raise FigureError(
            f"{path}: ragged grid: {x.size} rows cannot tile "
            f"{xs.size} x-values by {ys.size} y-values"
        )
    order = np.lexsort((x, y))  # y-major, x fastest
    Z = v[order].reshape(ys.size, xs.size)
    return xs, ys, Z
