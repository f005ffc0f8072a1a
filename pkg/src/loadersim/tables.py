"""1-D lookup tables with clamped linear interpolation, and their CSV forms."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class TableError(ValueError):
    pass


@dataclass(frozen=True)
class Table:
    """Piecewise-linear table y(x); lookups outside the grid clamp to the end values."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __init__(self, x: Sequence[float], y: Sequence[float]):
        xs = tuple(float(v) for v in x)
        ys = tuple(float(v) for v in y)
        if len(xs) != len(ys):
            raise TableError(f"table length mismatch: {len(xs)} x vs {len(ys)} y")
        if len(xs) < 2:
            raise TableError("table needs at least two points")
        if not all(np.isfinite(xs)) or not all(np.isfinite(ys)):
            raise TableError("table contains non-finite values")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise TableError("table grid must be strictly increasing")
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)

    def __call__(self, v):
        out = np.interp(v, self.x, self.y)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def xmin(self) -> float:
        return self.x[0]

    @property
    def xmax(self) -> float:
        return self.x[-1]

    def scaled(self, factor: float) -> "Table":
        return Table(self.x, [factor * v for v in self.y])

    def is_nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.y, self.y[1:]))

    def is_nonincreasing(self) -> bool:
        return all(b <= a for a, b in zip(self.y, self.y[1:]))


def read_columns(path: str | Path, ncols: int) -> list[list[float]]:
    """Read a CSV file with a header row and ``ncols`` numeric columns.

    Lines starting with ``#`` are metadata and skipped.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.lstrip().startswith("#")]
    rows = [r for r in csv.reader(lines) if r and any(c.strip() for c in r)]
    if not rows:
        raise TableError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    try:
        [float(c) for c in header]
    except ValueError:
        pass
    else:
        raise TableError(f"{path}: header row required")
    cols: list[list[float]] = [[] for _ in range(ncols)]
    for lineno, r in enumerate(body, start=2):
        if len(r) != ncols:
            raise TableError(f"{path}:{lineno}: expected {ncols} columns, got {len(r)}")
        try:
            for i, c in enumerate(r):
                cols[i].append(float(c))
        except ValueError as exc:
            raise TableError(f"{path}:{lineno}: {exc}") from None
    return cols


def write_columns(path: str | Path, header: Sequence[str], cols: Sequence[Sequence[float]],
                  comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
