"""Columnar text format for sampled functions.

::

    # varlebesgue sampled-function v1
    # dim 2
    # bounds -1 1 0 2
    # resolution 4 8
    x1 x2 value
    -0.75 0.125 0.0
    ...

Header lines start with ``#``; ``bounds`` lists ``lo hi`` per axis and
``resolution`` the cell count per axis. Then one line per cell in C order
(last axis fastest): the cell-center coordinates followed by the value.
Coordinates are checked against the grid on read.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .grid import GridError, SampledFunction, make_grid

__all__ = ["FormatError", "write_sampled", "read_sampled", "dumps_sampled", "loads_sampled"]

MAGIC = "# varlebesgue sampled-function v1"


class FormatError(ValueError):
    pass


def dumps_sampled(f: SampledFunction) -> str:
    g = f.grid
    names = ["x"] if g.dim == 1 else [f"x{j + 1}" for j in range(g.dim)]
    lines = [
        MAGIC,
        f"# dim {g.dim}",
        "# bounds " + " ".join(f"{v:.17g}" for b in g.bounds for v in b),
        "# resolution " + " ".join(str(r) for r in g.resolution),
        " ".join(names + ["value"]),
    ]
    for pt, v in zip(g.points, f.values):
        lines.append(" ".join(f"{c:.17g}" for c in pt) + f" {v:.17g}")
    return "\n".join(lines) + "\n"


def loads_sampled(text: str) -> SampledFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != MAGIC:
        raise FormatError("line 1: missing format header")
    header = {}
    k = 1
    while k < len(lines) and lines[k].startswith("#"):
        parts = lines[k][1:].split()
        if parts:
            header[parts[0]] = (parts[1:], k + 1)
        k += 1
    for key in ("dim", "bounds", "resolution"):
        if key not in header:
            raise FormatError(f"header lacks '{key}'")
    try:
        dim = int(header["dim"][0][0])
        b = [float(v) for v in header["bounds"][0]]
        res = [int(v) for v in header["resolution"][0]]
        grid = make_grid(dim, [b[2 * j : 2 * j + 2] for j in range(dim)], res if dim > 1 else res[0])
    except (IndexError, ValueError, GridError) as exc:
        raise FormatError(f"bad header: {exc}") from None
    k += 1  # column names
    body = lines[k:]
    if len(body) != grid.size:
        raise FormatError(f"expected {grid.size} data lines, found {len(body)}")
    try:
        data = np.array([[float(v) for v in ln.split()] for ln in body])
    except ValueError as exc:
        raise FormatError(f"non-numeric data: {exc}") from None
    if data.ndim != 2 or data.shape[1] != dim + 1:
        raise FormatError(f"each data line needs {dim} coordinates and a value")
    tol = 1e-9 * float(np.max(grid.spacing))
    bad = np.flatnonzero(np.any(np.abs(data[:, :dim] - grid.points) > tol, axis=1))
    if bad.size:
        raise FormatError(f"line {k + 1 + int(bad[0])}: coordinates are not the expected cell center")
    return SampledFunction(grid, data[:, dim])


def write_sampled(f: SampledFunction, path) -> None:
    Path(path).write_text(dumps_sampled(f))


def read_sampled(path) -> SampledFunction:
    return loads_sampled(Path(path).read_text())
