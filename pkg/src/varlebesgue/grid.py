"""Truncated grids, sampled functions, midpoint quadrature and ball families.

Every other module computes on these objects. A grid is a tensor product of
uniform cells over a box in dimension 1 or 2; a sampled function carries one
value per cell center. Functions are taken to vanish outside the box.

Ball and cube averages use the discrete measure of ``B ∩ domain`` obtained by
counting member cells, so that numerator and denominator see the same cells.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.ndimage import maximum_filter1d

__all__ = [
    "GridError",
    "InvalidDimension",
    "DegenerateBounds",
    "EmptyIntersection",
    "EmptyFamily",
    "EmptyIntersectionWarning",
    "GridSpec",
    "SampledFunction",
    "Ball",
    "BallFamily",
    "make_grid",
    "sample",
    "integrate",
    "ball_family",
    "average_over_ball",
    "ball_mask",
    "footprint_rows",
    "window_sum",
    "window_max",
]

# membership slack, in units of the smallest cell width
_MEMBER_EPS = 1e-9


class GridError(ValueError):
    pass


class InvalidDimension(GridError):
    pass


class DegenerateBounds(GridError):
    pass


class EmptyIntersection(GridError):
    pass


class EmptyFamily(GridError):
    pass


class EmptyIntersectionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid on ``prod [lo, hi]``."""

    dim: int
    bounds: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidDimension(f"dim must be 1 or 2, got {self.dim}")
        if len(self.bounds) != self.dim or len(self.resolution) != self.dim:
            raise InvalidDimension("bounds/resolution do not match dim")
        for lo, hi in self.bounds:
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise DegenerateBounds(f"need lo < hi, got [{lo}, {hi}]")
        for n in self.resolution:
            if int(n) != n or n < 2:
                raise GridError(f"resolution must be an integer >= 2, got {n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(n) for n in self.resolution)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / n for (lo, hi), n in zip(self.bounds, self.resolution)])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.bounds]))

    def axis_centers(self, axis: int) -> np.ndarray:
        lo, _ = self.bounds[axis]
        h = self.spacing[axis]
        return lo + (np.arange(self.shape[axis]) + 0.5) * h

    @property
    def points(self) -> np.ndarray:
        """Cell centers as an ``(size, dim)`` array in C order."""
        axes = [self.axis_centers(k) for k in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.dim, self.bounds, tuple(n * factor for n in self.shape))

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.ones(len(pts), dtype=bool)
        for k, (lo, hi) in enumerate(self.bounds):
            inside &= (pts[:, k] >= lo) & (pts[:, k] <= hi)
        return inside

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "bounds": [list(b) for b in self.bounds],
            "resolution": list(self.shape),
        }


def make_grid(dim: int, bounds, resolution) -> GridSpec:
    """Build a :class:`GridSpec`.

    ``bounds`` may be a single ``[lo, hi]`` pair (reused on every axis) or one
    pair per axis; ``resolution`` an int or one count per axis.

    >>> make_grid(1, [0, 1], 4).axis_centers(0)
    array([0.125, 0.375, 0.625, 0.875])
    """
    if dim not in (1, 2):
        raise InvalidDimension(f"dim must be 1 or 2, got {dim}")
    b = np.asarray(bounds, dtype=float)
    if b.shape == (2,):
        b = np.tile(b, (dim, 1))
    if b.shape != (dim, 2):
        raise InvalidDimension(f"bounds of shape {b.shape} do not fit dim={dim}")
    res = np.atleast_1d(np.asarray(resolution))
    if res.size == 1:
        res = np.repeat(res, dim)
    if res.size != dim:
        raise InvalidDimension("resolution does not fit dim")
    return GridSpec(
        dim,
        tuple((float(lo), float(hi)) for lo, hi in b),
        tuple(int(n) for n in res),
    )


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Real values at the cell centers of ``grid`` (flat, C order)."""

    grid: GridSpec
    values: np.ndarray
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size != self.grid.size:
            raise GridError(f"expected {self.grid.size} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise GridError("sampled values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def array(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def with_values(self, values, **metadata) -> "SampledFunction":
        return SampledFunction(self.grid, values, metadata)

    def __abs__(self):
        return self.with_values(np.abs(self.values))

    def __neg__(self):
        return self.with_values(-self.values)

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            _same_grid(self, other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            _same_grid(self, other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__


def _same_grid(f: SampledFunction, g: SampledFunction):
    if f.grid != g.grid:
        raise GridError("sampled functions live on different grids")


def sample(func, grid: GridSpec, **metadata) -> SampledFunction:
    """Sample a callable ``func(points) -> values`` at the cell centers."""
    pts = grid.points
    vals = np.asarray(func(pts if grid.dim > 1 else pts[:, 0]), dtype=float)
    return SampledFunction(grid, np.broadcast_to(vals, (grid.size,)).copy(), metadata)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        c = tuple(float(x) for x in np.atleast_1d(self.center))
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise GridError(f"radius must be positive, got {self.radius}")

    def contains(self, points, shape: str = "ball", slack: float = 0.0) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, len(self.center))
        d = pts - np.asarray(self.center)
        r = self.radius + slack
        if shape == "cube":
            return np.all(np.abs(d) <= r, axis=1)
        return np.sum(d * d, axis=1) <= r * r

    def measure(self, shape: str = "ball") -> float:
        n = len(self.center)
        if shape == "cube":
            return (2 * self.radius) ** n
        return 2 * self.radius if n == 1 else np.pi * self.radius**2


def ball_mask(grid: GridSpec, B: Ball, shape: str = "ball") -> np.ndarray:
    """Boolean mask of cells whose center lies in ``B``."""
    slack = _MEMBER_EPS * float(grid.spacing.min())
    return B.contains(grid.points, shape, slack)


def integrate(f: SampledFunction, region: Ball | None = None, shape: str = "ball") -> float:
    """Midpoint rule over all cells, or over cells whose center lies in ``region``.

    An empty intersection returns 0 and emits :class:`EmptyIntersectionWarning`.
    """
    vol = f.grid.cell_volume
    if region is None:
        return float(np.sum(f.values) * vol)
    mask = ball_mask(f.grid, region, shape)
    if not mask.any():
        warnings.warn("region does not meet any cell center", EmptyIntersectionWarning, stacklevel=2)
        return 0.0
    return float(np.sum(f.values[mask]) * vol)


def average_over_ball(f: SampledFunction, B: Ball, shape: str = "ball") -> float:
    """Mean of ``|f|`` over ``B ∩ domain`` with the cell-counting measure."""
    mask = ball_mask(f.grid, B, shape)
    count = int(mask.sum())
    if count == 0:
        raise EmptyIntersection(f"{B} contains no cell center")
    a = np.abs(f.values[mask])
    # deviations from a reference sample keep constant inputs exact
    return float(a[0] + np.sum(a - a[0]) / count)


# ----------------------------------------------------------------------------
# ball families and the window kernels behind every brute-force supremum
# ----------------------------------------------------------------------------


def footprint_rows(grid: GridSpec, radius: float, shape: str = "ball") -> list[tuple[int, int]]:
    """Index footprint of a ball/cube centred on a cell.

    Returned as ``(b, a_b)`` pairs: the cells at offset ``(a, b)`` with
    ``|a| <= a_b`` belong to the footprint (axis 0 offset ``a``, axis 1 offset
    ``b``). In dimension 1 the only row is ``b = 0``.
    """
    h = grid.spacing
    slack = _MEMBER_EPS * float(h.min())
    r = radius + slack
    nx = grid.shape[0]
    if grid.dim == 1:
        return [(0, min(int(np.floor(r / h[0])), nx - 1))]
    # offsets beyond the grid never meet a cell; clip them away
    kb = min(int(np.floor(r / h[1])), grid.shape[1] - 1)
    rows = []
    for b in range(-kb, kb + 1):
        if shape == "cube":
            a = int(np.floor(r / h[0]))
        else:
            rem = r * r - (b * h[1]) ** 2
            if rem < 0:
                continue
            a = int(np.floor(np.sqrt(rem) / h[0]))
        rows.append((b, min(a, nx - 1)))
    return rows


def _as2d(arr: np.ndarray) -> np.ndarray:
    return arr.reshape(arr.shape[0], -1)


def _shift_axis1(src: np.ndarray, b: int, fill: float) -> np.ndarray:
    # out[:, j] = src[:, j + b]
    out = np.full_like(src, fill)
    ny = src.shape[1]
    if b >= 0:
        if b < ny:
            out[:, : ny - b] = src[:, b:]
    elif -b < ny:
        out[:, -b:] = src[:, : ny + b]
    return out


def _sliding_sum(a2: np.ndarray, half: int) -> np.ndarray:
    """``out[i] = sum(a2[i - half : i + half + 1])`` along axis 0, zero padded.

    Built from power-of-two block sums, so every window is a sum of its own
    entries only and the rounding error is relative to the window, not to a
    running total.
    """
    nx = a2.shape[0]
    width = 2 * half + 1
    block = np.concatenate([np.zeros((half,) + a2.shape[1:]), a2, np.zeros((half,) + a2.shape[1:])])
    out = np.zeros_like(a2)
    offset, size = 0, 1
    while width:
        if width & 1:
            out += block[offset : offset + nx]
            offset += size
        width >>= 1
        if width:
            block = block[:-size] + block[size:]
            size *= 2
    return out


def window_sum(arr: np.ndarray, rows: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum of ``arr`` over the footprint centred at every cell (zero padding)."""
    a2 = _as2d(np.asarray(arr, dtype=float))
    lines: dict[int, np.ndarray] = {}
    out = np.zeros_like(a2)
    for b, a in rows:
        if a not in lines:
            lines[a] = _sliding_sum(a2, a)
        out += _shift_axis1(lines[a], b, 0.0)
    return out.reshape(np.shape(arr))


def window_max(arr: np.ndarray, rows: Sequence[tuple[int, int]]) -> np.ndarray:
    """Max of ``arr`` over the footprint centred at every cell (``-inf`` padding).

    Footprints are symmetric, so this is also the max over all centres whose
    ball contains the cell.
    """
    a2 = _as2d(np.asarray(arr, dtype=float))
    lines: dict[int, np.ndarray] = {}
    out = np.full_like(a2, -np.inf)
    for b, a in rows:
        if a not in lines:
            lines[a] = maximum_filter1d(a2, size=2 * a + 1, axis=0, mode="constant", cval=-np.inf)
        np.maximum(out, _shift_axis1(lines[a], b, -np.inf), out=out)
    return out.reshape(np.shape(arr))


@dataclass(frozen=True)
class BallFamily:
    """Balls (or cubes) centred at every ``stride``-th cell with dyadic radii."""

    grid: GridSpec
    radii: tuple[float, ...]
    stride: int = 1
    shape: str = "ball"

    def __post_init__(self):
        if self.shape not in ("ball", "cube"):
            raise GridError(f"shape must be 'ball' or 'cube', got {self.shape!r}")
        if not self.radii or min(self.radii) <= 0:
            raise EmptyFamily("family needs at least one positive radius")
        if self.stride < 1 or any(self.stride > n for n in self.grid.shape):
            raise EmptyFamily(f"stride {self.stride} leaves no centres on {self.grid.shape}")
        object.__setattr__(self, "radii", tuple(sorted(float(r) for r in self.radii)))

    @property
    def center_mask(self) -> np.ndarray:
        mask = np.zeros(self.grid.shape, dtype=bool)
        sl = tuple(slice(0, None, self.stride) for _ in self.grid.shape)
        mask[sl] = True
        return mask

    @property
    def centers(self) -> np.ndarray:
        return self.grid.points[self.center_mask.ravel()]

    def __len__(self) -> int:
        return int(self.center_mask.sum()) * len(self.radii)

    def __iter__(self) -> Iterator[Ball]:
        return iter(self.balls)

    @property
    def balls(self) -> list[Ball]:
        out = [Ball(tuple(c), r) for c in self.centers for r in self.radii]
        return sorted(out, key=lambda B: (B.center, B.radius))

    def rows(self, radius: float) -> list[tuple[int, int]]:
        return footprint_rows(self.grid, radius, self.shape)

    def counts(self, radius: float) -> np.ndarray:
        """Number of member cells of the ball of ``radius`` at each cell."""
        return window_sum(np.ones(self.grid.shape), self.rows(radius))

    def measures(self, radius: float) -> np.ndarray:
        return self.counts(radius) * self.grid.cell_volume

    def averages(self, values: np.ndarray, radius: float) -> np.ndarray:
        """Mean of ``values`` over each family ball of ``radius``.

        Non-centre cells get ``-inf`` so they drop out of any max.
        """
        v = np.asarray(values, dtype=float).reshape(self.grid.shape)
        rows = self.rows(radius)
        avg = window_sum(v, rows) / window_sum(np.ones(self.grid.shape), rows)
        return np.where(self.center_mask, avg, -np.inf)

    def sup_containing(self, per_ball: np.ndarray, radius: float) -> np.ndarray:
        """Max of a per-centre quantity over the balls of ``radius`` containing each cell."""
        return window_max(per_ball, self.rows(radius))

    def coverage(self) -> np.ndarray:
        """Whether each cell lies in at least one family ball."""
        ind = np.where(self.center_mask, 1.0, -np.inf)
        return self.sup_containing(ind, self.radii[-1]) > 0

    def as_dict(self) -> dict:
        return {"radii": list(self.radii), "stride": self.stride, "shape": self.shape}


def ball_family(
    grid: GridSpec,
    levels: int,
    r_min: float,
    r_max: float = np.inf,
    center_stride: int = 1,
    shape: str = "ball",
) -> BallFamily:
    """Family with radii ``r_min * 2**k`` (``k < levels``) capped at ``r_max``."""
    if levels < 1:
        raise GridError("need at least one dyadic level")
    if not 0 < r_min <= r_max:
        raise GridError(f"need 0 < r_min <= r_max, got {r_min}, {r_max}")
    radii = [r_min * 2.0**k for k in range(levels)]
    radii = [r for r in radii if r <= r_max * (1 + 1e-12)]
    if center_stride > min(grid.shape):
        raise EmptyFamily(f"stride {center_stride} exceeds the resolution {grid.shape}")
    return BallFamily(grid, tuple(radii), center_stride, shape)
