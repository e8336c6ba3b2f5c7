"""The fixed deterministic test-function family.

All functions are bounded and supported in the middle half of the grid, in
coordinates ``u = (x - center) / L`` with ``L`` a quarter of the shortest side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..grid import GridSpec, SampledFunction, sample

__all__ = ["SuiteCase", "make_suite", "SUITE_IDS"]


@dataclass(frozen=True)
class SuiteCase:
    """A named test function ``u -> value`` on normalized coordinates."""

    id: str
    shape: Callable[[np.ndarray], np.ndarray]
    smooth: bool = False

    def frame(self, grid: GridSpec) -> tuple[np.ndarray, float]:
        lo = np.array([b[0] for b in grid.bounds])
        hi = np.array([b[1] for b in grid.bounds])
        return (lo + hi) / 2, float(np.min(hi - lo)) / 4

    def func(self, grid: GridSpec) -> Callable:
        """The physical-coordinate function, usable off the grid (e.g. ``f(Ax)``)."""
        center, L = self.frame(grid)
        dim = grid.dim

        def f(x):
            pts = np.asarray(x, dtype=float).reshape(-1, dim)
            return self.shape((pts - center) / L)

        return f

    def on(self, grid: GridSpec) -> SampledFunction:
        return sample(self.func(grid), grid, name=self.id)


def _box(a: float, b: float):
    def f(u):
        return np.all((u >= a) & (u <= b), axis=1).astype(float)

    return f


def _bump(k: float):
    def f(u):
        return np.prod(np.maximum(1.0 - np.abs(u), 0.0) ** k, axis=1)

    return f


def _staircase(u):
    return _box(0.0, 1.0)(u) + _box(0.0, 0.5)(u)


def _oscillatory(u):
    return np.sin(6 * np.pi * u[:, 0]) * _bump(2)(u)


def _off_center(u):
    v = u.copy()
    v[:, 0] = (u[:, 0] - 0.3) / 0.5
    return _bump(2)(v) * (1.0 + 0.8 * (u[:, 0] - 0.3))


_CASES = [
    SuiteCase("chi[0,1]", _box(0.0, 1.0)),
    SuiteCase("chi[0,1/2]", _box(0.0, 0.5)),
    SuiteCase("chi[1/2,1]", _box(0.5, 1.0)),
    SuiteCase("chi[-1,0]", _box(-1.0, 0.0)),
    SuiteCase("staircase", _staircase),
    SuiteCase("bump1", _bump(1), smooth=True),
    SuiteCase("bump2", _bump(2), smooth=True),
    SuiteCase("bump4", _bump(4), smooth=True),
    SuiteCase("oscillatory", _oscillatory, smooth=True),
    SuiteCase("off_center", _off_center, smooth=True),
]

SUITE_IDS = ("standard", "bumps", "indicators")


def make_suite(suite_id: str = "standard") -> list[SuiteCase]:
    """``standard`` (all ten), ``bumps`` (the smooth ones) or ``indicators``."""
    if suite_id == "standard":
        return list(_CASES)
    if suite_id == "bumps":
        return [c for c in _CASES if c.smooth and c.id != "oscillatory"]
    if suite_id == "indicators":
        return [c for c in _CASES if not c.smooth]
    raise ValueError(f"unknown suite {suite_id!r}; expected one of {SUITE_IDS}")
