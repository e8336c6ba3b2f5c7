"""Exponent fields p(.) with values in [1, inf]."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable

import numpy as np

from ..grid import GridSpec
from .expression import Expression

__all__ = [
    "ExponentError",
    "ExponentOverflow",
    "OutOfDomain",
    "ExponentField",
    "eval_exponent",
    "conjugate",
    "sobolev_shift",
    "scale_exponent",
    "conjugate_values",
]

# essential inf/sup are taken on a probe grid this many times finer
PROBE_FACTOR = 4


class ExponentError(ValueError):
    pass


class ExponentOverflow(ExponentError):
    pass


class OutOfDomain(ExponentError):
    pass


def conjugate_values(p: np.ndarray) -> np.ndarray:
    """Pointwise conjugate exponent with the 1 <-> inf convention."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = p / (p - 1.0)
    out = np.where(p == 1.0, np.inf, out)
    return np.where(np.isinf(p), 1.0, out)


@dataclass(frozen=True, eq=False)
class ExponentField:
    """An exponent function on R^dim, optionally attached to a working domain.

    ``func`` maps an ``(N, dim)`` array of points to ``N`` values in
    ``[1, inf]``. ``p_infinity`` is the asymptotic value used by the N_inf and
    LH_inf checkers. ``p_minus``/``p_plus`` are min/max over a probe grid
    ``PROBE_FACTOR`` times finer than ``domain``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    dim: int
    description: str = ""
    domain: GridSpec | None = None
    p_infinity: float | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_expression(cls, source: str, dim: int = 1, **kw) -> "ExponentField":
        return cls(Expression(source, dim), dim, source, **kw)

    @classmethod
    def constant(cls, value: float, dim: int = 1, **kw) -> "ExponentField":
        value = float(value)
        kw.setdefault("p_infinity", value)

        def const(pts, _v=value):
            return np.full(len(np.atleast_2d(pts).reshape(-1, dim)), _v)

        return cls(const, dim, f"{value:g}", extra={"constant": value}, **kw)

    @property
    def is_constant(self) -> bool:
        return "constant" in self.extra

    def with_domain(self, grid: GridSpec) -> "ExponentField":
        return replace(self, domain=grid)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        vals = np.asarray(self.func(pts), dtype=float).reshape(-1)
        if np.any(np.isnan(vals)) or np.any(vals < 1.0 - 1e-12):
            bad = pts[np.isnan(vals) | (vals < 1.0 - 1e-12)][0]
            raise ExponentError(f"{self.description or 'exponent'} leaves [1, inf] at {bad}")
        return np.maximum(vals, 1.0)

    def on(self, grid: GridSpec) -> np.ndarray:
        """Values at the cell centers of ``grid``."""
        return self(grid.points)

    @cached_property
    def _probe_bounds(self) -> tuple[float, float]:
        if self.domain is None:
            raise ExponentError("p_minus/p_plus need a domain; use with_domain(grid)")
        vals = self.on(self.domain.refine(PROBE_FACTOR))
        return float(vals.min()), float(vals.max())

    @property
    def p_minus(self) -> float:
        return self._probe_bounds[0]

    @property
    def p_plus(self) -> float:
        return self._probe_bounds[1]


def eval_exponent(p: ExponentField, x) -> float:
    """Value of ``p`` at a single point; ``inf`` marks membership in the set where p = inf."""
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if pt.size != p.dim:
        raise OutOfDomain(f"point {x} is not in R^{p.dim}")
    if p.domain is not None and not p.domain.contains(pt.reshape(1, -1))[0]:
        raise OutOfDomain(f"point {x} lies outside the domain {p.domain.bounds}")
    return float(p(pt.reshape(1, -1))[0])


def conjugate(p: ExponentField) -> ExponentField:
    """p' with 1/p + 1/p' = 1 pointwise."""

    def conj(pts, _p=p):
        return conjugate_values(_p(pts))

    p_inf = None if p.p_infinity is None else float(conjugate_values(p.p_infinity))
    extra = {}
    if p.is_constant:
        extra["constant"] = float(conjugate_values(p.extra["constant"]))
    return ExponentField(conj, p.dim, f"({p.description})'", p.domain, p_inf, extra)


def sobolev_shift(p: ExponentField, alpha: float, n: int) -> ExponentField:
    """q with 1/q = 1/p - alpha/n pointwise.

    Raises :class:`ExponentOverflow` unless ``p_plus < n / alpha``.
    """
    if not 0 <= alpha < n:
        raise ExponentError(f"need 0 <= alpha < n, got alpha={alpha}, n={n}")
    if alpha == 0:
        return p
    limit = n / alpha
    if p.domain is not None:
        p_plus = p.p_plus
    elif p.is_constant:
        p_plus = p.extra["constant"]
    else:
        raise ExponentError("sobolev_shift needs p_plus; attach a domain first")
    if p_plus >= limit:
        raise ExponentOverflow(f"p_plus = {p_plus:g} >= n/alpha = {limit:g}")
    shift = alpha / n

    def q(pts, _p=p):
        return 1.0 / (1.0 / _p(pts) - shift)

    p_inf = None
    if p.p_infinity is not None and p.p_infinity < limit:
        p_inf = 1.0 / (1.0 / p.p_infinity - shift)
    extra = {}
    if p.is_constant:
        extra["constant"] = 1.0 / (1.0 / p.extra["constant"] - shift)
    return ExponentField(q, p.dim, f"sobolev({p.description}; {alpha:g}/{n})", p.domain, p_inf, extra)


def scale_exponent(p: ExponentField, factor: float) -> ExponentField:
    """``factor * p``; used for q/s and the N_inf scaling property."""
    if factor <= 0:
        raise ExponentError("scale factor must be positive")

    def scaled(pts, _p=p):
        return factor * _p(pts)

    p_inf = None if p.p_infinity is None else factor * p.p_infinity
    extra = {"constant": factor * p.extra["constant"]} if p.is_constant else {}
    return ExponentField(scaled, p.dim, f"{factor:g}*({p.description})", p.domain, p_inf, extra)
