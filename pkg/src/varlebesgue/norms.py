"""Modular, Luxemburg norm, generalized Hölder defect and weight-class constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents.field import ExponentField, conjugate_values
from .grid import BallFamily, GridError, GridSpec, SampledFunction, make_grid, window_max

__all__ = [
    "NormError",
    "NormResult",
    "Weight",
    "exponent_values",
    "modular",
    "luxemburg_norm",
    "holder_defect",
    "a1_constant",
    "ap_constant",
    "apq_constant",
    "constant_modular_profile",
    "DEFAULT_TOL",
    "K_HOLDER",
]

DEFAULT_TOL = 1e-8
# generalized Hölder constant accepted by holder_defect checks
K_HOLDER = 4.0


class NormError(ValueError):
    pass


@dataclass(frozen=True)
class NormResult:
    value: float
    bracket: tuple[float, float]
    modular_at_value: float
    iterations: int

    def __float__(self):
        return self.value


def exponent_values(p, grid: GridSpec) -> np.ndarray:
    """Exponent at the cell centers; accepts a field, a scalar or an array."""
    if isinstance(p, ExponentField):
        return p.on(grid)
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.size, float(arr))
    if arr.size != grid.size:
        raise GridError(f"exponent array has {arr.size} values, grid has {grid.size}")
    return arr.ravel()


def modular(f: SampledFunction, p) -> float:
    """Sum of ``|f|^p`` over cells with finite ``p`` plus ``max |f|`` where ``p = inf``."""
    pv = exponent_values(p, f.grid)
    a = np.abs(f.values)
    fin = np.isfinite(pv)
    with np.errstate(over="ignore"):
        total = float(np.sum(a[fin] ** pv[fin]) * f.grid.cell_volume)
    if (~fin).any():
        total += float(a[~fin].max())
    return total


class _Modular:
    """rho(f / lam) restricted to the support of f, evaluated in log space."""

    def __init__(self, a: np.ndarray, pv: np.ndarray, vol: float):
        keep = a > 0
        a, pv = a[keep], pv[keep]
        fin = np.isfinite(pv)
        self.log_a = np.log(a[fin])
        self.p = pv[fin]
        self.sup = float(a[~fin].max()) if (~fin).any() else 0.0
        self.vol = vol

    def __call__(self, lam: float) -> float:
        with np.errstate(over="ignore"):
            s = float(np.sum(np.exp(self.p * (self.log_a - np.log(lam))))) * self.vol
        return s + self.sup / lam


def luxemburg_norm(f: SampledFunction, p, tol: float = DEFAULT_TOL) -> NormResult:
    """``inf{lam > 0 : rho(f / lam) <= 1}`` by geometric bisection.

    The returned value is the upper end of the final bracket, so
    ``modular_at_value <= 1`` always holds.
    """
    if not tol > 0:
        raise NormError("tol must be positive")
    a = np.abs(np.asarray(f.values, dtype=float))
    if not np.all(np.isfinite(a)):
        raise NormError("non-finite samples")
    if not a.any():
        return NormResult(0.0, (0.0, 0.0), 0.0, 0)
    # the norm is homogeneous, so bisect for f / max|f| in log space; this
    # keeps the bracket representable even for subnormal samples
    scale = float(a.max())
    rho = _Modular(a / scale, exponent_values(p, f.grid), f.grid.cell_volume)

    log_hi = np.log1p(f.grid.volume)
    iters = 0
    while rho(np.exp(log_hi)) > 1.0:
        log_hi += np.log(2.0)
        iters += 1
    log_lo = log_hi - 60 * np.log(2.0)
    while rho(np.exp(log_lo)) <= 1.0:
        log_hi, log_lo = log_lo, log_lo - 60 * np.log(2.0)
        iters += 1
    log_tol = np.log1p(tol)
    while log_hi - log_lo > log_tol:
        mid = 0.5 * (log_lo + log_hi)
        if rho(np.exp(mid)) <= 1.0:
            log_hi = mid
        else:
            log_lo = mid
        iters += 1
    lo, hi = np.exp(log_lo), np.exp(log_hi)
    return NormResult(float(hi * scale), (float(lo * scale), float(hi * scale)), rho(hi), iters)


def holder_defect(f: SampledFunction, g: SampledFunction, p, tol: float = DEFAULT_TOL) -> float:
    """``int |fg| / (||f||_p ||g||_p')``; bounded by the generalized Hölder constant."""
    if f.grid != g.grid:
        raise GridError("f and g live on different grids")
    pv = exponent_values(p, f.grid)
    num = float(np.sum(np.abs(f.values * g.values)) * f.grid.cell_volume)
    nf = luxemburg_norm(f, pv, tol).value
    ng = luxemburg_norm(g, conjugate_values(pv), tol).value
    if nf == 0 or ng == 0:
        if num == 0:
            return 0.0
        raise NormError("zero norm with nonzero pairing")  # pragma: no cover
    return num / (nf * ng)


@dataclass(frozen=True, eq=False)
class Weight:
    samples: SampledFunction

    def __post_init__(self):
        if not np.all(self.samples.values > 0):
            raise GridError("a weight must be strictly positive on every cell")

    @classmethod
    def from_function(cls, func, grid: GridSpec) -> "Weight":
        from .grid import sample

        return cls(sample(func, grid))

    @property
    def values(self) -> np.ndarray:
        return self.samples.values

    @property
    def grid(self) -> GridSpec:
        return self.samples.grid


def a1_constant(w: Weight, balls: BallFamily) -> float:
    """Discrete A_1 constant ``max_x Mw(x) / w(x)`` over the family."""
    from .maximal import hl_maximal

    Mw = hl_maximal(w.samples, balls).values
    return float(np.max(Mw / w.values))


def _sup_over_family(cubes: BallFamily, per_center) -> float:
    best = -np.inf
    mask = cubes.center_mask
    for r in cubes.radii:
        vals = per_center(r)
        best = max(best, float(np.max(vals[mask])))
    return best


def ap_constant(w: Weight, p: float, cubes: BallFamily) -> float:
    """``max_Q avg_Q(w) * avg_Q(w^(-1/(p-1)))^(p-1)``."""
    if not p > 1:
        raise NormError("A_p needs p > 1")
    v = w.values.reshape(w.grid.shape)
    dual = v ** (-1.0 / (p - 1.0))

    def per_center(r):
        return cubes.averages(v, r) * cubes.averages(dual, r) ** (p - 1.0)

    return _sup_over_family(cubes, per_center)


def apq_constant(w: Weight, p: float, q: float, cubes: BallFamily) -> float:
    """Muckenhoupt-Wheeden A(p, q) constant over the cube family."""
    if not (p >= 1 and q > 1):
        raise NormError("A(p, q) needs p >= 1 and q > 1")
    v = w.values.reshape(w.grid.shape)
    wq = v**q
    if p == 1:
        inv = 1.0 / v

        def per_center(r):
            return window_max(inv, cubes.rows(r)) * cubes.averages(wq, r) ** (1.0 / q)

    else:
        pp = p / (p - 1.0)
        dual = v ** (-pp)

        def per_center(r):
            return cubes.averages(wq, r) ** (1.0 / q) * cubes.averages(dual, r) ** (1.0 / pp)

    return _sup_over_family(cubes, per_center)


def constant_modular_profile(
    p: ExponentField,
    lam: float,
    radii,
    inner_radius: float = 1.0,
    cells_per_unit: int = 64,
) -> list[tuple[float, float]]:
    """``rho_p(1/lam)`` over ``{inner_radius < |x| <= R}`` for each truncation ``R``.

    Convergence of the profile as ``R`` grows is the numerical trace of
    ``1 in L^p`` on an unbounded set.
    """
    out = []
    for R in radii:
        grid = make_grid(p.dim, [-R, R], max(2, int(round(2 * R * cells_per_unit))))
        pts = grid.points
        outside = np.sqrt(np.sum(pts**2, axis=1)) > inner_radius
        ones = SampledFunction(grid, outside / lam)
        out.append((float(R), modular(ones, p)))
    return out
