"""Empirical verification of the norm inequalities on the test suite.

Each verifier sweeps the suite over a refinement ladder of grids and reports
the max ratio per grid; the verdict comes from the trend of those maxima.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..exponents import ExponentField, check_matrix_compat
from ..exponents.checks import SingularMatrix
from ..grid import GridSpec, SampledFunction, make_grid, sample
from ..maximal import fractional_maximal, fractional_maximal_s, sharp_maximal
from ..norms import NormError, constant_modular_profile, luxemburg_norm
from ..rough import KernelConfig, Quadrature, apply_T_alpha
from .config import FamilyPolicy
from .reports import STABLE_TOL, Case, InequalityReport, trend_verdict
from .suite import SuiteCase

__all__ = [
    "HypothesisError",
    "MaximalOperator",
    "TAlphaOperator",
    "lambda_grid",
    "verify_strong_bound",
    "verify_weak_bound",
    "msharp_ratio_field",
    "verify_msharp_pointwise",
    "image_grid",
    "verify_composition",
    "verify_lemma2",
]

NORM_TOL = 1e-12
LAMBDA_LEVELS = 32


class HypothesisError(ValueError):
    """A hard hypothesis of the inequality being verified does not hold."""


class MaximalOperator:
    """``f -> M_alpha f`` with the family rebuilt for each grid."""

    def __init__(self, alpha: float = 0.0, policy: FamilyPolicy = FamilyPolicy()):
        self.alpha = alpha
        self.policy = policy
        self.name = "M" if alpha == 0 else f"M_{alpha:g}"
        self._families: dict = {}

    def family(self, grid: GridSpec):
        key = (grid.dim, grid.bounds, grid.resolution)
        if key not in self._families:
            self._families[key] = self.policy.build(grid)
        return self._families[key]

    def __call__(self, f: SampledFunction) -> SampledFunction:
        return fractional_maximal(f, self.alpha, self.family(f.grid))


class TAlphaOperator:
    """``f -> T_alpha f`` on the grid of ``f``."""

    def __init__(self, cfg: KernelConfig, quad: Quadrature = Quadrature()):
        self.cfg = cfg
        self.quad = quad
        self.name = "T_alpha"

    def __call__(self, f: SampledFunction) -> SampledFunction:
        return apply_T_alpha(f, self.cfg, self.quad)


def _norm(f: SampledFunction, p, tol: float) -> float:
    return luxemburg_norm(f, p, tol).value


def _sweep(
    check: str,
    cases: Sequence[SuiteCase],
    grids: Sequence[GridSpec],
    per_case: Callable[[SuiteCase, GridSpec], tuple[float, float]],
    stable: float,
    notes: str = "",
) -> InequalityReport:
    if not cases:
        raise ValueError("the suite is empty")
    trend = []
    finest: list[Case] = []
    invalid = []
    for grid in grids:
        rows = []
        for case in cases:
            try:
                lhs, rhs = per_case(case, grid)
            except NormError as exc:
                invalid.append(f"{case.id}@{grid.resolution[0]}: {exc}")
                continue
            if rhs == 0:
                raise ValueError(f"suite function {case.id} vanishes on the grid")
            rows.append(Case(case.id, float(lhs), float(rhs), float(lhs) / float(rhs)))
        if not rows:
            raise ValueError("no valid case on the grid")
        trend.append((int(grid.resolution[0]), max(r.ratio for r in rows)))
        finest = rows
    if invalid:
        notes = (notes + "; " if notes else "") + "invalid: " + "; ".join(invalid)
    verdict = trend_verdict([c for _, c in trend], stable)
    return InequalityReport(check, trend[-1][1], finest, trend, verdict, notes=notes, threshold=stable)


def verify_strong_bound(
    op: Callable[[SampledFunction], SampledFunction],
    p,
    q,
    cases: Sequence[SuiteCase],
    grids: Sequence[GridSpec],
    tol: float = NORM_TOL,
    stable: float = STABLE_TOL,
    check: str = "strong",
) -> InequalityReport:
    """``max_f ||Op f||_q / ||f||_p`` per grid."""

    def per_case(case, grid):
        f = case.on(grid)
        return _norm(op(f), q, tol), _norm(f, p, tol)

    return _sweep(check, cases, grids, per_case, stable, f"op={getattr(op, 'name', 'op')}")


def lambda_grid(top: float, levels: int = LAMBDA_LEVELS) -> np.ndarray:
    """``levels`` geometric levels spanning ``[top * 2**-20, top * 2]``."""
    return top * 2.0 ** np.linspace(-20.0, 1.0, levels)


def weak_lhs(g: SampledFunction, q, tol: float = NORM_TOL, levels: int = LAMBDA_LEVELS) -> float:
    """``max_lambda ||lambda chi_{g > lambda}||_q`` over :func:`lambda_grid`."""
    top = float(np.max(g.values))
    if not top > 0:
        return 0.0
    best = 0.0
    for lam in lambda_grid(top, levels):
        level_set = g.values > lam
        if not level_set.any():
            continue
        best = max(best, _norm(g.with_values(lam * level_set), q, tol))
    return best


def verify_weak_bound(
    op: Callable[[SampledFunction], SampledFunction],
    p,
    q,
    cases: Sequence[SuiteCase],
    grids: Sequence[GridSpec],
    tol: float = NORM_TOL,
    stable: float = STABLE_TOL,
    check: str = "weak",
) -> InequalityReport:
    """``max_f sup_lambda ||lambda chi_{Op f > lambda}||_q / ||f||_p`` per grid."""

    def per_case(case, grid):
        f = case.on(grid)
        return weak_lhs(op(f), q, tol), _norm(f, p, tol)

    return _sweep(check, cases, grids, per_case, stable, f"op={getattr(op, 'name', 'op')}; {LAMBDA_LEVELS} lambda levels")


# ----------------------------------------------------------------------------
# pointwise sharp-function bound
# ----------------------------------------------------------------------------


def _interpolate(g: SampledFunction, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of ``g``; zero outside the domain, clamped inside it."""
    grid = g.grid
    axes = [grid.axis_centers(j) for j in range(grid.dim)]
    interp = RegularGridInterpolator(axes, g.array, method="linear", bounds_error=False, fill_value=0.0)
    inside = grid.contains(points)
    clamped = np.clip(points, [a[0] for a in axes], [a[-1] for a in axes])
    return np.where(inside, interp(clamped), 0.0)


def msharp_ratio_field(
    f: SampledFunction,
    cfg: KernelConfig,
    balls,
    quad: Quadrature = Quadrature(),
    rel_eps: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``M#(T f)(x) / sum_i M_{alpha,s} f(A_i^{-1} x)`` per cell.

    Returns ``(ratio, numerator, denominator)``; ``ratio`` is NaN where the
    denominator is below ``rel_eps`` times its max.
    """
    tf = apply_T_alpha(f, cfg, quad)
    num = sharp_maximal(tf, balls).values
    mas = fractional_maximal_s(f, cfg.alpha, cfg.s, balls)
    pts = f.grid.points
    den = np.zeros(f.grid.size)
    for Ainv in cfg.inverses:
        den += _interpolate(mas, pts @ Ainv.T)
    cut = rel_eps * float(den.max()) if den.size and den.max() > 0 else np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > cut, num / den, np.nan)
    return ratio, num, den


def verify_msharp_pointwise(
    cases: Sequence[SuiteCase],
    cfg: KernelConfig,
    grids: Sequence[GridSpec],
    policy: FamilyPolicy = FamilyPolicy(),
    quad: Quadrature = Quadrature(),
    stable: float = STABLE_TOL,
) -> InequalityReport:
    """Max of the pointwise ratio field over cells and suite, per grid."""
    trend, finest, notes = [], [], []
    inconclusive = False
    for grid in grids:
        balls = policy.build(grid)
        rows = []
        for case in cases:
            f = case.on(grid)
            if not np.any(f.values):
                inconclusive = True
                notes.append(f"{case.id}: f = 0, vacuous")
                continue
            ratio, num, den = msharp_ratio_field(f, cfg, balls, quad)
            support = f.values != 0
            if np.mean(np.isnan(ratio[support])) > 0.5:
                inconclusive = True
                notes.append(f"{case.id}: denominator vanishes on most of the support")
                continue
            k = int(np.nanargmax(ratio))
            rows.append(Case(case.id, float(num[k]), float(den[k]), float(ratio[k])))
        if rows:
            trend.append((int(grid.resolution[0]), max(r.ratio for r in rows)))
            finest = rows
    if not trend:
        return InequalityReport("msharp_pointwise", float("nan"), [], [], "inconclusive", notes="; ".join(notes))
    verdict = "inconclusive" if inconclusive else trend_verdict([c for _, c in trend], stable)
    return InequalityReport(
        "msharp_pointwise", trend[-1][1], finest, trend, verdict, notes="; ".join(notes), threshold=stable
    )


# ----------------------------------------------------------------------------
# composition with a matrix
# ----------------------------------------------------------------------------


def _is_monomial(A: np.ndarray) -> bool:
    nz = A != 0
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def image_grid(grid: GridSpec, A) -> GridSpec:
    """A grid ``G'`` with ``A G' = G``.

    For monomial ``A`` (one nonzero per row and column) cell centers map onto
    cell centers exactly; otherwise ``G'`` is the bounding box of ``A^{-1} G``
    with the same per-axis resolution.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = grid.dim
    if _is_monomial(A):
        bounds = [None] * n
        res = [0] * n
        for i in range(n):
            j = int(np.flatnonzero(A[i])[0])
            lo, hi = grid.bounds[i]
            a, b = sorted((lo / A[i, j], hi / A[i, j]))
            bounds[j] = [a, b]
            res[j] = grid.resolution[i]
        return make_grid(n, bounds, res)
    Ainv = np.linalg.inv(A)
    corners = np.array(np.meshgrid(*[list(b) for b in grid.bounds], indexing="ij")).reshape(n, -1).T
    img = corners @ Ainv.T
    return make_grid(n, [[float(img[:, j].min()), float(img[:, j].max())] for j in range(n)], list(grid.resolution))


def _p_minus(p, grid: GridSpec) -> float:
    if isinstance(p, ExponentField):
        return float(np.min(p.on(grid)))
    return float(np.min(np.asarray(p, dtype=float)))


def verify_composition(
    p: ExponentField,
    A,
    mode: str,
    cases: Sequence[SuiteCase],
    grids: Sequence[GridSpec],
    tol: float = NORM_TOL,
    bound_tol: float = 1e-6,
    stable: float = STABLE_TOL,
    audit: bool = True,
) -> InequalityReport:
    """Norms of compositions with a matrix.

    ``mode="="``: ``p(Ax) = p(x)`` is required and every case must satisfy
    ``||f o A||_p <= max(1, D^(1/p_-)) ||f||_p (1 + bound_tol)`` with
    ``D = |det A^-1|``; the verdict is ``pass``/``fail``.
    ``mode="<="``: ``p(Ax) <= p(x)`` is required and the report carries the
    empirical constant of ``||f o A^-1||_p / ||f||_p`` with a trend verdict.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if mode not in ("=", "<="):
        raise ValueError(f"mode must be '=' or '<=', got {mode!r}")
    if audit:
        rep = check_matrix_compat(p, A, mode)
        if not rep.passed:
            raise HypothesisError(f"p(Ax) {mode} p(x) fails: {rep.notes}")
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        raise SingularMatrix("matrix is singular") from None
    D = abs(np.linalg.det(Ainv))
    M = A if mode == "=" else Ainv  # compose f with M

    def per_case(case, grid):
        f = case.func(grid)
        g_grid = image_grid(grid, M)
        pts = g_grid.points
        composed = SampledFunction(g_grid, f(pts @ M.T))
        return _norm(composed, p, tol), _norm(case.on(grid), p, tol)

    exact = "exact" if _is_monomial(M) else "bounding-box"
    rep = _sweep(f"composition{mode}", cases, grids, per_case, stable, f"D={D:.6g}; image grid {exact}")
    if mode == "<=":
        return rep
    bound = max(1.0, D ** (1.0 / _p_minus(p, grids[-1])))
    ok = all(c <= bound * (1 + bound_tol) for _, c in rep.trend)
    rep.verdict = "pass" if ok else "fail"
    rep.clauses = {"explicit bound": "pass" if ok else "fail"}
    rep.notes += f"; bound max(1, D^(1/p_-)) = {bound:.12g}"
    return rep


def verify_lemma2(
    p: ExponentField,
    lam: float,
    radii,
    inner_radius: float = 1.0,
    cells_per_unit: int = 64,
    stable: float = STABLE_TOL,
) -> InequalityReport:
    """Modular of ``1/lam`` on ``{inner_radius < |x| <= R}`` as ``R`` grows.

    Convergence of the truncations is the numerical trace of ``1 in L^p``.
    The verdict compares the two largest truncations only: early radii still
    collect most of the mass, so only the tail says whether the series closes.
    """
    prof = constant_modular_profile(p, lam, radii, inner_radius, cells_per_unit)
    cases = [Case(f"R={R:g}", v, 1.0, v) for R, v in prof]
    trend = [(int(round(R)), v) for R, v in prof]
    verdict = trend_verdict([v for _, v in trend[-2:]], stable)
    return InequalityReport(
        "lemma2", max(c.ratio for c in cases), cases, trend, verdict,
        notes=f"lambda={lam:g}; trend is over truncation radius; verdict from the last two", threshold=stable,
    )
