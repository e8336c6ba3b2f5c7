"""Brute-force maximal operators over a :class:`BallFamily`.

All suprema run over the finite family only. Ball averages come from the
family's window sums, so every operator here sees exactly the same averages;
that is what makes pointwise comparisons between them (``M# f <= 2 M f``,
``M_{a,s}`` monotone in ``s``) hold without tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import BallFamily, GridError, GridSpec, SampledFunction, sample
from .norms import DEFAULT_TOL, luxemburg_norm

__all__ = [
    "MaximalConfig",
    "NoCoveringBall",
    "hl_maximal",
    "fractional_maximal",
    "fractional_maximal_s",
    "sharp_maximal",
    "rubio_de_francia",
    "estimate_maximal_opnorm",
    "default_opnorm_probes",
]


class NoCoveringBall(GridError):
    """Some cell lies in no ball of the family."""


def _sup(per_radius, balls: BallFamily) -> np.ndarray:
    out = np.full(balls.grid.shape, -np.inf)
    for r in balls.radii:
        np.maximum(out, balls.sup_containing(per_radius(r), r), out=out)
    if np.any(out == -np.inf):
        raise NoCoveringBall(f"{int(np.sum(out == -np.inf))} cells are not covered by the family")
    return out


def hl_maximal(f: SampledFunction, balls: BallFamily) -> SampledFunction:
    """``Mf(x) = max_{B ∋ x} avg_B |f|``."""
    v = np.abs(f.array)
    return f.with_values(_sup(lambda r: balls.averages(v, r), balls).ravel())


def fractional_maximal(f: SampledFunction, alpha: float, balls: BallFamily) -> SampledFunction:
    """``M_alpha f(x) = max_{B ∋ x} |B|^(alpha/n) avg_B |f|``.

    ``|B|`` is the counted measure of ``B ∩ domain``.
    """
    n = f.grid.dim
    if not 0 <= alpha < n:
        raise ValueError(f"need 0 <= alpha < n, got {alpha}")
    if alpha == 0:
        return hl_maximal(f, balls)
    v = np.abs(f.array)

    def per_radius(r):
        return balls.averages(v, r) * balls.measures(r) ** (alpha / n)

    return f.with_values(_sup(per_radius, balls).ravel())


def fractional_maximal_s(f: SampledFunction, alpha: float, s: float, balls: BallFamily) -> SampledFunction:
    """``M_{alpha,s} f = (M_{alpha s} |f|^s)^(1/s)``."""
    if s < 1:
        raise ValueError(f"need s >= 1, got {s}")
    if not 0 <= alpha * s < f.grid.dim:
        raise ValueError(f"need 0 <= alpha*s < n, got alpha*s = {alpha * s}")
    inner = fractional_maximal(f.with_values(np.abs(f.values) ** s), alpha * s, balls)
    return f.with_values(inner.values ** (1.0 / s))


def _offsets(rows):
    for b, a in rows:
        for da in range(-a, a + 1):
            yield da, b


def _shifted(arr: np.ndarray, da: int, db: int, fill: float) -> np.ndarray:
    # out[i, j] = arr[i + da, j + db]
    out = np.full_like(arr, fill)
    nx, ny = arr.shape
    xs = slice(max(0, -da), min(nx, nx - da))
    ys = slice(max(0, -db), min(ny, ny - db))
    xd = slice(max(0, da), min(nx, nx + da))
    yd = slice(max(0, db), min(ny, ny + db))
    out[xs, ys] = arr[xd, yd]
    return out


def sharp_maximal(f: SampledFunction, balls: BallFamily, center: str = "abs_mean") -> SampledFunction:
    """Sharp maximal function, brute force over the family.

    ``center="abs_mean"`` subtracts the ball mean of ``|f|`` (as in
    ``avg_B |f - avg_B |f||``); ``center="mean"`` is the classical variant
    with the mean of ``f``.

    With ``a = avg_B |f|`` the first variant is evaluated through the identity
    ``avg_B |f - a| = 2a - 2 avg_B min(f^+, a)``, which keeps ``M# f <= 2 Mf``
    exact in floating point.
    """
    if center not in ("abs_mean", "mean"):
        raise ValueError(f"center must be 'abs_mean' or 'mean', got {center!r}")
    shape2 = (f.grid.shape[0], -1)
    v = f.array.reshape(shape2)
    absv = np.abs(v)
    pos = np.maximum(v, 0.0)
    mask2 = balls.center_mask.reshape(shape2)

    def per_radius(r):
        rows = balls.rows(r)
        counts = balls.counts(r).reshape(shape2)
        if center == "abs_mean":
            a = balls.averages(absv, r).reshape(shape2)
        else:
            a = balls.averages(v, r).reshape(shape2)
        a_c = np.where(mask2, a, 0.0)
        acc = np.zeros_like(v)
        for da, db in _offsets(rows):
            sh = _shifted(pos if center == "abs_mean" else v, da, db, np.nan)
            valid = ~np.isnan(sh)
            if center == "abs_mean":
                term = np.minimum(sh, a_c)
            else:
                term = np.maximum(a_c - sh, 0.0)
            acc += np.where(valid, term, 0.0)
        m = acc / counts
        osc = np.maximum(2.0 * a_c - 2.0 * m, 0.0) if center == "abs_mean" else 2.0 * m
        return np.where(mask2, osc, -np.inf).reshape(f.grid.shape)

    return f.with_values(_sup(per_radius, balls).ravel())


@dataclass(frozen=True)
class MaximalConfig:
    balls: BallFamily
    flavor: str = "hl"
    alpha: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        if self.flavor not in ("hl", "fractional", "fractional_s", "sharp"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if not 0 <= self.alpha < self.balls.grid.dim:
            raise ValueError("alpha must lie in [0, n)")
        if self.s < 1:
            raise ValueError("s must be >= 1")

    def apply(self, f: SampledFunction) -> SampledFunction:
        if self.flavor == "hl":
            return hl_maximal(f, self.balls)
        if self.flavor == "fractional":
            return fractional_maximal(f, self.alpha, self.balls)
        if self.flavor == "fractional_s":
            return fractional_maximal_s(f, self.alpha, self.s, self.balls)
        return sharp_maximal(f, self.balls)


def rubio_de_francia(
    h: SampledFunction, opnorm_estimate: float, terms: int, balls: BallFamily
) -> SampledFunction:
    """Partial sum ``sum_{k=0}^{K} M^k |h| / (2 ||M||)^k`` with ``K = terms``.

    ``metadata["tail_bound"]`` holds ``||M|| max(M^K h) / (2 ||M||)^K``, a proxy
    for the dropped tail.
    """
    if opnorm_estimate < 1:
        raise ValueError("operator norm estimate must be >= 1")
    if terms < 1:
        raise ValueError("need at least one term")
    c = 2.0 * opnorm_estimate
    term = np.abs(h.values)
    total = term.copy()
    for k in range(1, terms + 1):
        term = hl_maximal(h.with_values(term), balls).values
        total = total + term / c**k
    tail = opnorm_estimate * float(term.max()) / c**terms
    return SampledFunction(h.grid, total, {"tail_bound": tail, "terms": terms, "opnorm": opnorm_estimate})


def default_opnorm_probes(grid: GridSpec) -> list[SampledFunction]:
    """Indicators of dyadic sub-boxes of the domain plus two smooth bumps."""
    lo = np.array([b[0] for b in grid.bounds])
    hi = np.array([b[1] for b in grid.bounds])
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    probes = []
    for k in range(1, 5):
        w = half * 2.0**-k

        def box(x, _w=w):
            x = np.asarray(x).reshape(len(x), -1)
            return np.all(np.abs(x - mid) <= _w, axis=1).astype(float)

        probes.append(sample(box, grid, name=f"box{k}"))
    for width, power in ((0.5, 2), (0.25, 4)):

        def bump(x, _w=width, _p=power):
            x = np.asarray(x).reshape(len(x), -1)
            t = np.sqrt(np.sum(((x - mid) / half) ** 2, axis=1)) / _w
            return np.maximum(1.0 - t, 0.0) ** _p

        probes.append(sample(bump, grid, name=f"bump{power}"))
    return probes


def estimate_maximal_opnorm(
    p, probes, balls: BallFamily, safety: float = 2.0, tol: float = DEFAULT_TOL
) -> float:
    """``safety * max ||Mf||_p / ||f||_p`` over the probes, floored at 1."""
    probes = list(probes)
    if not probes:
        raise ValueError("need at least one probe")
    best = None
    for f in probes:
        nf = luxemburg_norm(f, p, tol).value
        if nf == 0:
            continue
        ratio = luxemburg_norm(hl_maximal(f, balls), p, tol).value / nf
        best = ratio if best is None else max(best, ratio)
    if best is None:
        raise ValueError("every probe has zero norm")
    return max(1.0, safety * best)
