"""Numerical evidence for the regularity classes LH_0, LH_inf, N_inf, K_0 and
the matrix compatibility condition p(Ax) <= p(x).

None of these classes is decidable from finitely many samples. Each checker
therefore returns a :class:`CheckReport` carrying the measured constant and
the evidence trail (scale, value) it was derived from; ``pass``/``fail`` are
only issued when the trail shows a clear pattern, otherwise ``inconclusive``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..grid import BallFamily, GridSpec, SampledFunction, ball_mask, make_grid
from .field import ExponentField, PROBE_FACTOR, conjugate_values

__all__ = [
    "CheckReport",
    "SingularMatrix",
    "check_lh0",
    "check_lh_inf",
    "check_n_inf",
    "search_n_inf",
    "check_k0",
    "check_matrix_compat",
    "default_probe_grid",
    "RHO_TAIL",
    "COMPAT_EPS",
]

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

RHO_TAIL = 0.9
COMPAT_EPS = 1e-9


class SingularMatrix(ValueError):
    pass


@dataclass
class CheckReport:
    verdict: str
    constant: float
    evidence: list[tuple[float, float]]
    notes: str = ""
    clauses: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if not self.evidence:
            raise ValueError("a report needs at least one evidence pair")
        if self.verdict == PASS and not np.isfinite(self.constant):
            raise ValueError("a passing report needs a finite constant")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "constant": self.constant,
            "evidence": [list(e) for e in self.evidence],
            "notes": self.notes,
            "clauses": dict(self.clauses),
        }


def default_probe_grid(p: ExponentField, half_width: float = 1.0) -> GridSpec:
    if p.domain is not None:
        return p.domain.refine(PROBE_FACTOR)
    n = 1024 if p.dim == 1 else 64
    return make_grid(p.dim, [-half_width, half_width], n)


def _trend_verdict(values, tol: float, window: int = 3) -> str:
    """Stable/growing classification of a nondecreasing running sup."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return FAIL
    if len(v) < window + 1:
        return INCONCLUSIVE
    prev, last = v[-window - 1 : -1], v[-window:]
    rel = (last - prev) / np.maximum(np.abs(prev), 1e-300)
    rel = np.where((last == prev), 0.0, rel)
    if np.all(rel <= tol):
        return PASS
    if np.all(rel > tol):
        return FAIL
    return INCONCLUSIVE


def check_lh0(
    p: ExponentField,
    points=None,
    separations=None,
    tol: float = 1e-3,
) -> CheckReport:
    """Running sup of ``|p(x) - p(y)| * (-log|x - y|)`` as the pair set is refined.

    Pairs are ``(x, x ± delta e_j)`` for ``x`` in the probe set (the working
    grid plus the origin) and ``delta`` running through ``separations``
    (default ``0.49 * 2**-k``, ``k < 40``). Evidence is the running sup after
    each new separation.
    """
    if points is None:
        points = default_probe_grid(p).points
    pts = np.vstack([np.asarray(points, dtype=float).reshape(-1, p.dim), np.zeros((1, p.dim))])
    if separations is None:
        separations = 0.49 * 2.0 ** -np.arange(40)
    separations = np.sort(np.asarray(separations, dtype=float))[::-1]
    if np.any(separations >= 0.5) or np.any(separations <= 0):
        raise ValueError("separations must lie in (0, 1/2)")
    px = p(pts)
    running = 0.0
    evidence = []
    for d in separations:
        for axis in range(p.dim):
            for sgn in (1.0, -1.0):
                shifted = pts.copy()
                shifted[:, axis] += sgn * d
                with np.errstate(invalid="ignore"):
                    diff = np.abs(p(shifted) - px)
                diff = np.where(np.isnan(diff), 0.0, diff)
                running = max(running, float(diff.max()) * -np.log(d))
        evidence.append((float(d), running))
    verdict = _trend_verdict([e[1] for e in evidence], tol)
    return CheckReport(verdict, running, evidence, "C_0 estimate = running sup over refined pairs")


def _ray_directions(dim: int, n_dirs: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    th = 2 * np.pi * (np.arange(n_dirs) + 0.5) / n_dirs
    return np.stack([np.cos(th), np.sin(th)], axis=1)


def check_lh_inf(
    p: ExponentField,
    p_inf: float,
    radii=None,
    spacing: float = 1.0 / 32,
    n_dirs: int = 16,
    tol: float = 1e-2,
) -> CheckReport:
    """Running sup of ``|p(x) - p_inf| * log(e + |x|)`` over growing balls ``|x| <= R_k``."""
    if radii is None:
        radii = 2.0 ** np.arange(0, 11)
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must increase")
    dirs = _ray_directions(p.dim, n_dirs)
    running = 0.0
    evidence = []
    r_prev = 0.0
    for R in radii:
        s = np.arange(r_prev + spacing / 2, R, spacing)
        pts = (s[:, None, None] * dirs[None, :, :]).reshape(-1, p.dim)
        vals = np.abs(p(pts) - p_inf) * np.log(np.e + np.sqrt(np.sum(pts**2, axis=1)))
        if vals.size:
            running = max(running, float(np.nanmax(vals)))
        evidence.append((float(R), running))
        r_prev = R
    verdict = _trend_verdict([e[1] for e in evidence], tol)
    return CheckReport(verdict, running, evidence, "C_inf estimate = running sup over radii")


def _n_inf_integrand(p: ExponentField, pts: np.ndarray, lambda_inf: float, p_inf: float) -> np.ndarray:
    inv_pinf = 0.0 if np.isinf(p_inf) else 1.0 / p_inf
    gap = np.abs(1.0 / p(pts) - inv_pinf)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(gap > 0, np.exp(-lambda_inf / np.where(gap > 0, gap, 1.0)), 0.0)


def _annulus_integral(p, lambda_inf, p_inf, r0, r1, spacing, n_theta):
    s = np.arange(r0 + spacing / 2, r1, spacing)
    if p.dim == 1:
        pts = np.concatenate([s, -s]).reshape(-1, 1)
        return float(np.sum(_n_inf_integrand(p, pts, lambda_inf, p_inf)) * spacing)
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    pts = np.stack(
        [(s[:, None] * np.cos(th)[None, :]).ravel(), (s[:, None] * np.sin(th)[None, :]).ravel()], axis=1
    )
    g = _n_inf_integrand(p, pts, lambda_inf, p_inf).reshape(len(s), n_theta)
    return float(np.sum(g * s[:, None]) * spacing * (2 * np.pi / n_theta))


def check_n_inf(
    p: ExponentField,
    lambda_inf: float,
    p_inf: float,
    radii=None,
    spacing: float | None = None,
    n_theta: int = 64,
    rho_tail: float = RHO_TAIL,
) -> CheckReport:
    """Annulus-by-annulus integral of ``exp(-Lambda / |1/p - 1/p_inf|)``.

    Contributions are taken over ``|x| <= R_0`` and then over the doubling
    annuli ``R_k < |x| <= R_{k+1}`` (default ``R_k = 2**k`` up to ``2**10``).
    The last three successive ratios decide: all ``<= rho_tail`` is a pass,
    all ``>= 1`` a fail, anything else inconclusive.
    """
    if not lambda_inf > 0:
        raise ValueError("lambda_inf must be positive")
    if radii is None:
        radii = 2.0 ** np.arange(0, 11)
    radii = np.asarray(radii, dtype=float)
    if spacing is None:
        spacing = 1.0 / 64 if p.dim == 1 else 1.0 / 8
    contributions = []
    r_prev = 0.0
    for R in radii:
        contributions.append(_annulus_integral(p, lambda_inf, p_inf, r_prev, R, spacing, n_theta))
        r_prev = R
    c = np.asarray(contributions)
    evidence = [(float(R), float(v)) for R, v in zip(radii, c)]
    total = float(c.sum())
    if not np.any(c > 0):
        return CheckReport(PASS, 0.0, evidence, "Omega_+ carries no mass on the probed annuli")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(c[:-1] > 0, c[1:] / c[:-1], np.where(c[1:] > 0, np.inf, 0.0))
    tail = ratios[-3:]
    if len(tail) == 3 and np.all(tail <= rho_tail):
        verdict = PASS
    elif len(tail) == 3 and np.all(tail >= 1.0):
        verdict = FAIL
    else:
        verdict = INCONCLUSIVE
    notes = f"tail ratios {', '.join(f'{t:.3g}' for t in tail)}; rho_tail={rho_tail}"
    return CheckReport(verdict, total, evidence, notes)


def search_n_inf(p: ExponentField, lambdas, p_infs, **kw) -> tuple[float, float, CheckReport] | None:
    """Coarse lattice search for witnesses ``(Lambda_inf, p_inf)``; first pass wins."""
    last = None
    for p_inf in p_infs:
        for lam in lambdas:
            rep = check_n_inf(p, lam, p_inf, **kw)
            last = (lam, p_inf, rep)
            if rep.passed:
                return last
    return last


def _char_norm(mask: np.ndarray, grid: GridSpec, pv: np.ndarray, tol: float) -> float:
    from ..norms import luxemburg_norm

    return luxemburg_norm(SampledFunction(grid, mask.astype(float)), pv, tol).value


def check_k0(
    p: ExponentField,
    cubes: BallFamily,
    tol: float = 1e-10,
    growth: float = 1.2,
) -> CheckReport:
    """Max over the cube family of ``||chi_Q||_p ||chi_Q||_p' / |Q|``.

    Evidence holds the max at each cube size; the verdict is ``fail`` when the
    max grows by more than ``growth`` at every successive size.
    """
    grid = cubes.grid
    pv = p.on(grid)
    pcv = conjugate_values(pv)
    per_scale: dict[float, float] = {}
    for Q in cubes.balls:
        mask = ball_mask(grid, Q, cubes.shape)
        if not mask.any():
            continue
        measure = mask.sum() * grid.cell_volume
        val = _char_norm(mask, grid, pv, tol) * _char_norm(mask, grid, pcv, tol) / measure
        per_scale[Q.radius] = max(per_scale.get(Q.radius, 0.0), val)
    evidence = sorted(per_scale.items())
    values = np.array([v for _, v in evidence])
    constant = float(values.max())
    if not np.isfinite(constant):
        verdict = FAIL
    else:
        steps = values[1:] / np.maximum.accumulate(values)[:-1]
        if len(steps) >= 2 and np.all(steps > growth):
            verdict = FAIL
        elif len(steps) == 0 or steps[-1] <= growth:
            verdict = PASS
        else:
            verdict = INCONCLUSIVE
    notes = f"shape={cubes.shape}; {len(cubes)} sets"
    return CheckReport(verdict, constant, [(float(r), float(v)) for r, v in evidence], notes)


def check_matrix_compat(
    p: ExponentField,
    A,
    mode: str = "<=",
    probe: GridSpec | None = None,
    eps: float = COMPAT_EPS,
) -> CheckReport:
    """Probe ``p(Ax) - p(x)``: mode ``<=`` needs it ``<= eps``, mode ``=`` needs ``|.| <= eps``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape != (p.dim, p.dim):
        raise ValueError(f"matrix of shape {A.shape} does not act on R^{p.dim}")
    scale = np.max(np.abs(A), axis=1, keepdims=True)
    if np.any(scale == 0) or abs(np.linalg.det(A / scale)) <= 1e-12:
        raise SingularMatrix("matrix is singular")
    if mode not in ("<=", "="):
        raise ValueError(f"mode must be '<=' or '=', got {mode!r}")
    if probe is None:
        probe = default_probe_grid(p, half_width=4.0)
    x = probe.points
    px = p(x)
    pAx = p(x @ A.T)
    with np.errstate(invalid="ignore"):
        diff = pAx - px
    both_inf = np.isinf(px) & np.isinf(pAx)
    diff = np.where(both_inf, 0.0, diff)
    if mode == "<=":
        worst = float(np.max(diff))
        ok = worst <= eps
    else:
        worst = float(np.max(np.abs(diff)))
        ok = worst <= eps
    n_bad = int(np.sum(diff > eps) if mode == "<=" else np.sum(np.abs(diff) > eps))
    notes = f"mode {mode}; {n_bad} of {len(x)} probes violate (eps={eps:g})"
    return CheckReport(PASS if ok else FAIL, worst, [(float(len(x)), worst)], notes)
