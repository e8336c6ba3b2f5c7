"""Rough homogeneous kernels and the operator T_alpha.

The kernel is ``K(x, y) = prod_i k_i(x - A_i y)`` with
``k_i(z) = Omega_i(z') / |z|^(n/q_i)``, ``z' = z/|z|``, and
``T_alpha f(x) = int K(x, y) f(y) dy``. ``Omega_i`` lives on the unit sphere
and is extended to ``R^n \\ {0}`` by ``Omega_i(z) = Omega_i(z')``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .exponents.checks import CheckReport
from .grid import GridError, SampledFunction

__all__ = [
    "SphereFunction",
    "KernelConfig",
    "Quadrature",
    "OnSingularity",
    "KernelConfigError",
    "validate_kernel",
    "eval_sphere",
    "sphere_norm",
    "modulus_of_continuity",
    "ShiftProfile",
    "check_h1",
    "check_h2_dini",
    "kernel_eval",
    "apply_T_alpha",
    "t_alpha_at",
]

SPHERE_SAMPLES = 512
SHIFT_DIRECTIONS = 32
RADII_PER_OCTAVE = 8


class OnSingularity(ValueError):
    pass


class KernelConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SphereFunction:
    """A function on the unit sphere of R^1 or R^2.

    ``dim == 1``: ``table == (value at +1, value at -1)``.
    ``dim == 2``: ``table`` holds samples at angles ``2 pi j / len(table)``
    (periodic, linear interpolation) unless ``closed_form(theta)`` is given.
    """

    dim: int
    table: np.ndarray
    closed_form: Callable[[np.ndarray], np.ndarray] | None = None
    description: str = ""

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float).ravel()
        if self.dim == 1 and t.size != 2:
            raise ValueError("a dim-1 sphere function is a pair (value at +1, value at -1)")
        if self.dim == 2 and t.size < 16:
            raise ValueError("a dim-2 angle table needs at least 16 samples")
        if self.dim not in (1, 2):
            raise ValueError("sphere functions exist for dim 1 and 2 only")
        if not np.all(np.isfinite(t)):
            raise ValueError("sphere samples must be finite")
        object.__setattr__(self, "table", t)

    @classmethod
    def constant(cls, value: float = 1.0, dim: int = 1) -> "SphereFunction":
        if dim == 1:
            return cls(1, np.array([value, value]), description=f"constant {value:g}")
        return cls(2, np.full(64, float(value)), lambda th, _v=value: np.full_like(th, _v), f"constant {value:g}")

    @classmethod
    def two_point(cls, plus: float, minus: float) -> "SphereFunction":
        return cls(1, np.array([plus, minus]), description=f"({plus:g}, {minus:g})")

    @classmethod
    def cos(cls, harmonic: int = 1) -> "SphereFunction":
        th = 2 * np.pi * np.arange(256) / 256
        return cls(2, np.cos(harmonic * th), lambda t, _k=harmonic: np.cos(_k * t), f"cos({harmonic}θ)")

    @classmethod
    def coordinate(cls, axis: int = 0, dim: int = 2) -> "SphereFunction":
        if dim == 1:
            return cls.two_point(1.0, -1.0)
        fn = np.cos if axis == 0 else np.sin
        th = 2 * np.pi * np.arange(256) / 256
        return cls(2, fn(th), fn, f"x{axis + 1}'")

    @classmethod
    def from_table(cls, values) -> "SphereFunction":
        return cls(2, np.asarray(values, dtype=float), description=f"table[{len(values)}]")

    def on_angles(self, theta: np.ndarray) -> np.ndarray:
        if self.closed_form is not None:
            return np.asarray(self.closed_form(theta), dtype=float)
        M = self.table.size
        u = np.mod(theta, 2 * np.pi) / (2 * np.pi) * M
        j = np.floor(u).astype(int) % M
        w = u - np.floor(u)
        return (1 - w) * self.table[j] + w * self.table[(j + 1) % M]

    def __call__(self, z) -> np.ndarray:
        """Homogeneous extension evaluated at nonzero points ``z``."""
        z = np.asarray(z, dtype=float).reshape(-1, self.dim)
        if self.dim == 1:
            return np.where(z[:, 0] > 0, self.table[0], self.table[1])
        return self.on_angles(np.arctan2(z[:, 1], z[:, 0]))


def eval_sphere(omega: SphereFunction, x) -> float:
    x = np.asarray(x, dtype=float).reshape(omega.dim)
    if not np.any(x != 0):
        raise ValueError("the sphere extension is undefined at the origin")
    return float(omega(x)[0])


def _sphere_nodes(dim: int):
    """Quadrature nodes and weights on the unit sphere."""
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    th = 2 * np.pi * (np.arange(SPHERE_SAMPLES) + 0.5) / SPHERE_SAMPLES
    return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(SPHERE_SAMPLES, 2 * np.pi / SPHERE_SAMPLES)


def _lp(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    a = np.abs(values)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float(np.sum(weights * a**p) ** (1.0 / p))


def sphere_norm(omega: SphereFunction, p: float) -> float:
    """Discretized ``||Omega||_{L^p(Sigma)}``."""
    nodes, w = _sphere_nodes(omega.dim)
    return _lp(omega(nodes), w, p)


def _shift_lattice_radii(octaves: int = 40) -> np.ndarray:
    # fixed global lattice, so the sup over {r <= t} is nested in t
    j = np.arange(RADII_PER_OCTAVE * octaves + 1)
    return 2.0 ** (1.0 - j / RADII_PER_OCTAVE)


class ShiftProfile:
    """Per-radius sup of ``||Omega((x'+y)') - Omega(x')||_p`` over the shift directions.

    ``modulus(t)`` is the running max over lattice radii ``<= t``.
    """

    def __init__(self, omega: SphereFunction, p: float, n_dirs: int = SHIFT_DIRECTIONS):
        self.omega = omega
        self.p = p
        self.radii = _shift_lattice_radii()[::-1]  # ascending
        nodes, w = _sphere_nodes(omega.dim)
        base = omega(nodes)
        if omega.dim == 1:
            dirs = np.array([[1.0], [-1.0]])
        else:
            ang = 2 * np.pi * np.arange(n_dirs) / n_dirs
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        per_radius = np.zeros(len(self.radii))
        for k, r in enumerate(self.radii):
            best = 0.0
            for d in dirs:
                moved = nodes + r * d
                norm = np.sqrt(np.sum(moved**2, axis=1))
                ok = norm > 1e-14
                diff = np.where(ok, omega(np.where(ok[:, None], moved, 1.0)) - base, 0.0)
                best = max(best, _lp(diff, w, p))
            per_radius[k] = best
        self.per_radius = per_radius
        self.running = np.maximum.accumulate(per_radius)

    def modulus(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.radii, t * (1 + 1e-12), side="right") - 1
        return np.where(idx >= 0, self.running[np.maximum(idx, 0)], 0.0)


def modulus_of_continuity(omega: SphereFunction, p: float, t: float) -> float:
    """L^p modulus of continuity with the renormalized shift ``(x' + y)/|x' + y|``.

    The sup runs over ``SHIFT_DIRECTIONS`` directions and a fixed geometric
    lattice of shift lengths (``RADII_PER_OCTAVE`` per octave) up to ``t``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    return float(ShiftProfile(omega, p).modulus(t)[0])


def check_h1(omega: SphereFunction, q_i: float, p_i: float) -> CheckReport:
    """Size condition: Omega in L^{p_i}(Sigma) with p_i > q_i."""
    if not p_i > q_i:
        raise ValueError(f"the H1 witness needs p_i > q_i, got p_i={p_i}, q_i={q_i}")
    val = sphere_norm(omega, p_i)
    verdict = "pass" if np.isfinite(val) else "fail"
    return CheckReport(verdict, val, [(float(p_i), val)], f"||Omega||_{{{p_i:g},Sigma}}")


def check_h2_dini(
    omega: SphereFunction,
    p_i: float,
    t_min: float = 2.0**-12,
    nodes_per_block: int = 8,
    rho_tail: float = 0.9,
) -> CheckReport:
    """Dini condition: ``int_0^1 varpi(t) dt/t`` block by dyadic block.

    Block ``k`` covers ``[2^(-k-1), 2^(-k)]`` and is integrated with the
    midpoint rule in ``log t``. Geometric decay of the last three block
    ratios (``<= rho_tail``) passes; nondecreasing blocks fail.
    """
    if not 0 < t_min < 1:
        raise ValueError("need 0 < t_min < 1")
    prof = ShiftProfile(omega, p_i)
    K = int(np.ceil(np.log2(1.0 / t_min)))
    du = np.log(2.0) / nodes_per_block
    blocks = []
    for k in range(K):
        u = -(k + 1) * np.log(2.0) + (np.arange(nodes_per_block) + 0.5) * du
        blocks.append(float(np.sum(prof.modulus(np.exp(u))) * du))
    c = np.asarray(blocks)
    evidence = [(float(2.0**-k), float(v)) for k, v in enumerate(c)]
    total = float(c.sum())
    notes = []
    if omega.dim == 1:
        notes.append("dim-1 sphere is two points; shifts shorter than 1 never move a point")
    if not np.any(c > 0):
        return CheckReport("pass", 0.0, evidence, "; ".join(notes + ["modulus vanishes on [t_min, 1]"]))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(c[:-1] > 0, c[1:] / c[:-1], np.where(c[1:] > 0, np.inf, 0.0))
    tail = ratios[-3:]
    if np.all(tail <= rho_tail):
        verdict = "pass"
    elif np.all(np.diff(c[-4:]) >= 0):
        verdict = "fail"
    else:
        verdict = "inconclusive"
    notes.append(f"partial integral over [{t_min:g}, 1]; tail ratios {', '.join(f'{t:.3g}' for t in tail)}")
    return CheckReport(verdict, total, evidence, "; ".join(notes))


# ----------------------------------------------------------------------------
# kernel configuration
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KernelConfig:
    n: int
    alpha: float
    matrices: tuple
    q_list: tuple
    omegas: tuple
    p_list: tuple
    s: float | None = None

    def __post_init__(self):
        mats = tuple(np.atleast_2d(np.asarray(A, dtype=float)) for A in self.matrices)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "q_list", tuple(float(q) for q in self.q_list))
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        object.__setattr__(self, "omegas", tuple(self.omegas))
        if self.s is None:
            inv = 1.0 - sum(1.0 / p for p in self.p_list)
            object.__setattr__(self, "s", 1.0 / inv if inv > 0 else np.inf)

    @property
    def m(self) -> int:
        return len(self.matrices)

    @cached_property
    def inverses(self) -> tuple:
        return tuple(np.linalg.inv(A) for A in self.matrices)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "matrices": [A.tolist() for A in self.matrices],
            "q_list": list(self.q_list),
            "p_list": list(self.p_list),
            "s": self.s,
            "omegas": [o.description for o in self.omegas],
        }


def _well_conditioned(A: np.ndarray, tol: float = 1e-12) -> bool:
    scale = np.max(np.abs(A), axis=1, keepdims=True)
    if np.any(scale == 0):
        return False
    return abs(np.linalg.det(A / scale)) > tol


def validate_kernel(cfg: KernelConfig) -> CheckReport:
    """Audit every structural hypothesis on the kernel; violations are verdicts."""
    clauses: dict[str, str] = {}

    def clause(name, ok):
        clauses[name] = "pass" if ok else "fail"

    n, m = cfg.n, cfg.m
    clause("dimension", n in (1, 2))
    clause("alpha in [0, n)", 0 <= cfg.alpha < n)
    clause("m >= 2 when alpha = 0", m >= 1 and (cfg.alpha > 0 or m >= 2))
    clause("list lengths agree", len(cfg.q_list) == m and len(cfg.omegas) == m and len(cfg.p_list) == m)
    clause("matrix shapes", all(A.shape == (n, n) for A in cfg.matrices))
    clause("q_i > 1", all(q > 1 for q in cfg.q_list))
    budget = sum(n / q for q in cfg.q_list) + cfg.alpha - n
    clause("sum n/q_i = n - alpha", abs(budget) <= 1e-12)
    shapes_ok = clauses["matrix shapes"] == "pass"
    clause("A_i invertible", shapes_ok and all(_well_conditioned(A) for A in cfg.matrices))
    clause(
        "A_i - A_j invertible",
        shapes_ok
        and all(
            _well_conditioned(cfg.matrices[i] - cfg.matrices[j]) for i in range(m) for j in range(i + 1, m)
        ),
    )
    clause("p_i > q_i (H1 witnesses)", len(cfg.p_list) == m and all(p > q for p, q in zip(cfg.p_list, cfg.q_list)))
    s_resid = sum(1.0 / p for p in cfg.p_list) + (0.0 if np.isinf(cfg.s) else 1.0 / cfg.s) - 1.0
    clause("1/p_1 + ... + 1/p_m + 1/s = 1, 1 <= s < inf", np.isfinite(cfg.s) and cfg.s >= 1 and abs(s_resid) <= 1e-12)
    clause("omega dimension", all(o.dim == n for o in cfg.omegas))
    failed = [k for k, v in clauses.items() if v == "fail"]
    verdict = "fail" if failed else "pass"
    notes = "violated: " + "; ".join(failed) if failed else "all kernel clauses hold"
    return CheckReport(verdict, float(abs(budget)), [(0.0, float(abs(budget)))], notes, clauses)


def _kernel_values(cfg: KernelConfig, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product kernel on broadcast arrays ``x``, ``y`` of trailing size n (no checks)."""
    out = 1.0
    for A, q, om in zip(cfg.matrices, cfg.q_list, cfg.omegas):
        z = x - y @ A.T
        r = np.sqrt(np.sum(z * z, axis=-1))
        ang = om(z.reshape(-1, cfg.n)).reshape(r.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out * ang * r ** (-cfg.n / q)
    return out


def kernel_eval(cfg: KernelConfig, x, y, eps_sing: float = 1e-12) -> float:
    x = np.asarray(x, dtype=float).reshape(cfg.n)
    y = np.asarray(y, dtype=float).reshape(cfg.n)
    for i, A in enumerate(cfg.matrices):
        if np.linalg.norm(x - A @ y) < eps_sing:
            raise OnSingularity(f"x - A_{i + 1} y vanishes")
    return float(_kernel_values(cfg, x[None, :], y[None, :])[0])


# ----------------------------------------------------------------------------
# T_alpha by midpoint quadrature with dyadic refinement at the singularities
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Quadrature:
    """Local refinement policy for :func:`apply_T_alpha`.

    Cells whose center is within ``eps_sing`` of a singular point ``A_i^{-1} x``
    are split dyadically ``levels`` times (the radius shrinks with the cells);
    whatever is still near a singularity after the last split is dropped.
    ``eps_sing`` defaults to 1.5 cell diameters.
    """

    levels: int = 6
    eps_sing: float | None = None
    chunk: int = 256
    max_dropped_fraction: float = 0.1


def _children_offsets(n: int) -> np.ndarray:
    corners = np.array(np.meshgrid(*[[-0.25, 0.25]] * n, indexing="ij")).reshape(n, -1).T
    return corners  # in units of the parent cell size


def t_alpha_at(
    f: SampledFunction,
    cfg: KernelConfig,
    points,
    quad: Quadrature = Quadrature(),
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``T_alpha f`` at arbitrary points.

    Returns ``(values, error_indicator, dropped_fraction)``; the indicator is
    the change between ``levels - 1`` and ``levels`` refinement passes and the
    dropped fraction is the share of ``int |f|`` lost in the innermost shell.
    """
    grid = f.grid
    n = grid.dim
    if cfg.n != n:
        raise KernelConfigError(f"kernel acts on R^{cfg.n}, function lives on R^{n}")
    X = np.asarray(points, dtype=float).reshape(-1, n)
    P = len(X)
    support = f.values != 0
    values = np.zeros(P)
    indicator = np.zeros(P)
    dropped = np.zeros(P)
    if not support.any():
        return values, indicator, dropped
    Y = grid.points[support]
    F = f.values[support]
    h = grid.spacing
    vol = grid.cell_volume
    diam = float(np.sqrt(np.sum(h**2)))
    eps = 1.5 * diam if quad.eps_sing is None else float(quad.eps_sing)
    total_mass = float(np.sum(np.abs(F)) * vol)
    inv = cfg.inverses
    kids = _children_offsets(n)

    for start in range(0, P, quad.chunk):
        Xc = X[start : start + quad.chunk]
        stars = [Xc @ Ai.T for Ai in inv]  # singular points, each (Pc, n)
        near = np.zeros((len(Xc), len(Y)), dtype=bool)
        for ys in stars:
            d2 = np.sum((Y[None, :, :] - ys[:, None, :]) ** 2, axis=-1)
            near |= d2 < eps * eps
        Kmat = _kernel_values(cfg, Xc[:, None, :], Y[None, :, :])
        Kmat = np.where(near, 0.0, Kmat)
        if not np.all(np.isfinite(Kmat)):
            raise OnSingularity("a singular point sits on a cell center outside the refinement radius")
        base = Kmat @ F * vol

        # refinement of near cells, vectorized over (output point, subcell)
        pi, si = np.nonzero(near)
        centers = Y[si]
        fvals = F[si]
        size = h.copy()
        contrib = np.zeros((quad.levels + 1, len(Xc)))
        for level in range(1, quad.levels + 1):
            if len(pi) == 0:
                break
            centers = (centers[:, None, :] + kids[None, :, :] * size).reshape(-1, n)
            pi = np.repeat(pi, len(kids))
            fvals = np.repeat(fvals, len(kids))
            size = size / 2
            eps_l = eps * 2.0**-level
            is_near = np.zeros(len(pi), dtype=bool)
            for ys in stars:
                is_near |= np.sum((centers - ys[pi]) ** 2, axis=1) < eps_l * eps_l
            far = ~is_near
            kv = _kernel_values(cfg, Xc[pi[far]], centers[far])
            contrib[level] = np.bincount(pi[far], weights=kv * fvals[far], minlength=len(Xc)) * np.prod(size)
            pi, centers, fvals = pi[is_near], centers[is_near], fvals[is_near]
        lost = np.bincount(pi, weights=np.abs(fvals), minlength=len(Xc)) * np.prod(size)
        sl = slice(start, start + len(Xc))
        values[sl] = base + contrib.sum(axis=0)
        indicator[sl] = np.abs(contrib[quad.levels]) if quad.levels > 0 else 0.0
        dropped[sl] = lost / total_mass
    if np.max(dropped) > quad.max_dropped_fraction:
        raise KernelConfigError(
            f"singular exclusion drops {np.max(dropped):.1%} of the mass; refine the grid or raise levels"
        )
    return values, indicator, dropped


def apply_T_alpha(f: SampledFunction, cfg: KernelConfig, quad: Quadrature = Quadrature()) -> SampledFunction:
    """``T_alpha f`` at every cell center of ``f.grid``.

    ``metadata`` carries ``error_indicator`` and ``dropped_fraction`` arrays.
    """
    vals, ind, dropped = t_alpha_at(f, cfg, f.grid.points, quad)
    return SampledFunction(f.grid, vals, {"error_indicator": ind, "dropped_fraction": dropped})
