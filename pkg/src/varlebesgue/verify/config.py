"""Experiment configuration: a YAML document validated field by field.

Every error names the offending line, e.g. ``line 7: q_list must have 2 entries``.
Field names mirror :class:`ExperimentConfig`; see ``README.md`` for a full sample.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from ..exponents import ExponentField, ExpressionError
from ..grid import GridError, GridSpec, make_grid
from ..rough import KernelConfig, Quadrature, SphereFunction

__all__ = [
    "ConfigError",
    "CHECKS",
    "SUITES",
    "FamilyPolicy",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "parse_omega",
]

CHECKS = (
    "lemma1_strong",
    "lemma1_weak",
    "lemma2",
    "prop3a",
    "prop3b",
    "thm1a_weak",
    "thm1b_strong",
    "thm2a_weak",
    "thm2b_strong",
    "msharp_pointwise",
    "conditions_audit",
)
KERNEL_CHECKS = {"thm1a_weak", "thm1b_strong", "thm2a_weak", "thm2b_strong", "msharp_pointwise"}
SUITES = ("standard", "bumps", "indicators")

_TOP_KEYS = {
    "grid",
    "exponent",
    "alpha",
    "n",
    "kernel",
    "family",
    "suite",
    "checks",
    "tolerances",
    "refinement_levels",
    "composition",
    "lemma2",
    "quadrature",
    "waive_hypotheses",
}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class FamilyPolicy:
    """Dyadic ball/cube family rebuilt on every grid of a refinement study.

    ``r_min`` is measured in cell widths, so refining the grid adds one finer
    level while keeping the coarse radii; ``levels=None`` climbs until the
    radius exceeds the domain diameter.
    """

    r_min_cells: float = 0.5
    levels: int | None = None
    center_stride: int = 1
    shape: str = "ball"

    def build(self, grid: GridSpec):
        from ..grid import ball_family

        r_min = self.r_min_cells * float(np.max(grid.spacing))
        diam = float(np.sqrt(np.sum([(hi - lo) ** 2 for lo, hi in grid.bounds])))
        levels = self.levels
        if levels is None:
            levels = int(np.ceil(np.log2(diam / r_min))) + 1
        return ball_family(grid, levels, r_min, center_stride=self.center_stride, shape=self.shape)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    grid: GridSpec
    exponent: ExponentField
    alpha: float = 0.0
    n: int = 1
    kernel: KernelConfig | None = None
    family: FamilyPolicy = FamilyPolicy()
    suite: str = "standard"
    checks: tuple[str, ...] = ()
    tolerances: dict = field(default_factory=dict)
    refinement_levels: int = 2
    composition: dict | None = None
    lemma2: dict | None = None
    quadrature: Quadrature = Quadrature()
    waive_hypotheses: bool = False
    source: dict = field(default_factory=dict)

    @property
    def norm_tol(self) -> float:
        return float(self.tolerances.get("norm", 1e-12))

    @property
    def stable_tol(self) -> float:
        return float(self.tolerances.get("stable", 0.2))

    def grids(self, levels: int | None = None) -> list[GridSpec]:
        """The refinement ladder: the base grid doubled ``levels - 1`` times."""
        k = self.refinement_levels if levels is None else levels
        return [self.grid.refine(2**j) if j else self.grid for j in range(k)]

    def config_hash(self) -> str:
        blob = json.dumps(self.source, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


# ----------------------------------------------------------------------------
# YAML with line numbers
# ----------------------------------------------------------------------------


class _Node:
    """A plain value plus the 1-based line it came from."""

    __slots__ = ("value", "line")

    def __init__(self, value, line):
        self.value = value
        self.line = line


def _convert(node: yaml.Node) -> _Node:
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = _convert(k).value
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", k.start_mark.line + 1)
            out[key] = _convert(v)
        return _Node(out, line)
    if isinstance(node, yaml.SequenceNode):
        return _Node([_convert(v) for v in node.value], line)
    return _Node(yaml.SafeLoader("").construct_object(node), line)


def _plain(node: _Node):
    v = node.value
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_plain(x) for x in v]
    return v


def _num(node: _Node, what: str, positive: bool = False) -> float:
    v = node.value
    if isinstance(v, str) and v.strip().lower() in ("inf", ".inf", "infinity"):
        v = np.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{what} must be a number, got {v!r}", node.line)
    if positive and not v > 0:
        raise ConfigError(f"{what} must be positive", node.line)
    return float(v)


def _int(node: _Node, what: str, minimum: int = 1) -> int:
    v = node.value
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{what} must be an integer >= {minimum}", node.line)
    return v


def _mapping(node: _Node, what: str, allowed: set[str]) -> dict:
    if not isinstance(node.value, dict):
        raise ConfigError(f"{what} must be a mapping", node.line)
    for k, v in node.value.items():
        if k not in allowed:
            raise ConfigError(f"unknown field {k!r} in {what}; expected one of {sorted(allowed)}", v.line)
    return node.value


def _list(node: _Node, what: str) -> list:
    if not isinstance(node.value, list):
        raise ConfigError(f"{what} must be a list", node.line)
    return node.value


def _parse_grid(node: _Node) -> GridSpec:
    g = _mapping(node, "grid", {"dim", "bounds", "resolution"})
    for req in ("dim", "bounds", "resolution"):
        if req not in g:
            raise ConfigError(f"grid needs {req!r}", node.line)
    dim = _int(g["dim"], "grid.dim")
    bounds = _plain(g["bounds"])
    res = _plain(g["resolution"])
    try:
        return make_grid(dim, bounds, res)
    except (GridError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid: {exc}", node.line) from None


def _parse_exponent(node: _Node, dim: int) -> ExponentField:
    e = _mapping(node, "exponent", {"expression", "constant", "p_infinity", "lambda_infinity"})
    p_inf = _num(e["p_infinity"], "exponent.p_infinity") if "p_infinity" in e else None
    extra_keys = {}
    if "lambda_infinity" in e:
        extra_keys["lambda_infinity"] = _num(e["lambda_infinity"], "exponent.lambda_infinity", True)
    if ("expression" in e) == ("constant" in e):
        raise ConfigError("exponent needs exactly one of 'expression' or 'constant'", node.line)
    if "constant" in e:
        value = _num(e["constant"], "exponent.constant")
        if value < 1:
            raise ConfigError("a constant exponent must be >= 1", e["constant"].line)
        p = ExponentField.constant(value, dim)
        if p_inf is not None:
            p = replace(p, p_infinity=p_inf)
    else:
        src = e["expression"].value
        if not isinstance(src, str):
            raise ConfigError("exponent.expression must be a string", e["expression"].line)
        try:
            p = ExponentField.from_expression(src, dim, p_infinity=p_inf)
        except ExpressionError as exc:
            raise ConfigError(f"exponent.expression: {exc}", e["expression"].line) from None
    p.extra.update(extra_keys)
    return p


def parse_omega(spec, dim: int, line: int | None = None) -> SphereFunction:
    """Named closed form or inline table.

    ``constant`` / ``{constant: c}``, ``cos`` / ``{cos: k}`` (dim 2),
    ``coordinate`` / ``{coordinate: j}``, ``{table: [...]}`` (dim 2, >= 16
    angle samples) and ``{pair: [v_plus, v_minus]}`` (dim 1).
    """
    try:
        if isinstance(spec, str):
            spec = {spec: None}
        if not isinstance(spec, dict) or len(spec) != 1:
            raise ValueError(f"an omega spec is a name or a one-key mapping, got {spec!r}")
        (kind, arg), = spec.items()
        if kind == "constant":
            return SphereFunction.constant(1.0 if arg is None else float(arg), dim)
        if kind == "cos":
            if dim != 2:
                raise ValueError("'cos' is a dim-2 sphere function")
            return SphereFunction.cos(1 if arg is None else int(arg))
        if kind == "coordinate":
            return SphereFunction.coordinate(0 if arg is None else int(arg), dim)
        if kind == "table":
            if dim != 2:
                raise ValueError("angle tables are for dim 2; use 'pair' in dim 1")
            return SphereFunction.from_table([float(v) for v in arg])
        if kind == "pair":
            if dim != 1 or len(arg) != 2:
                raise ValueError("'pair' takes two values and needs dim 1")
            return SphereFunction.two_point(float(arg[0]), float(arg[1]))
        raise ValueError(f"unknown omega kind {kind!r}")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"omega: {exc}", line) from None


def _parse_kernel(node: _Node, n: int, alpha: float) -> KernelConfig:
    k = _mapping(node, "kernel", {"matrices", "q_list", "omegas", "p_list", "s"})
    for req in ("matrices", "q_list", "omegas", "p_list"):
        if req not in k:
            raise ConfigError(f"kernel needs {req!r}", node.line)
    mats_node = _list(k["matrices"], "kernel.matrices")
    m = len(mats_node)
    if m == 0:
        raise ConfigError("kernel.matrices is empty", k["matrices"].line)
    mats = []
    for mn in mats_node:
        A = np.asarray(_plain(mn), dtype=float) if isinstance(mn.value, list) else None
        if A is None or A.ndim != 2 or A.shape != (n, n):
            raise ConfigError(f"each matrix must be {n}x{n} (row-major)", mn.line)
        mats.append(A)
    lists = {}
    for key in ("q_list", "p_list", "omegas"):
        items = _list(k[key], f"kernel.{key}")
        if len(items) != m:
            raise ConfigError(f"kernel.{key} must have {m} entries", k[key].line)
        lists[key] = items
    q = [_num(v, "q_i") for v in lists["q_list"]]
    p = [_num(v, "p_i") for v in lists["p_list"]]
    omegas = [parse_omega(_plain(v), n, v.line) for v in lists["omegas"]]
    s = _num(k["s"], "kernel.s") if "s" in k else None
    return KernelConfig(n, alpha, tuple(mats), tuple(q), tuple(omegas), tuple(p), s)


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate a YAML experiment config."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None) from None
    if root is None:
        raise ConfigError("empty config")
    doc = _convert(root)
    top = _mapping(doc, "config", _TOP_KEYS)
    for req in ("grid", "exponent"):
        if req not in top:
            raise ConfigError(f"config needs {req!r}", doc.line)
    grid = _parse_grid(top["grid"])
    n = _int(top["n"], "n") if "n" in top else grid.dim
    if n != grid.dim:
        raise ConfigError(f"n = {n} disagrees with grid.dim = {grid.dim}", top["n"].line)
    alpha = _num(top["alpha"], "alpha") if "alpha" in top else 0.0
    if not 0 <= alpha < n:
        raise ConfigError("alpha must lie in [0, n)", top["alpha"].line)
    exponent = _parse_exponent(top["exponent"], n).with_domain(grid)
    kernel = _parse_kernel(top["kernel"], n, alpha) if "kernel" in top else None

    family = FamilyPolicy()
    if "family" in top:
        fm = _mapping(top["family"], "family", {"r_min_cells", "levels", "center_stride", "shape"})
        kw = {}
        if "r_min_cells" in fm:
            kw["r_min_cells"] = _num(fm["r_min_cells"], "family.r_min_cells", True)
        if "levels" in fm:
            kw["levels"] = _int(fm["levels"], "family.levels")
        if "center_stride" in fm:
            kw["center_stride"] = _int(fm["center_stride"], "family.center_stride")
        if "shape" in fm:
            if fm["shape"].value not in ("ball", "cube"):
                raise ConfigError("family.shape must be 'ball' or 'cube'", fm["shape"].line)
            kw["shape"] = fm["shape"].value
        family = FamilyPolicy(**kw)

    suite = "standard"
    if "suite" in top:
        suite = top["suite"].value
        if suite not in SUITES:
            raise ConfigError(f"unknown suite {suite!r}; expected one of {list(SUITES)}", top["suite"].line)

    checks: list[str] = []
    if "checks" in top:
        for c in _list(top["checks"], "checks"):
            if c.value not in CHECKS:
                raise ConfigError(f"unknown check {c.value!r}", c.line)
            if c.value in KERNEL_CHECKS and kernel is None:
                raise ConfigError(f"check {c.value!r} needs a kernel section", c.line)
            if c.value not in checks:
                checks.append(c.value)

    tolerances = {}
    if "tolerances" in top:
        tn = _mapping(top["tolerances"], "tolerances", {"norm", "stable", "compat"})
        tolerances = {k: _num(v, f"tolerances.{k}", True) for k, v in tn.items()}

    levels = _int(top["refinement_levels"], "refinement_levels") if "refinement_levels" in top else 2

    composition = None
    if "composition" in top:
        cn = _mapping(top["composition"], "composition", {"matrix", "mode"})
        if "matrix" not in cn:
            raise ConfigError("composition needs 'matrix'", top["composition"].line)
        A = np.asarray(_plain(cn["matrix"]), dtype=float)
        if A.shape != (n, n):
            raise ConfigError(f"composition.matrix must be {n}x{n}", cn["matrix"].line)
        mode = cn["mode"].value if "mode" in cn else "="
        if mode not in ("=", "<="):
            raise ConfigError("composition.mode must be '=' or '<='", cn["mode"].line)
        composition = {"matrix": A, "mode": mode}
    for c in ("prop3a", "prop3b"):
        if c in checks and composition is None:
            raise ConfigError(f"check {c!r} needs a composition section", top["checks"].line)

    lemma2 = None
    if "lemma2" in top:
        ln = _mapping(top["lemma2"], "lemma2", {"lambda", "radii", "inner_radius"})
        lemma2 = {
            "lambda": _num(ln["lambda"], "lemma2.lambda", True) if "lambda" in ln else 2.0,
            "radii": [_num(r, "lemma2.radii", True) for r in _list(ln["radii"], "lemma2.radii")]
            if "radii" in ln
            else [2.0, 4.0, 8.0, 16.0],
            "inner_radius": _num(ln["inner_radius"], "lemma2.inner_radius", True) if "inner_radius" in ln else 1.0,
        }

    quad = Quadrature()
    if "quadrature" in top:
        qn = _mapping(top["quadrature"], "quadrature", {"levels", "eps_sing"})
        quad = Quadrature(
            levels=_int(qn["levels"], "quadrature.levels", 0) if "levels" in qn else quad.levels,
            eps_sing=_num(qn["eps_sing"], "quadrature.eps_sing", True) if "eps_sing" in qn else None,
        )

    waive = False
    if "waive_hypotheses" in top:
        waive = top["waive_hypotheses"].value
        if not isinstance(waive, bool):
            raise ConfigError("waive_hypotheses must be true or false", top["waive_hypotheses"].line)

    source = _plain(doc)
    if overrides:
        if overrides.get("refinement_levels"):
            levels = int(overrides["refinement_levels"])
            source["refinement_levels"] = levels
        if overrides.get("waive_hypotheses"):
            waive = True
            source["waive_hypotheses"] = True
    return ExperimentConfig(
        grid, exponent, alpha, n, kernel, family, suite, tuple(checks), tolerances, levels,
        composition, lemma2, quad, waive, source,
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, overrides)
