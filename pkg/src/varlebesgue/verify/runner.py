"""Hypothesis audit and the config-driven experiment runner."""

from __future__ import annotations

import numpy as np

from ..exponents import (
    CheckReport,
    ExponentError,
    check_k0,
    check_matrix_compat,
    conjugate,
    scale_exponent,
    search_n_inf,
    sobolev_shift,
)
from ..rough import check_h1, check_h2_dini, validate_kernel
from .bounds import (
    HypothesisError,
    MaximalOperator,
    TAlphaOperator,
    verify_composition,
    verify_lemma2,
    verify_msharp_pointwise,
    verify_strong_bound,
    verify_weak_bound,
)
from .config import ExperimentConfig, FamilyPolicy
from .reports import InequalityReport
from .suite import make_suite

__all__ = ["audit_hypotheses", "run_experiment", "N_INF_LAMBDAS"]

N_INF_LAMBDAS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
_THM2 = {"thm2a_weak", "thm2b_strong"}


def _class_clauses(r, label: str, grid, lam_hint: float | None) -> dict[str, str]:
    """N_inf and K_0 evidence for the exponent ``r``."""
    out = {}
    if r.p_infinity is None:
        out[f"{label} in N_inf"] = "inconclusive"
    else:
        lambdas = ([lam_hint] if lam_hint else []) + list(N_INF_LAMBDAS)
        found = search_n_inf(r, lambdas, [r.p_infinity])
        out[f"{label} in N_inf"] = found[2].verdict if found else "inconclusive"
    stride = max(1, min(grid.shape) // 32)
    cubes = FamilyPolicy(r_min_cells=2.0, levels=3, center_stride=stride, shape="cube").build(grid)
    out[f"{label} in K_0"] = check_k0(r, cubes).verdict
    return out


def audit_hypotheses(config: ExperimentConfig) -> CheckReport:
    """Every auditable hypothesis of the requested checks, one clause each."""
    p = config.exponent
    n, alpha = config.n, config.alpha
    clauses: dict[str, str] = {}
    p_minus, p_plus = p.p_minus, p.p_plus
    clauses["p_- >= 1"] = "pass" if p_minus >= 1 else "fail"
    if alpha > 0:
        clauses["p_+ < n/alpha"] = "pass" if p_plus < n / alpha else "fail"

    cfg = config.kernel
    if cfg is not None:
        kr = validate_kernel(cfg)
        clauses.update({f"kernel: {k}": v for k, v in kr.clauses.items()})
        for i, (om, q_i, p_i) in enumerate(zip(cfg.omegas, cfg.q_list, cfg.p_list), start=1):
            if p_i > q_i:
                clauses[f"H1 Omega_{i}"] = check_h1(om, q_i, p_i).verdict
                clauses[f"H2 Omega_{i}"] = check_h2_dini(om, p_i).verdict
            else:
                clauses[f"H1 Omega_{i}"] = "fail"
        s = cfg.s
        clauses["1 <= s <= p_-"] = "pass" if np.isfinite(s) and 1 <= s <= p_minus + 1e-12 else "fail"
        thm2 = bool(_THM2 & set(config.checks))
        for i, A in enumerate(cfg.matrices, start=1):
            try:
                clauses[f"p(A_{i} x) <= p(x)"] = check_matrix_compat(p, A, "<=").verdict
                if thm2:
                    clauses[f"p(A_{i} x) = p(x)"] = check_matrix_compat(p, A, "=").verdict
            except ValueError:
                clauses[f"p(A_{i} x) <= p(x)"] = "fail"
        try:
            q = sobolev_shift(p, alpha, n)
        except ExponentError:
            clauses["q/s in N_inf"] = clauses["q/s in K_0"] = "fail"
        else:
            hint = p.extra.get("lambda_infinity")
            if np.isfinite(s):
                clauses.update(_class_clauses(scale_exponent(q, 1.0 / s), "q/s", config.grid, hint))
            if thm2:
                clauses.update(_class_clauses(conjugate(q), "q'", config.grid, None))

    verdicts = list(clauses.values())
    verdict = "fail" if "fail" in verdicts else ("inconclusive" if "inconclusive" in verdicts else "pass")
    failed = sorted(k for k, v in clauses.items() if v != "pass")
    evidence = [(float(i), 1.0 if v == "pass" else 0.0) for i, v in enumerate(verdicts)]
    notes = "not passing: " + "; ".join(failed) if failed else "all clauses pass"
    return CheckReport(verdict, float(verdicts.count("fail")), evidence, notes, clauses)


def _theorem_label(check: str, audit: CheckReport | None, config: ExperimentConfig, waived: bool) -> str:
    if audit is None or waived or audit.verdict != "pass":
        return "exploratory"
    if check.endswith("_strong") and check.startswith("thm"):
        if not config.exponent.p_minus > config.kernel.s:
            return "exploratory"
    return "theorem"


def run_experiment(config: ExperimentConfig) -> list[InequalityReport]:
    """Run every requested check deterministically, in the order given."""
    if not config.checks:
        return []
    audit = audit_hypotheses(config)
    waived = False
    if audit.verdict == "fail":
        if not config.waive_hypotheses:
            raise HypothesisError(f"hypothesis audit failed ({audit.notes}); pass --waive-hypotheses to run anyway")
        waived = True

    p = config.exponent
    suite = make_suite(config.suite)
    grids = config.grids()
    tol, stable = config.norm_tol, config.stable_tol
    h = config.config_hash()
    q = None
    if any(c.startswith(("lemma1", "thm")) for c in config.checks):
        try:
            q = sobolev_shift(p, config.alpha, config.n)
        except ExponentError as exc:
            raise HypothesisError(f"the target exponent q cannot be formed: {exc}") from None

    reports = []
    for check in config.checks:
        if check == "conditions_audit":
            rep = InequalityReport(
                check, audit.constant, [], [], audit.verdict, notes=audit.notes, clauses=dict(audit.clauses)
            )
        elif check in ("lemma1_strong", "lemma1_weak"):
            op = MaximalOperator(config.alpha, config.family)
            fn = verify_strong_bound if check.endswith("strong") else verify_weak_bound
            rep = fn(op, p, q, suite, grids, tol, stable, check)
        elif check == "lemma2":
            l2 = config.lemma2 or {"lambda": 2.0, "radii": [2.0, 4.0, 8.0, 16.0], "inner_radius": 1.0}
            rep = verify_lemma2(p, l2["lambda"], l2["radii"], l2["inner_radius"], stable=stable)
        elif check in ("prop3a", "prop3b"):
            comp = config.composition
            mode = "<=" if check == "prop3a" else "="
            rep = verify_composition(p, comp["matrix"], mode, suite, grids, tol, stable=stable, audit=not waived)
            rep.check = check
        elif check == "msharp_pointwise":
            rep = verify_msharp_pointwise(suite, config.kernel, grids, config.family, config.quadrature, stable)
        else:
            op = TAlphaOperator(config.kernel, config.quadrature)
            fn = verify_weak_bound if check.endswith("weak") else verify_strong_bound
            rep = fn(op, p, q, suite, grids, tol, stable, check)
        rep.config_hash = h
        if check != "conditions_audit":
            if check.startswith(("thm", "msharp")):
                rep.label = _theorem_label(check, audit, config, waived)
            elif check == "lemma2" and p.p_infinity != np.inf:
                rep.label = "exploratory"  # the claim concerns p_infinity = inf only
            else:
                rep.label = "exploratory" if waived else "theorem"
        if waived:
            rep.notes = (rep.notes + "; " if rep.notes else "") + "hypotheses waived"
        reports.append(rep)
    return reports
