"""Config-driven empirical verification of the inequalities."""

from .bounds import (
    HypothesisError,
    MaximalOperator,
    TAlphaOperator,
    image_grid,
    lambda_grid,
    msharp_ratio_field,
    verify_composition,
    verify_lemma2,
    verify_msharp_pointwise,
    verify_strong_bound,
    verify_weak_bound,
    weak_lhs,
)
from .config import CHECKS, ConfigError, ExperimentConfig, FamilyPolicy, load_config, parse_config, parse_omega
from .reports import Case, InequalityReport, emit_report, render_report, trend_verdict
from .runner import audit_hypotheses, run_experiment
from .suite import SuiteCase, make_suite

__all__ = [
    "HypothesisError",
    "MaximalOperator",
    "TAlphaOperator",
    "image_grid",
    "lambda_grid",
    "msharp_ratio_field",
    "verify_composition",
    "verify_lemma2",
    "verify_msharp_pointwise",
    "verify_strong_bound",
    "verify_weak_bound",
    "weak_lhs",
    "CHECKS",
    "ConfigError",
    "ExperimentConfig",
    "FamilyPolicy",
    "load_config",
    "parse_config",
    "parse_omega",
    "Case",
    "InequalityReport",
    "emit_report",
    "render_report",
    "trend_verdict",
    "audit_hypotheses",
    "run_experiment",
    "SuiteCase",
    "make_suite",
]
