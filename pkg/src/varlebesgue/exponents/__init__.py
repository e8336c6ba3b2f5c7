"""Exponent fields, their algebra, and regularity-class checkers."""

from .checks import (
    CheckReport,
    SingularMatrix,
    check_k0,
    check_lh0,
    check_lh_inf,
    check_matrix_compat,
    check_n_inf,
    search_n_inf,
)
from .expression import Expression, ExpressionError, parse_expression
from .field import (
    ExponentError,
    ExponentField,
    ExponentOverflow,
    OutOfDomain,
    conjugate,
    conjugate_values,
    eval_exponent,
    scale_exponent,
    sobolev_shift,
)

__all__ = [
    "CheckReport",
    "SingularMatrix",
    "check_k0",
    "check_lh0",
    "check_lh_inf",
    "check_matrix_compat",
    "check_n_inf",
    "search_n_inf",
    "Expression",
    "ExpressionError",
    "parse_expression",
    "ExponentError",
    "ExponentField",
    "ExponentOverflow",
    "OutOfDomain",
    "conjugate",
    "conjugate_values",
    "eval_exponent",
    "scale_exponent",
    "sobolev_shift",
]
