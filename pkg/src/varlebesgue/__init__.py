"""Variable-exponent Lebesgue norms, maximal operators and rough fractional integrals
on truncated grids, with empirical verification of the associated inequalities."""

from .exponents import ExponentField, conjugate, eval_exponent, sobolev_shift
from .grid import Ball, BallFamily, GridSpec, SampledFunction, ball_family, integrate, make_grid, sample
from .maximal import fractional_maximal, fractional_maximal_s, hl_maximal, rubio_de_francia, sharp_maximal
from .norms import Weight, luxemburg_norm, modular
from .rough import KernelConfig, Quadrature, SphereFunction, apply_T_alpha, kernel_eval

__version__ = "0.1.0"

__all__ = [
    "ExponentField",
    "conjugate",
    "eval_exponent",
    "sobolev_shift",
    "Ball",
    "BallFamily",
    "GridSpec",
    "SampledFunction",
    "ball_family",
    "integrate",
    "make_grid",
    "sample",
    "fractional_maximal",
    "fractional_maximal_s",
    "hl_maximal",
    "rubio_de_francia",
    "sharp_maximal",
    "Weight",
    "luxemburg_norm",
    "modular",
    "KernelConfig",
    "Quadrature",
    "SphereFunction",
    "apply_T_alpha",
    "kernel_eval",
]
