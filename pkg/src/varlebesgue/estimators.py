"""scikit-learn style wrappers.

Each row of ``X`` is one function sampled at the cell centers of a fixed grid
(C order in 2D). ``fit`` validates ``X`` and builds the grid and ball family;
``transform`` maps every row through the operator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exponents import ExponentField
from .grid import GridSpec, SampledFunction, make_grid
from .maximal import MaximalConfig
from .norms import DEFAULT_TOL, luxemburg_norm
from .rough import KernelConfig, Quadrature, apply_T_alpha

__all__ = ["MaximalTransformer", "FractionalIntegralTransformer", "VariableExponentNorm", "grid_for_features"]


def grid_for_features(n_features: int, dim: int, bounds, resolution=None) -> GridSpec:
    """The grid whose cell count matches ``n_features``."""
    if resolution is None:
        if dim == 1:
            resolution = n_features
        else:
            side = int(round(np.sqrt(n_features)))
            if side * side != n_features:
                raise ValueError(f"{n_features} features is not a square grid; pass resolution")
            resolution = (side, side)
    grid = make_grid(dim, bounds, resolution)
    if grid.size != n_features:
        raise ValueError(f"grid has {grid.size} cells but X has {n_features} features")
    return grid


class _GridTransformer(TransformerMixin, BaseEstimator):
    def _validate(self, X, reset: bool):
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        if reset:
            self.n_features_in_ = X.shape[1]
            self.grid_ = grid_for_features(X.shape[1], self.dim, self.bounds, self.resolution)
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def _rows(self, X):
        for row in X:
            yield SampledFunction(self.grid_, row)


class MaximalTransformer(_GridTransformer):
    """Brute-force maximal function of each row.

    Parameters
    ----------
    flavor : {"hl", "fractional", "fractional_s", "sharp"}
    alpha, s : float
        Fractional order and power for ``M_alpha`` / ``M_{alpha,s}``.
    levels, r_min_cells, center_stride, shape
        Ball-family policy; ``r_min_cells`` is the smallest radius in cell widths.
    """

    def __init__(
        self,
        flavor="hl",
        alpha=0.0,
        s=1.0,
        dim=1,
        bounds=(-1.0, 1.0),
        resolution=None,
        levels=None,
        r_min_cells=0.5,
        center_stride=1,
        shape="ball",
    ):
        self.flavor = flavor
        self.alpha = alpha
        self.s = s
        self.dim = dim
        self.bounds = bounds
        self.resolution = resolution
        self.levels = levels
        self.r_min_cells = r_min_cells
        self.center_stride = center_stride
        self.shape = shape

    def fit(self, X, y=None):
        from .verify.config import FamilyPolicy

        self._validate(X, reset=True)
        policy = FamilyPolicy(self.r_min_cells, self.levels, self.center_stride, self.shape)
        self.family_ = policy.build(self.grid_)
        self.config_ = MaximalConfig(self.family_, self.flavor, self.alpha, self.s)
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        X = self._validate(X, reset=False)
        return np.stack([self.config_.apply(f).values for f in self._rows(X)]) if len(X) else X.copy()


class FractionalIntegralTransformer(_GridTransformer):
    """``T_alpha`` applied to each row.

    Parameters
    ----------
    kernel : KernelConfig
    levels : int
        Dyadic refinement passes around the singularities.
    """

    def __init__(self, kernel: KernelConfig | None = None, levels=6, eps_sing=None, dim=1, bounds=(-1.0, 1.0), resolution=None):
        self.kernel = kernel
        self.levels = levels
        self.eps_sing = eps_sing
        self.dim = dim
        self.bounds = bounds
        self.resolution = resolution

    def fit(self, X, y=None):
        if self.kernel is None:
            raise ValueError("a KernelConfig is required")
        self._validate(X, reset=True)
        if self.kernel.n != self.dim:
            raise ValueError("kernel dimension and dim disagree")
        self.quad_ = Quadrature(self.levels, self.eps_sing)
        return self

    def transform(self, X):
        check_is_fitted(self, "quad_")
        X = self._validate(X, reset=False)
        out = [apply_T_alpha(f, self.kernel, self.quad_) for f in self._rows(X)]
        self.error_indicator_ = np.stack([t.metadata["error_indicator"] for t in out]) if out else None
        return np.stack([t.values for t in out]) if out else X.copy()


class VariableExponentNorm(_GridTransformer):
    """Luxemburg norm of each row; ``transform`` returns shape ``(n_samples, 1)``.

    Parameters
    ----------
    exponent : float, str or ExponentField
        A constant, an expression in ``x`` (or ``x1``, ``x2``), or a field.
    """

    def __init__(self, exponent=2.0, tol=DEFAULT_TOL, dim=1, bounds=(-1.0, 1.0), resolution=None):
        self.exponent = exponent
        self.tol = tol
        self.dim = dim
        self.bounds = bounds
        self.resolution = resolution

    def fit(self, X, y=None):
        self._validate(X, reset=True)
        p = self.exponent
        if isinstance(p, str):
            p = ExponentField.from_expression(p, self.dim)
        elif not isinstance(p, ExponentField):
            p = ExponentField.constant(float(p), self.dim)
        self.exponent_values_ = p.on(self.grid_)
        return self

    def transform(self, X):
        check_is_fitted(self, "exponent_values_")
        X = self._validate(X, reset=False)
        return np.array([[luxemburg_norm(f, self.exponent_values_, self.tol).value] for f in self._rows(X)])
