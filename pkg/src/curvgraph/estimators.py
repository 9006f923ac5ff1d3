"""scikit-learn style front ends for the heat semigroup and the curvature sweep."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .curvature_linear import all_pairs, k_linear
from .curvature_nonlinear import OptimizerConfig, k_exponential_estimate, k_quadratic_estimate
from .semigroup import HeatOperator
from .validation import check_graph, check_radius, check_vertex_function

VARIANTS = ("linear", "quadratic", "exponential")


class HeatSemigroup(TransformerMixin, BaseEstimator):
    """Apply ``P_t`` to vertex functions.

    ``fit`` factorizes the Laplacian of a graph; ``transform`` maps each
    row of ``F`` (shape ``(k, n)``) to ``P_t`` of it.

    Parameters
    ----------
    t : float, default=1.0
    """

    def __init__(self, t=1.0):
        self.t = t

    def fit(self, graph, y=None):
        if self.t < 0:
            raise ValueError("t must be non-negative")
        self.graph_ = check_graph(graph)
        self.operator_ = HeatOperator(self.graph_)
        self.n_vertices_ = self.graph_.n
        return self

    def transform(self, F):
        check_is_fitted(self, "operator_")
        F = check_vertex_function(self.graph_, F)
        if F.ndim == 1:
            return self.operator_.apply(self.t, F)
        return self.operator_.apply(self.t, F.T).T


class GradientOllivierCurvature(BaseEstimator):
    """Curvature of every ordered pair at distance ``1..radius``.

    Parameters
    ----------
    radius : int, default=1
    variant : {"linear", "quadratic", "exponential"}, default="linear"
        The nonlinear variants report upper estimates, with the certified
        lower bounds in ``results_``.
    restarts, seed, r_count : optimizer settings for the nonlinear variants.

    Attributes
    ----------
    results_ : list
        One result object per pair, in lexicographic pair order.
    curvature_ : dict
        ``(x, y) -> value`` (upper estimate for the nonlinear variants).
    min_curvature_ : float
    """

    def __init__(self, radius=1, variant="linear", restarts=3, seed=0, r_count=33):
        self.radius = radius
        self.variant = variant
        self.restarts = restarts
        self.seed = seed
        self.r_count = r_count

    def fit(self, graph, y=None):
        radius = check_radius(self.radius)
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        g = check_graph(graph)
        cfg = OptimizerConfig(restarts=self.restarts, seed=self.seed, r_count=self.r_count)
        if self.variant == "linear":
            results = [k_linear(g, a, b, radius) for a, b in all_pairs(g, radius)]
        elif self.variant == "quadratic":
            results = [k_quadratic_estimate(g, a, b, radius, cfg) for a, b in all_pairs(g, radius)]
        else:
            results = [k_exponential_estimate(g, a, b, radius, cfg) for a, b in all_pairs(g, radius)]
        self.results_ = results
        self.curvature_ = {(r.x, r.y): r.value for r in results}
        self.min_curvature_ = min(self.curvature_.values(), default=math.inf)
        return self

    def to_array(self) -> np.ndarray:
        """Rows ``(x, y, value)``."""
        check_is_fitted(self, "results_")
        return np.array([(r.x, r.y, r.value) for r in self.results_], dtype=float).reshape(-1, 3)
