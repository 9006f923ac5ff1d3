"""Input checks shared by the estimator classes and the command line."""

from __future__ import annotations

import numbers

import numpy as np

from .graph_core import GraphError, WeightedGraph


def check_graph(g) -> WeightedGraph:
    """Accept a :class:`WeightedGraph` or a symmetric weight matrix."""
    if isinstance(g, WeightedGraph):
        return g
    if isinstance(g, dict):
        return WeightedGraph.from_dict(g)
    return WeightedGraph(np.asarray(g, dtype=float))


def check_vertex_function(g: WeightedGraph, f, positive: bool = False) -> np.ndarray:
    """Return ``f`` as a finite float array of shape ``(n,)`` or ``(k, n)``."""
    arr = np.asarray(f, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[-1] != g.n:
        raise GraphError(f"expected vertex functions with last dimension {g.n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GraphError("vertex functions must be finite")
    if positive and np.any(arr <= 0):
        raise GraphError("vertex functions must be strictly positive")
    return arr


def check_radius(radius) -> int:
    if isinstance(radius, bool) or not isinstance(radius, numbers.Integral) or radius < 1:
        raise GraphError(f"radius must be an integer >= 1, got {radius!r}")
    return int(radius)
