"""Weighted graphs and the discrete operators used by every curvature variant.

Vertices are dense integer ids ``0..n-1``. A vertex function is a float
array of length ``n``.
"""

from __future__ import annotations

import json
import math
from collections import deque
from pathlib import Path

import numpy as np

INF = math.inf


class GraphError(ValueError):
    """Raised for malformed graphs or queries on unknown vertices."""


class WeightedGraph:
    """Finite weighted graph ``G(V, w, m)``.

    Parameters
    ----------
    weights : (n, n) array_like
        Symmetric non-negative edge weights with zero diagonal. A pair is an
        edge iff its weight is positive.
    measure : (n,) array_like, optional
        Positive vertex measure. Defaults to all ones.
    meta : dict, optional
        Free-form metadata (e.g. lattice coordinates). Not part of the
        graph's identity.

    Notes
    -----
    Instances are immutable after construction. Distances are computed by
    breadth-first search on demand and cached per source.
    """

    def __init__(self, weights, measure=None, meta=None):
        w = np.array(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise GraphError("weight matrix must be square")
        n = w.shape[0]
        if not np.all(np.isfinite(w)):
            raise GraphError("weights must be finite")
        if np.any(w < 0):
            raise GraphError("weights must be non-negative")
        if np.any(np.diag(w) != 0):
            raise GraphError("self-loops are not allowed")
        if not np.array_equal(w, w.T):
            raise GraphError("weights must be symmetric")
        m = np.ones(n) if measure is None else np.array(measure, dtype=float)
        if m.shape != (n,):
            raise GraphError(f"measure must have length {n}")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise GraphError("measure must be positive")
        w.setflags(write=False)
        m.setflags(write=False)
        self._w = w
        self._m = m
        self.meta = dict(meta or {})
        self._adj = tuple(tuple(int(v) for v in np.flatnonzero(w[u] > 0)) for u in range(n))
        q = w / m[:, None]
        q.setflags(write=False)
        self._q = q
        self._dist: dict[int, np.ndarray] = {}
        self._balls: dict[tuple[int, int], np.ndarray] = {}

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n, edges, measure=None, meta=None):
        """Build from an edge list of ``(u, v)`` or ``(u, v, w)`` tuples."""
        w = np.zeros((n, n))
        for e in edges:
            if len(e) == 2:
                u, v = e
                wt = 1.0
            elif len(e) == 3:
                u, v, wt = e
            else:
                raise GraphError(f"bad edge entry {e!r}")
            u, v, wt = int(u), int(v), float(wt)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if wt <= 0 or not math.isfinite(wt):
                raise GraphError(f"edge ({u}, {v}) must have positive finite weight")
            if w[u, v] != 0 and w[u, v] != wt:
                raise GraphError(f"conflicting duplicate edge ({u}, {v})")
            w[u, v] = w[v, u] = wt
        return cls(w, measure, meta)

    # -- basic accessors --------------------------------------------------

    @property
    def n(self) -> int:
        return self._w.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def measure(self) -> np.ndarray:
        return self._m

    @property
    def transition(self) -> np.ndarray:
        """``Q(x, y) = w(x, y) / m(x)``."""
        return self._q

    def neighbors(self, x: int) -> tuple[int, ...]:
        self._check_vertex(x)
        return self._adj[x]

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges ``(u, v, w)`` with ``u < v`` in lexicographic order."""
        return [(u, v, float(self._w[u, v])) for u in range(self.n) for v in self._adj[u] if u < v]

    @property
    def degree(self) -> np.ndarray:
        """Weighted degree ``Deg(x) = sum_y Q(x, y)``."""
        return self._q.sum(axis=1)

    @property
    def deg_max(self) -> float:
        return float(self.degree.max()) if self.n else 0.0

    @property
    def q_min(self) -> float:
        """Smallest ``Q(x, y)`` over edges; ``inf`` for an edgeless graph."""
        vals = self._q[self._w > 0]
        return float(vals.min()) if vals.size else INF

    @property
    def dim(self) -> float:
        """``Deg_max / Q_min``."""
        return self.deg_max / self.q_min

    @property
    def is_simple(self) -> bool:
        return bool(np.all((self._w == 0) | (self._w == 1)) and np.all(self._m == 1))

    def _check_vertex(self, x) -> None:
        if not isinstance(x, (int, np.integer)) or not 0 <= x < self.n:
            raise GraphError(f"unknown vertex {x!r} (graph has {self.n} vertices)")

    # -- distances --------------------------------------------------------

    def distances_from(self, x: int) -> np.ndarray:
        """Hop distances from ``x`` to all vertices (``inf`` if unreachable)."""
        self._check_vertex(x)
        d = self._dist.get(x)
        if d is None:
            d = np.full(self.n, INF)
            d[x] = 0
            queue = deque([x])
            while queue:
                u = queue.popleft()
                for v in self._adj[u]:
                    if d[v] == INF:
                        d[v] = d[u] + 1
                        queue.append(v)
            d.setflags(write=False)
            self._dist[x] = d
        return d

    def distance_matrix(self) -> np.ndarray:
        return np.vstack([self.distances_from(x) for x in range(self.n)]) if self.n else np.zeros((0, 0))

    def ball_array(self, x: int, radius: int) -> np.ndarray:
        """Sorted vertex ids of ``B_R(x)`` as an int array (cached)."""
        key = (int(x), int(radius))
        b = self._balls.get(key)
        if b is None:
            if radius < 0:
                raise GraphError("radius must be non-negative")
            b = np.flatnonzero(self.distances_from(x) <= radius)
            b.setflags(write=False)
            self._balls[key] = b
        return b

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        out = {"n": self.n, "edges": [[u, v, w] for u, v, w in self.edges()]}
        out["measure"] = [float(v) for v in self._m]
        return out

    @classmethod
    def from_dict(cls, data) -> WeightedGraph:
        if not isinstance(data, dict) or "n" not in data:
            raise GraphError("graph JSON must be an object with key 'n'")
        n = data["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise GraphError("'n' must be a non-negative integer")
        edges = data.get("edges", [])
        if not isinstance(edges, list):
            raise GraphError("'edges' must be a list")
        for e in edges:
            if not isinstance(e, list) or len(e) not in (2, 3):
                raise GraphError(f"bad edge entry {e!r}")
        measure = data.get("measure")
        if measure is not None and (not isinstance(measure, list) or len(measure) != n):
            raise GraphError(f"'measure' must be a list of length {n}")
        return cls.from_edges(n, edges, measure)

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return np.array_equal(self._w, other._w) and np.array_equal(self._m, other._m)

    __hash__ = None

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, edges={int((self._w > 0).sum() // 2)})"


def load_graph(path) -> WeightedGraph:
    """Read the graph JSON format from ``path``."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from exc
    return WeightedGraph.from_dict(data)


# -- operators ------------------------------------------------------------


def distance(g: WeightedGraph, x: int, y: int):
    """Combinatorial distance; ``inf`` when ``x`` and ``y`` are disconnected."""
    g._check_vertex(y)
    d = g.distances_from(x)[y]
    return int(d) if d != INF else INF


def ball(g: WeightedGraph, x: int, radius: int) -> list[int]:
    """``B_R(x)``, sorted ascending."""
    return [int(v) for v in g.ball_array(x, radius)]


def _as_function(g, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (g.n,):
        raise GraphError(f"vertex function must have shape ({g.n},), got {f.shape}")
    return f


def laplacian(g: WeightedGraph, f) -> np.ndarray:
    r"""Graph Laplacian ``Δf(x) = Σ_y Q(x, y) (f(y) - f(x))``."""
    f = _as_function(g, f)
    q = g.transition
    return q @ f - q.sum(axis=1) * f


def gamma(g: WeightedGraph, f) -> np.ndarray:
    """Carré du champ ``Γf(x) = ½ Σ_y Q(x, y) (f(y) - f(x))²``."""
    f = _as_function(g, f)
    diff = f[None, :] - f[:, None]
    return 0.5 * (g.transition * diff**2).sum(axis=1)


def averaging(g: WeightedGraph, f) -> np.ndarray:
    """The averaging operator ``A f = Δf + Deg_max f``."""
    f = _as_function(g, f)
    return laplacian(g, f) + g.deg_max * f


def r_gradient(g: WeightedGraph, f, x: int, radius: int) -> tuple[float, list[int]]:
    """``|∇_R f|(x)`` together with every vertex of ``B_R(x)`` attaining it.

    Returns
    -------
    value : float
    argmax : list of int
        Sorted vertices ``y`` with ``|f(y) - f(x)| == value``. Empty when
        ``value`` is zero (every ball vertex would qualify).
    """
    if radius < 1:
        raise GraphError("radius must be at least 1")
    f = _as_function(g, f)
    b = g.ball_array(x, radius)
    diff = np.abs(f[b] - f[x])
    value = float(diff.max())
    if value == 0.0:
        return 0.0, []
    return value, [int(v) for v in b[diff == value]]


def r_gradient_all(g: WeightedGraph, f, radius: int) -> np.ndarray:
    """``|∇_R f|`` at every vertex."""
    if radius < 1:
        raise GraphError("radius must be at least 1")
    f = _as_function(g, f)
    return np.array([np.abs(f[g.ball_array(x, radius)] - f[x]).max() for x in range(g.n)])


def sup_r_gradient(g: WeightedGraph, f, radius: int) -> float:
    """``‖∇_R f‖_∞``."""
    return float(r_gradient_all(g, f, radius).max()) if g.n else 0.0
