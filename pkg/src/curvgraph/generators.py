"""Deterministic constructors for the graph families used in tests and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_core import GraphError, WeightedGraph

FAMILIES = ("hex_torus", "square_torus", "cycle", "path", "complete", "star", "tree", "gnp")

# Shortest non-contractible cycle of hex_torus(L, L') has length 2 * min(L, L').
# Balls of radius 5 embed into the torus without identifications iff that
# length exceeds 2 * 5 + 1.
HEX_MIN_SIZE = 6
HEX_EMBED_RADIUS = 5


@dataclass(frozen=True)
class LatticeSpec:
    """Which graph to build.

    ``size`` holds the family's integer parameters:

    ========== ==========================================
    hex_torus  (cells along a1, cells along a2)
    square_torus (rows, cols)
    cycle      (n,)
    path       (n,)
    complete   (n,)
    star       (leaves,)
    tree       (branching, depth)
    gnp        (n,) together with ``p`` and ``seed``
    ========== ==========================================
    """

    family: str
    size: tuple[int, ...]
    p: float | None = None
    seed: int | None = None


def generate(spec: LatticeSpec) -> WeightedGraph:
    if spec.family not in FAMILIES:
        raise GraphError(f"unknown family {spec.family!r}; expected one of {', '.join(FAMILIES)}")
    size = tuple(int(s) for s in spec.size)
    arity = {"hex_torus": 2, "square_torus": 2, "tree": 2}.get(spec.family, 1)
    if len(size) != arity:
        raise GraphError(f"{spec.family} expects {arity} size parameter(s), got {len(size)}")
    if spec.family == "gnp":
        if spec.p is None or spec.seed is None:
            raise GraphError("gnp requires p and seed")
        return gnp(size[0], spec.p, spec.seed)
    return _BUILDERS[spec.family](*size)


def hex_torus(l1: int, l2: int) -> WeightedGraph:
    """Honeycomb lattice with periodic boundary, ``2 * l1 * l2`` vertices.

    Raises
    ------
    GraphError
        If either dimension is below ``HEX_MIN_SIZE``; smaller tori wrap
        around inside a radius-5 ball and no longer look like the infinite
        lattice there.
    """
    if min(l1, l2) < HEX_MIN_SIZE:
        raise GraphError(
            f"hex_torus dimensions must both be >= {HEX_MIN_SIZE} so that every "
            f"radius-{HEX_EMBED_RADIUS} ball matches the infinite lattice; got ({l1}, {l2})"
        )
    return _hex_torus(l1, l2)


def _hex_torus(l1: int, l2: int) -> WeightedGraph:
    # Vertex (i, j, s) -> 2 * (i * l2 + j) + s; s=0 is sublattice A, s=1 is B.
    # A(i, j) is joined to B(i, j), B(i-1, j) and B(i, j-1).
    def vid(i, j, s):
        return 2 * ((i % l1) * l2 + (j % l2)) + s

    edges = set()
    for i in range(l1):
        for j in range(l2):
            a = vid(i, j, 0)
            for b in (vid(i, j, 1), vid(i - 1, j, 1), vid(i, j - 1, 1)):
                edges.add((min(a, b), max(a, b)))
    a1 = np.array([1.0, 0.0])
    a2 = np.array([0.5, np.sqrt(3) / 2])
    delta = (a1 + a2) / 3
    coords = []
    for i in range(l1):
        for j in range(l2):
            base = i * a1 + j * a2
            coords.append(tuple(base))
            coords.append(tuple(base + delta))
    n = 2 * l1 * l2
    return WeightedGraph.from_edges(n, sorted(edges), meta={"family": "hex_torus", "coords": coords})


def square_torus(rows: int, cols: int) -> WeightedGraph:
    if min(rows, cols) < 3:
        raise GraphError("square_torus dimensions must be >= 3")
    edges = set()
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            for u in (((r + 1) % rows) * cols + c, r * cols + (c + 1) % cols):
                edges.add((min(u, v), max(u, v)))
    return WeightedGraph.from_edges(rows * cols, sorted(edges), meta={"family": "square_torus"})


def cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return WeightedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], meta={"family": "cycle"})


def path(n: int) -> WeightedGraph:
    if n < 1:
        raise GraphError("path needs n >= 1")
    return WeightedGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)], meta={"family": "path"})


def complete(n: int) -> WeightedGraph:
    if n < 1:
        raise GraphError("complete needs n >= 1")
    return WeightedGraph.from_edges(
        n, [(i, j) for i in range(n) for j in range(i + 1, n)], meta={"family": "complete"}
    )


def star(leaves: int) -> WeightedGraph:
    """``K_{1,leaves}`` with the center at vertex 0."""
    if leaves < 1:
        raise GraphError("star needs at least one leaf")
    return WeightedGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], meta={"family": "star"})


def tree(branching: int, depth: int) -> WeightedGraph:
    """Complete ``branching``-ary tree of the given depth, root 0, BFS numbering."""
    if branching < 1 or depth < 0:
        raise GraphError("tree needs branching >= 1 and depth >= 0")
    edges = []
    frontier = [0]
    n = 1
    for _ in range(depth):
        nxt = []
        for parent in frontier:
            for _ in range(branching):
                edges.append((parent, n))
                nxt.append(n)
                n += 1
        frontier = nxt
    return WeightedGraph.from_edges(n, edges, meta={"family": "tree"})


def gnp(n: int, p: float, seed: int) -> WeightedGraph:
    """Erdős–Rényi ``G(n, p)`` drawn with numpy's PCG64 generator."""
    if n < 1:
        raise GraphError("gnp needs n >= 1")
    if not 0.0 <= p <= 1.0:
        raise GraphError("gnp edge probability must lie in [0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    iu = np.triu_indices(n, k=1)
    keep = rng.random(iu[0].size) < p
    edges = list(zip(iu[0][keep].tolist(), iu[1][keep].tolist()))
    return WeightedGraph.from_edges(n, edges, meta={"family": "gnp", "p": p, "seed": seed, "rng": "PCG64"})


def random_weighted(n: int, p: float, seed: int, wrange=(0.5, 2.0), mrange=(0.5, 2.0)) -> WeightedGraph:
    """A ``gnp`` graph with uniform random edge weights and vertex measure."""
    base = gnp(n, p, seed)
    rng = np.random.Generator(np.random.PCG64([seed, 1]))
    edges = [(u, v, float(rng.uniform(*wrange))) for u, v, _ in base.edges()]
    measure = rng.uniform(*mrange, size=n)
    return WeightedGraph.from_edges(n, edges, measure, meta={"family": "weighted_gnp", "seed": seed})


def ball_profile(g: WeightedGraph, x: int, radius: int) -> tuple[tuple[int, ...], int]:
    """BFS layer sizes of ``B_radius(x)`` and the number of edges inside it."""
    d = g.distances_from(x)
    layers = tuple(int(np.sum(d == k)) for k in range(radius + 1))
    inside = g.ball_array(x, radius)
    n_edges = int((g.weights[np.ix_(inside, inside)] > 0).sum() // 2)
    return layers, n_edges


_BUILDERS = {
    "hex_torus": hex_torus,
    "square_torus": square_torus,
    "cycle": cycle,
    "path": path,
    "complete": complete,
    "star": star,
    "tree": tree,
}
