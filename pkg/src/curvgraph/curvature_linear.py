"""Exact linear curvature ``K_R`` and classical Ollivier curvature via LPs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import GraphError, WeightedGraph, distance, laplacian, r_gradient
from .lp import OPTIMAL, UNBOUNDED, LinearProgram, LPError, lp_solve
from .transport import defect

EXACT = "exact"
UPPER_ESTIMATE = "upper_estimate"
LOWER_CERTIFICATE = "lower_certificate"

WITNESS_TOL = 1e-7


@dataclass
class CurvatureResult:
    """One curvature value for an ordered pair.

    ``witness`` is a full-length vertex function (zero off ``support``)
    attaining ``value``; it is ``None`` when the value is ``-inf``.
    """

    variant: str
    x: int
    y: int
    radius: int
    value: float
    kind: str
    witness: np.ndarray | None = None
    support: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    def to_dict(self, with_witness=True) -> dict:
        out = {
            "variant": self.variant,
            "x": self.x,
            "y": self.y,
            "R": self.radius,
            "value": self.value,
            "kind": self.kind,
        }
        if with_witness and self.witness is not None:
            out["witness"] = {str(v): float(self.witness[v]) for v in self.support}
        out.update(self.meta)
        return out


def linear_objective(g: WeightedGraph, f, x: int, y: int, radius: int) -> float:
    """The functional minimized in the definition of ``K_R(x, y)``.

    ``Δ|∇_R f|(x) - (Δf(y) - Δf(x)) sgn(f(y) - f(x))``, evaluated directly
    from the graph operators. The normalization constraints are not
    checked here.
    """
    f = np.asarray(f, dtype=float)
    grad = np.zeros(g.n)
    for z in g.ball_array(x, 1):
        grad[z] = r_gradient(g, f, int(z), radius)[0]
    lap = laplacian(g, f)
    sign = np.sign(f[y] - f[x])
    return float(laplacian(g, grad)[x] - (lap[y] - lap[x]) * sign)


def _check_pair(g, x, y, radius):
    if radius < 1:
        raise GraphError("radius must be at least 1")
    d = distance(g, x, y)
    if d > radius:
        raise GraphError(f"d({x}, {y}) = {d} exceeds radius {radius}")
    if x == y:
        raise GraphError("curvature needs two distinct vertices")


def linear_support(g: WeightedGraph, x: int, y: int, radius: int) -> tuple[int, ...]:
    """``B_{R+1}(x) ∪ B_1(y)``: the only vertices the objective can see."""
    return tuple(sorted(set(g.ball_array(x, radius + 1).tolist()) | set(g.ball_array(y, 1).tolist())))


def linear_program(g: WeightedGraph, x: int, y: int, radius: int, support=None):
    """Build the LP whose optimum is ``K_R(x, y)`` (``-inf`` if unbounded).

    Variables are ``f`` on the support followed by one epigraph variable
    ``t_z >= |∇_R f|(z)`` per neighbour ``z`` of ``x``. The sign is fixed to
    ``f(y) - f(x) = 1`` and the gauge to ``f(x) = 0``.

    Returns
    -------
    lp : LinearProgram
    support : tuple of int
    nbrs : tuple of int
        The neighbours of ``x``, in the order of the ``t`` variables.
    constant : float
        Objective offset not represented in ``lp.c``.
    """
    support = tuple(support) if support is not None else linear_support(g, x, y, radius)
    idx = {v: i for i, v in enumerate(support)}
    nbrs = g.neighbors(x)
    ns = len(support)
    nv = ns + len(nbrs)
    q = g.transition
    c = np.zeros(nv)
    for v in g.neighbors(x):
        c[idx[v]] += q[x, v]
    c[idx[x]] -= q[x].sum()
    for v in g.neighbors(y):
        c[idx[v]] -= q[y, v]
    c[idx[y]] += q[y].sum()
    for k, z in enumerate(nbrs):
        c[ns + k] = q[x, z]
    constant = -float(sum(q[x, z] for z in nbrs))

    rows = []
    for k, z in enumerate(nbrs):
        for w in g.ball_array(z, radius):
            w = int(w)
            if w == z:
                continue
            for sgn in (1.0, -1.0):
                row = np.zeros(nv)
                row[idx[w]] += sgn
                row[idx[z]] -= sgn
                row[ns + k] = -1.0
                rows.append(row)
    A_ub = np.array(rows) if rows else None
    b_ub = np.zeros(len(rows)) if rows else None

    near = set(g.ball_array(x, radius).tolist())
    bounds = []
    for v in support:
        if v == x:
            bounds.append((0.0, 0.0))
        elif v == y:
            bounds.append((1.0, 1.0))
        elif v in near:
            bounds.append((-1.0, 1.0))
        else:
            bounds.append((None, None))
    bounds += [(0.0, None)] * len(nbrs)
    return LinearProgram(c, A_ub, b_ub, bounds=bounds), support, nbrs, constant


def k_linear(g: WeightedGraph, x: int, y: int, radius: int, debug: bool = False, support=None) -> CurvatureResult:
    """Gradient-Ollivier curvature ``K_R(x, y)``, computed exactly.

    On simple graphs, pairs without a ``y -> x`` transport map get ``-inf``
    from a matching argument before any LP is built; with ``debug=True``
    the LP is solved anyway and must come back unbounded. On weighted
    graphs the matching criterion does not apply and ``-inf`` is reported
    exactly when the LP is unbounded.

    Raises
    ------
    GraphError
        If ``x == y`` or ``d(x, y) > radius``.
    LPError
        If the solver fails; the message carries the instance.
    """
    _check_pair(g, x, y, radius)
    meta = {}
    if g.is_simple:
        cert = defect(g, y, x, radius)
        if not cert.found:
            if debug:
                lp, *_ = linear_program(g, x, y, radius, support)
                res = lp_solve(lp)
                if res.status != UNBOUNDED:
                    raise AssertionError(f"no transport map for ({x}, {y}) but LP status is {res.status}")
            return CurvatureResult("linear", x, y, radius, -math.inf, EXACT, meta={"hall_witness": list(cert.hall_witness)})
        meta["defect"] = cert.defect

    lp, support, nbrs, constant = linear_program(g, x, y, radius, support)
    res = lp_solve(lp)
    if res.status == UNBOUNDED and not g.is_simple:
        return CurvatureResult("linear", x, y, radius, -math.inf, EXACT, meta={"unbounded": True})
    if res.status != OPTIMAL:
        raise LPError(f"K_R LP for pair ({x}, {y}), R={radius} returned {res.status}; instance: {lp!r}")
    witness = np.zeros(g.n)
    witness[list(support)] = res.x[: len(support)]
    value = res.value + constant
    return CurvatureResult("linear", x, y, radius, float(value), EXACT, witness, support, meta)


def ollivier_program(g: WeightedGraph, x: int, y: int):
    support = tuple(sorted(set(g.ball_array(x, 1).tolist()) | set(g.ball_array(y, 1).tolist())))
    idx = {v: i for i, v in enumerate(support)}
    q = g.transition
    c = np.zeros(len(support))
    for v in g.neighbors(x):
        c[idx[v]] += q[x, v]
    c[idx[x]] -= q[x].sum()
    for v in g.neighbors(y):
        c[idx[v]] -= q[y, v]
    c[idx[y]] += q[y].sum()
    rows, rhs = [], []
    for i, u in enumerate(support):
        du = g.distances_from(u)
        for j in range(i + 1, len(support)):
            v = support[j]
            for sgn in (1.0, -1.0):
                row = np.zeros(len(support))
                row[i], row[j] = sgn, -sgn
                rows.append(row)
                rhs.append(du[v])
    bounds = [(0.0, 0.0) if v == x else (1.0, 1.0) if v == y else (None, None) for v in support]
    return LinearProgram(c, np.array(rows), np.array(rhs), bounds=bounds), support


def k_ollivier(g: WeightedGraph, x: int, y: int) -> CurvatureResult:
    """Classical Ollivier curvature of the edge ``xy`` as a 1-Lipschitz LP.

    ``min Δf(x) - Δf(y)`` over ``f`` with ``f(y) - f(x) = 1`` and
    ``|f(u) - f(v)| <= d(u, v)`` on ``B_1(x) ∪ B_1(y)``.
    """
    g._check_vertex(x)
    g._check_vertex(y)
    if g.weights[x, y] <= 0:
        raise GraphError(f"Ollivier curvature needs adjacent vertices; ({x}, {y}) is not an edge")
    lp, support = ollivier_program(g, x, y)
    res = lp_solve(lp)
    if res.status != OPTIMAL:
        raise LPError(f"Ollivier LP for edge ({x}, {y}) returned {res.status}; instance: {lp!r}")
    witness = np.zeros(g.n)
    witness[list(support)] = res.x
    return CurvatureResult("ollivier", x, y, 1, float(res.value), EXACT, witness, support)


def ollivier_objective(g: WeightedGraph, f, x: int, y: int) -> float:
    lap = laplacian(g, np.asarray(f, dtype=float))
    return float(lap[x] - lap[y])


def k_linear_sampling_oracle(g: WeightedGraph, x: int, y: int, radius: int, trials: int = 200, seed: int = 0) -> float:
    """Upper bound on ``K_R(x, y)`` from random admissible test functions.

    Evaluates the defining functional (through :func:`linear_objective`)
    on ``trials`` random functions satisfying the normalization, plus the
    LP witness when one exists, and returns the smallest value seen.
    """
    _check_pair(g, x, y, radius)
    rng = np.random.default_rng(seed)
    support = np.array(linear_support(g, x, y, radius))
    near = g.ball_array(x, radius)
    best = math.inf
    exact = k_linear(g, x, y, radius)
    base = exact.witness
    if base is not None:
        best = linear_objective(g, base, x, y, radius)
    for k in range(trials):
        f = np.zeros(g.n)
        mode = k % 3
        if mode == 0 or base is None:
            f[support] = rng.uniform(-3.0, 3.0, support.size)
        elif mode == 1:
            f[support] = rng.integers(-2, 3, support.size)
        else:
            f[support] = base[support] + rng.normal(scale=0.2, size=support.size)
        f[near] = np.clip(f[near], -1.0, 1.0)
        f[x], f[y] = 0.0, 1.0
        best = min(best, linear_objective(g, f, x, y, radius))
    return best


def witness_check(g: WeightedGraph, res: CurvatureResult) -> float:
    """Absolute gap between ``res.value`` and the functional re-evaluated at the witness."""
    if res.witness is None:
        return 0.0
    if res.variant == "ollivier":
        return abs(ollivier_objective(g, res.witness, res.x, res.y) - res.value)
    f = res.witness
    grad, _ = r_gradient(g, f, res.x, res.radius)
    if abs(grad - 1.0) > WITNESS_TOL or abs(abs(f[res.y] - f[res.x]) - 1.0) > WITNESS_TOL:
        return math.inf
    return abs(linear_objective(g, f, res.x, res.y, res.radius) - res.value)


def all_pairs(g: WeightedGraph, radius: int) -> list[tuple[int, int]]:
    """Ordered pairs ``(x, y)`` with ``0 < d(x, y) <= radius``, lexicographic."""
    out = []
    for x in range(g.n):
        d = g.distances_from(x)
        out.extend((x, int(y)) for y in np.flatnonzero((d > 0) & (d <= radius)))
    return out


def edge_pairs(g: WeightedGraph) -> list[tuple[int, int]]:
    """Both orientations of every edge."""
    return [(x, int(y)) for x in range(g.n) for y in g.neighbors(x)]

