"""Upper estimates of the quadratic and exponential curvatures.

Both are nonconvex variational problems. The estimates here are values of
the defining functionals at explicit feasible test functions, so they are
upper bounds; the matching lower bounds come from transport defects.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.sparse.csgraph import shortest_path

from .curvature_linear import _check_pair, k_linear, linear_support
from .graph_core import GraphError, WeightedGraph, laplacian, r_gradient
from .lp import OPTIMAL, LinearProgram, lp_solve
from .transport import curvature_bounds_from_defect, defect

_EXP_CLIP = 700.0
# Exponential witnesses are snapped to multiples of this step so that
# differences of their values are exact in floating point.
_DYADIC = 2.0**-30


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the multi-start local searches.

    ``tau_min``/``tau_max`` bound ``1 / g(x)`` in the quadratic search, so
    ``g(x)`` ranges over ``[1/tau_max, 1/tau_min]``.
    """

    restarts: int = 3
    max_iter: int = 200
    tol: float = 1e-10
    r_lo: float = 1e-3
    r_hi: float = 16.0
    r_count: int = 33
    refine: bool = True
    refine_count: int = 8
    tau_min: float = 1e-4
    tau_max: float = 1e4
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")
        if not 0 < self.r_lo < self.r_hi:
            raise ValueError("r-grid needs 0 < r_lo < r_hi")
        if self.r_count < 2:
            raise ValueError("r_count must be >= 2")
        if not 0 < self.tau_min < self.tau_max:
            raise ValueError("need 0 < tau_min < tau_max")

    def r_grid(self) -> np.ndarray:
        return np.geomspace(self.r_lo, self.r_hi, self.r_count)


@dataclass
class SandwichResult:
    """Certified lower bound and numerical upper estimate for one pair."""

    variant: str
    x: int
    y: int
    radius: int
    lower: float
    upper: float
    witness: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        if math.isinf(self.lower) and math.isinf(self.upper):
            return 0.0
        return self.upper - self.lower

    @property
    def value(self) -> float:
        return self.upper

    kind = "upper_estimate"

    def to_dict(self, with_witness=False) -> dict:
        out = {
            "variant": self.variant,
            "x": self.x,
            "y": self.y,
            "R": self.radius,
            "lower": self.lower,
            "upper": self.upper,
            "value": self.upper,
            "gap": self.gap,
            "kind": self.kind,
        }
        if with_witness and self.witness is not None:
            sup = self.meta.get("support", ())
            out["witness"] = {str(v): float(self.witness[v]) for v in sup}
        out.update({k: v for k, v in self.meta.items() if k != "support"})
        return out


# -- objectives evaluated from graph operators ----------------------------


def quadratic_objective(g: WeightedGraph, h, x: int, y: int, radius: int) -> float:
    """``½ [Δ|∇_R h|²(x) - sgn(h(y) - h(x)) (Δh²/h (y) - Δh²/h (x))]`` for ``h > 0``."""
    h = np.asarray(h, dtype=float)
    grad2 = np.zeros(g.n)
    for z in g.ball_array(x, 1):
        grad2[z] = r_gradient(g, h, int(z), radius)[0] ** 2
    ratio = laplacian(g, h**2) / h
    sign = np.sign(h[y] - h[x])
    return 0.5 * float(laplacian(g, grad2)[x] - sign * (ratio[y] - ratio[x]))


def exponential_objective(g: WeightedGraph, h, x: int, y: int, r: float) -> float:
    """``(1/r) (Δe^h/e^h (x) - Δe^h/e^h (y))``."""
    h = np.asarray(h, dtype=float)
    e = np.exp(h)
    ratio = laplacian(g, e) / e
    return float((ratio[x] - ratio[y]) / r)


def log_inequality_margin(a: float, b: float) -> float:
    """``LHS - RHS`` of ``a log a - b log b - (a - b) log b - (a - b) >= (√a - √b)²``.

    Evaluated as ``b [u log u - u + 1 - (√u - 1)²]`` with ``u = a / b``,
    through ``log`` and ``expm1`` of ``log u``, which avoids the
    cancellation of the raw form when ``a`` is close to ``b``.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    L = math.log(a) - math.log(b)
    lhs = math.exp(L) * L - math.expm1(L)
    rhs = math.expm1(L / 2) ** 2
    return b * (lhs - rhs)


def log_inequality_check(a: float, b: float) -> bool:
    """Whether the logarithmic inequality holds at ``(a, b)`` up to rounding."""
    return log_inequality_margin(a, b) >= -1e-12 * max(a, b)


# -- quadratic curvature --------------------------------------------------


class _QuadraticProblem:
    """Smooth reformulation of the quadratic functional for one sign branch.

    Writes ``g = c + h`` with ``c = g(x) = 1/tau``, ``h(x) = 0``,
    ``h(y) = s`` and lifts ``|∇_R g|(z)`` to epigraph variables ``t_z``.
    Variable vector: ``[tau, h on support, t on neighbours of x]``.
    """

    def __init__(self, g, x, y, radius, sign, cfg):
        self.g, self.x, self.y, self.radius, self.s = g, x, y, radius, float(sign)
        self.support = linear_support(g, x, y, radius)
        self.idx = {v: i + 1 for i, v in enumerate(self.support)}
        self.nbrs = g.neighbors(x)
        ns = len(self.support)
        self.nt0 = 1 + ns
        self.nv = self.nt0 + len(self.nbrs)
        q = g.transition
        self.qx = np.array([q[x, u] for u in g.neighbors(x)])
        self.ix = np.array([self.idx[u] for u in g.neighbors(x)], dtype=int)
        self.qy = np.array([q[y, u] for u in g.neighbors(y)])
        self.iy = np.array([self.idx[u] for u in g.neighbors(y)], dtype=int)

        rows = []
        for k, z in enumerate(self.nbrs):
            for w in g.ball_array(z, radius):
                w = int(w)
                if w == z:
                    continue
                for sg in (1.0, -1.0):
                    row = np.zeros(self.nv)
                    row[self.idx[w]] -= sg
                    row[self.idx[z]] += sg
                    row[self.nt0 + k] = 1.0
                    rows.append(row)
        self.A = np.array(rows)
        near = set(g.ball_array(x, radius).tolist())
        # positivity of g = c + h, i.e. 1 + tau * h > 0, away from x and y
        self.free = np.array([self.idx[v] for v in self.support if v not in (x, y)], dtype=int)
        tau_hi = cfg.tau_max if sign > 0 else min(cfg.tau_max, 1.0 - 1e-6)
        bounds = [(cfg.tau_min, tau_hi)]
        for v in self.support:
            if v == x:
                bounds.append((0.0, 0.0))
            elif v == y:
                bounds.append((self.s, self.s))
            elif v in near:
                bounds.append((-1.0, 1.0))
            else:
                bounds.append((None, None))
        bounds += [(0.0, None)] * len(self.nbrs)
        self.bounds = bounds

    def objective(self, z):
        tau = z[0]
        t = z[self.nt0 :]
        hx = z[self.ix]
        hy = z[self.iy]
        s = self.s
        fx = np.dot(self.qx, hx * (2.0 + tau * hx))
        num = np.dot(self.qy, 2.0 * (hy - s) + tau * (hy**2 - s**2))
        den = 1.0 + tau * s
        fy = num / den
        val = 0.5 * (np.dot(self.qx, t**2 - 1.0) - s * (fy - fx))
        grad = np.zeros_like(z)
        dfx_dh = self.qx * (2.0 + 2.0 * tau * hx)
        dfy_dh = self.qy * (2.0 + 2.0 * tau * hy) / den
        np.add.at(grad, self.ix, 0.5 * s * dfx_dh)
        np.add.at(grad, self.iy, -0.5 * s * dfy_dh)
        dfx_dtau = np.dot(self.qx, hx**2)
        dnum = np.dot(self.qy, hy**2 - s**2)
        dfy_dtau = (dnum * den - num * s) / den**2
        grad[0] = -0.5 * s * (dfy_dtau - dfx_dtau)
        grad[self.nt0 :] = self.qx * t
        return val, grad

    def constraints(self):
        cons = [{"type": "ineq", "fun": lambda z: self.A @ z, "jac": lambda z: self.A}]
        if self.free.size:
            free = self.free

            def pos(z):
                return 1.0 + z[0] * z[free] - 1e-9

            def pos_jac(z):
                jac = np.zeros((free.size, self.nv))
                jac[:, 0] = z[free]
                jac[np.arange(free.size), free] = z[0]
                return jac

            cons.append({"type": "ineq", "fun": pos, "jac": pos_jac})
        return cons

    def start(self, h_support, tau):
        z = np.zeros(self.nv)
        z[0] = tau
        z[1 : self.nt0] = h_support
        return self._tighten(z)

    def _tighten(self, z):
        z = z.copy()
        lo = np.array([b[0] if b[0] is not None else -np.inf for b in self.bounds])
        hi = np.array([b[1] if b[1] is not None else np.inf for b in self.bounds])
        z = np.clip(z, lo, hi)
        full = self.full_h(z)
        for k, w in enumerate(self.nbrs):
            z[self.nt0 + k] = r_gradient(self.g, full, w, self.radius)[0]
        return z

    def full_h(self, z):
        h = np.zeros(self.g.n)
        h[list(self.support)] = z[1 : self.nt0]
        return h

    def to_function(self, z):
        """Cleaned positive test function ``g`` on all vertices, or ``None``."""
        z = self._tighten(z)
        c = 1.0 / z[0]
        gfun = c + self.full_h(z)
        if np.any(gfun <= 0):
            return None
        return gfun


def _local_min(fun, z0, **kw):
    # SLSQP warns about bound clipping and the objective may overflow on
    # rejected trial steps; both are handled by the exact re-evaluation.
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore")
        return minimize(fun, z0, jac=True, method="SLSQP", **kw)


def _random_stream(cfg, *key):
    return np.random.default_rng([cfg.seed, *key])


def _certified_lower(g, x, y, radius, field_name):
    """Transport certificate and the lower bound it gives; simple graphs only.

    The matching argument counts vertices, so on weighted graphs no
    certificate is produced and the lower bound is ``-inf``.
    """
    if not g.is_simple:
        return None, -math.inf
    cert = defect(g, y, x, radius)
    return cert, getattr(curvature_bounds_from_defect(cert), field_name)


def _step_start(g, x, y, support):
    # 0 up to the distance of y from x, 1 from there on
    d = g.distances_from(x)
    return (d[list(support)] >= d[y]).astype(float)


def k_quadratic_estimate(g: WeightedGraph, x: int, y: int, radius: int, cfg: OptimizerConfig | None = None) -> SandwichResult:
    """Sandwich ``-3/2 dfct(y -> x) <= K^q_R(x, y) <= upper``.

    Both sign branches ``g(y) - g(x) = ±1`` are searched from starting
    points built out of the linear-curvature LP witness. The reported
    upper value is re-evaluated from the graph operators at a cleaned,
    exactly feasible witness.
    """
    cfg = cfg or OptimizerConfig()
    _check_pair(g, x, y, radius)
    cert, lower = _certified_lower(g, x, y, radius, "lower_Kq")
    if cert is not None and not cert.found:
        return SandwichResult(
            "quadratic", x, y, radius, -math.inf, -math.inf,
            meta={"hall_witness": list(cert.hall_witness), "status": "no_transport_map"},
        )
    lin = k_linear(g, x, y, radius)
    best_val, best_fun, best_z = math.inf, None, None
    runs = failures = 0
    max_dev = 0.0
    for branch, sign in enumerate((1.0, -1.0)):
        prob = _QuadraticProblem(g, x, y, radius, sign, cfg)
        sup = list(prob.support)
        base = sign * (lin.witness[sup] if lin.witness is not None else _step_start(g, x, y, sup))
        rng = _random_stream(cfg, x, y, radius, branch)
        taus = [cfg.tau_min * 10, 1.0 if sign > 0 else 0.5, 0.1]
        starts = [prob.start(base, tau) for tau in taus]
        for _ in range(cfg.restarts - 1):
            tau = float(np.exp(rng.uniform(np.log(cfg.tau_min), np.log(min(cfg.tau_max, 10.0)))))
            pert = base + rng.normal(scale=0.3, size=base.size)
            starts.append(prob.start(pert, tau if sign > 0 else min(tau, 0.9)))
        for z0 in starts:
            runs += 1
            res = _local_min(
                prob.objective, z0, bounds=prob.bounds,
                constraints=prob.constraints(), options={"maxiter": cfg.max_iter, "ftol": cfg.tol},
            )
            failures += not res.success
            for cand in (res.x, z0):
                gfun = prob.to_function(cand)
                if gfun is None:
                    continue
                val = quadratic_objective(g, gfun, x, y, radius)
                if not math.isfinite(val):
                    continue
                fast = prob.objective(prob._tighten(cand))[0]
                max_dev = max(max_dev, abs(fast - val))
                if val < best_val:
                    best_val, best_fun, best_z = val, gfun, cand
    meta = {
        "restarts": runs,
        "failed_runs": failures,
        "max_formula_deviation": max_dev,
        "support": linear_support(g, x, y, radius),
        "defect": cert.defect if cert is not None else None,
    }
    if best_z is not None:
        meta["g_x"] = float(best_fun[x])
    return SandwichResult("quadratic", x, y, radius, lower, best_val, best_fun, meta)


# -- exponential curvature ------------------------------------------------


class _ExponentialProblem:
    """Fixed-polytope form of the exponential functional.

    With ``g = r v`` the constraints read ``v(x) = 0``, ``v(y) = 1`` and
    ``|v(a) - v(b)| <= 1`` for support pairs within distance ``R``; only
    the objective depends on ``r``.
    """

    def __init__(self, g, x, y, radius):
        self.g, self.x, self.y, self.radius = g, x, y, radius
        self.support = tuple(sorted(set(g.ball_array(x, radius + 1).tolist()) | set(g.ball_array(y, radius + 1).tolist())))
        self.idx = {v: i for i, v in enumerate(self.support)}
        ns = len(self.support)
        q = g.transition
        self.qx = np.array([q[x, u] for u in g.neighbors(x)])
        self.ix = np.array([self.idx[u] for u in g.neighbors(x)], dtype=int)
        self.qy = np.array([q[y, u] for u in g.neighbors(y)])
        self.iy = np.array([self.idx[u] for u in g.neighbors(y)], dtype=int)
        rows = []
        sup = np.array(self.support)
        for i, a in enumerate(self.support):
            da = g.distances_from(a)[sup]
            for j in np.flatnonzero(da <= radius):
                if j <= i:
                    continue
                for sg in (1.0, -1.0):
                    row = np.zeros(ns)
                    row[i], row[j] = -sg, sg
                    rows.append(row)
        self.A = np.array(rows) if rows else np.zeros((0, ns))
        self.bounds = [(0.0, 0.0) if v == x else (1.0, 1.0) if v == y else (None, None) for v in self.support]
        close = np.array([g.distances_from(a)[sup] <= radius for a in self.support])
        np.fill_diagonal(close, False)
        self.hops = shortest_path(close.astype(float), unweighted=True, directed=False)

    def snap(self, v):
        """Exactly feasible point near ``v``, or ``None``.

        Rounds to the dyadic grid, then takes the largest function below it
        that is 1-Lipschitz for the hop metric of the constraint graph.
        Every step is exact arithmetic on dyadic rationals.
        """
        ix, iy = self.idx[self.x], self.idx[self.y]
        v = np.asarray(v, dtype=float)
        # diverged optimizer iterates
        if not np.all(np.abs(v) < 1e12):
            return None
        q = np.round(v / _DYADIC) * _DYADIC
        q[ix], q[iy] = 0.0, 1.0
        w = np.min(q[:, None] + self.hops, axis=0)
        w = w - w[ix]
        if w[iy] != 1.0 or not np.all(np.isfinite(w)):
            return None
        return w

    def objective(self, v, r):
        ex = np.exp(np.minimum(r * v[self.ix], _EXP_CLIP))
        ey = np.exp(np.minimum(r * (v[self.iy] - 1.0), _EXP_CLIP))
        val = (np.dot(self.qx, ex - 1.0) - np.dot(self.qy, ey - 1.0)) / r
        grad = np.zeros_like(v)
        np.add.at(grad, self.ix, self.qx * ex)
        np.add.at(grad, self.iy, -self.qy * ey)
        return val, grad

    def small_r_start(self):
        """Minimizer of the ``r -> 0`` limit ``Δv(x) - Δv(y)``, an LP over the same polytope."""
        c = np.zeros(len(self.support))
        np.add.at(c, self.ix, self.qx)
        np.add.at(c, self.iy, -self.qy)
        res = lp_solve(LinearProgram(c, self.A if self.A.size else None, np.ones(self.A.shape[0]) if self.A.size else None, bounds=self.bounds))
        if res.status != OPTIMAL:
            raise GraphError(f"small-r LP for ({self.x}, {self.y}) returned {res.status}")
        return res.x

    def full(self, v, r):
        h = np.zeros(self.g.n)
        h[list(self.support)] = r * v
        return h


def _exp_search(prob, rs, starts_for, cfg):
    """Run the local search at every ``r`` in ``rs``; returns ``{r: (value, v)}``.

    ``starts_for(r, prev, first)`` yields ``(candidates, extra)``: the best
    candidate (by exact evaluation) seeds one local run, and every point in
    ``extra`` seeds another.
    """
    out = {}
    cons = [{"type": "ineq", "fun": lambda v: 1.0 - prob.A @ v, "jac": lambda v: -prob.A}] if prob.A.size else []
    prev = None
    stats = {"runs": 0, "failed_runs": 0}

    def exact(cand, r):
        cand = prob.snap(cand)
        if cand is None:
            return math.inf, None
        val = exponential_objective(prob.g, prob.full(cand, r), prob.x, prob.y, r)
        return (val, cand) if math.isfinite(val) else (math.inf, None)

    for k, r in enumerate(rs):
        candidates, extra = starts_for(r, prev, k == 0)
        scored = [exact(c, r) for c in candidates]
        best = min(scored, key=lambda p: p[0])
        seeds = ([best[1]] if best[1] is not None else list(candidates[:1])) + list(extra)
        for v0 in seeds:
            stats["runs"] += 1
            res = _local_min(
                prob.objective, v0, args=(r,), bounds=prob.bounds,
                constraints=cons, options={"maxiter": cfg.max_iter, "ftol": cfg.tol},
            )
            stats["failed_runs"] += not res.success
            for cand in (res.x, v0):
                found = exact(cand, r)
                if found[0] < best[0]:
                    best = found
        out[float(r)] = best
        if best[1] is not None:
            prev = best[1]
    return out, stats


def k_exponential_estimate(g: WeightedGraph, x: int, y: int, radius: int, cfg: OptimizerConfig | None = None) -> SandwichResult:
    """Sandwich ``-dfct(y -> x) <= K^e_R(x, y) <= upper`` over a geometric ``r`` grid.

    The search runs on ``B_{R+1}(x) ∪ B_{R+1}(y)`` with the gradient
    constraint imposed only between support vertices, so the value is an
    upper estimate for that truncated problem (``meta['truncated']``).
    """
    cfg = cfg or OptimizerConfig()
    _check_pair(g, x, y, radius)
    cert, lower = _certified_lower(g, x, y, radius, "lower_Ke")
    if cert is not None and not cert.found:
        return SandwichResult(
            "exponential", x, y, radius, -math.inf, -math.inf,
            meta={"hall_witness": list(cert.hall_witness), "status": "no_transport_map"},
        )
    prob = _ExponentialProblem(g, x, y, radius)
    v0 = prob.small_r_start()
    rng = _random_stream(cfg, x, y, radius, 7)
    perturbed = [v0 + rng.normal(scale=0.2, size=v0.size) for _ in range(cfg.restarts - 1)]

    def starts_for(r, prev, first):
        return [v0] + ([prev] if prev is not None else []), (perturbed if first else [])

    grid = cfg.r_grid()
    found, stats = _exp_search(prob, grid, starts_for, cfg)
    coarse_best = min(val for val, _ in found.values())
    if cfg.refine:
        k = int(np.argmin([found[float(r)][0] for r in grid]))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        fine = [r for r in np.geomspace(lo, hi, cfg.refine_count + 2)[1:-1] if float(r) not in found]
        extra, extra_stats = _exp_search(prob, fine, starts_for, cfg)
        found.update(extra)
        for key in stats:
            stats[key] += extra_stats[key]
    r_best = min(found, key=lambda r: found[r][0])
    val, v = found[r_best]
    witness = prob.full(v, r_best) if v is not None else None
    meta = {
        "r_best": r_best,
        "coarse_upper": coarse_best,
        "grid_size": len(found),
        "restarts": stats["runs"],
        "failed_runs": stats["failed_runs"],
        "truncated": True,
        "support": prob.support,
        "defect": cert.defect if cert is not None else None,
    }
    return SandwichResult("exponential", x, y, radius, lower, val, witness, meta)


def hall_family_exponential(g: WeightedGraph, x: int, subset, radius: int, r: float) -> np.ndarray:
    """Test function ``2r`` on ``A``, ``r`` within distance ``R`` of ``A``, ``0`` elsewhere.

    For a Hall violator ``A`` its exponential functional decreases without
    bound as ``r`` grows.
    """
    d = np.min(np.vstack([g.distances_from(a) for a in subset]), axis=0)
    h = np.zeros(g.n)
    h[(d >= 1) & (d <= radius)] = r
    h[d == 0] = 2 * r
    return h
