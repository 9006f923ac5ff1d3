"""Heat semigroup on finite graphs and numerical checks of gradient estimates.

``P_t = exp(tΔ)`` is applied exactly (to eigensolver accuracy) through one
eigendecomposition of the symmetrized Laplacian ``M^{1/2} Δ M^{-1/2}``.
Every ``verify_*`` function returns a :class:`VerificationTrace` whose
margins are ``RHS - LHS`` of the inequality being checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import GraphError, WeightedGraph, r_gradient_all

DEFAULT_TOL = 1e-8
# eigenvalues of -Δ below this are treated as the kernel (constants)
ZERO_EIGENVALUE = 1e-10


def default_times(count: int = 25, lo: float = 1e-3, hi: float = 10.0) -> np.ndarray:
    return np.geomspace(lo, hi, count)


def random_functions(g: WeightedGraph, count: int, seed: int, positive: bool = False) -> list[np.ndarray]:
    """Seeded test functions, uniform on ``[-1, 1]`` (``exp`` of that when ``positive``)."""
    rng = np.random.default_rng(seed)
    fs = [rng.uniform(-1.0, 1.0, g.n) for _ in range(count)]
    return [np.exp(f) for f in fs] if positive else fs


class HeatOperator:
    """Spectral factorization of the graph Laplacian.

    Parameters
    ----------
    g : WeightedGraph
    """

    def __init__(self, g: WeightedGraph):
        self.graph = g
        self._sm = np.sqrt(g.measure)
        w = g.weights
        sym = (w - np.diag(w.sum(axis=1))) / np.outer(self._sm, self._sm)
        lam, vec = np.linalg.eigh(sym)
        self.eigenvalues = lam  # of Δ, all <= 0 up to rounding
        self._vec = vec

    @property
    def n(self) -> int:
        return self.graph.n

    def apply(self, t: float, f) -> np.ndarray:
        """``P_t f``; ``f`` may be a vertex function or an ``(n, k)`` stack of them."""
        if t < 0:
            raise GraphError("heat semigroup needs t >= 0")
        f = np.asarray(f, dtype=float)
        if f.shape[0] != self.n:
            raise GraphError(f"function must have leading dimension {self.n}")
        scale = np.exp(t * self.eigenvalues)
        fs = f * (self._sm if f.ndim == 1 else self._sm[:, None])
        coef = self._vec.T @ fs
        coef = coef * (scale if f.ndim == 1 else scale[:, None])
        out = self._vec @ coef
        return out / (self._sm if f.ndim == 1 else self._sm[:, None])

    def matrix(self, t: float) -> np.ndarray:
        return self.apply(t, np.eye(self.n))

    def eigenpairs(self):
        """Eigenvalues of ``-Δ`` (ascending) and eigenfunctions as columns."""
        lam = np.clip(-self.eigenvalues, 0.0, None)
        order = np.argsort(lam, kind="stable")
        funcs = self._vec / self._sm[:, None]
        return lam[order], funcs[:, order]


def heat_apply(H: HeatOperator, t: float, f) -> np.ndarray:
    return H.apply(t, f)


def spectrum(g: WeightedGraph) -> np.ndarray:
    """Eigenvalues of ``-Δ``, ascending and non-negative."""
    return HeatOperator(g).eigenpairs()[0]


@dataclass
class VerificationTrace:
    """Margins of an inequality over a grid (times, or ``s`` for monotonicity traces)."""

    name: str
    grid: np.ndarray
    margins: np.ndarray
    tolerance: float = DEFAULT_TOL
    values: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def worst_margin(self) -> float:
        return float(np.min(self.margins)) if self.margins.size else math.inf

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -self.tolerance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "verdict": self.verdict,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "grid": [float(v) for v in self.grid],
            "margins": [float(v) for v in self.margins],
        }
        if self.values is not None:
            out["values"] = [float(v) for v in self.values]
        out.update(self.meta)
        return out

    def rows(self):
        """``(grid point, margin)`` pairs for CSV output."""
        return [(float(a), float(b)) for a, b in zip(self.grid, self.margins)]


def _heat(g, H):
    return H if H is not None else HeatOperator(g)


def _positive(fs):
    fs = [np.asarray(f, dtype=float) for f in fs]
    if any(np.any(f <= 0) for f in fs):
        raise GraphError("this estimate needs strictly positive functions")
    return fs


def verify_linear_gradient_estimate(g, radius, K, fs, ts, tol=DEFAULT_TOL, H=None) -> VerificationTrace:
    """Check ``|∇_R P_t f| <= e^{-Kt} P_t |∇_R f|`` pointwise.

    The margin at time ``t`` is the minimum of ``RHS - LHS`` over all
    vertices and all functions in ``fs``.
    """
    H = _heat(g, H)
    ts = np.asarray(ts, dtype=float)
    margins = np.full(ts.size, math.inf)
    if K == -math.inf:
        return VerificationTrace("linear_gradient", ts, margins, tol, meta={"K": K})
    for f in fs:
        grad0 = r_gradient_all(g, f, radius)
        for k, t in enumerate(ts):
            lhs = r_gradient_all(g, H.apply(t, f), radius)
            rhs = math.exp(-K * t) * H.apply(t, grad0)
            margins[k] = min(margins[k], float(np.min(rhs - lhs)))
    return VerificationTrace("linear_gradient", ts, margins, tol, meta={"K": K, "R": radius})


def verify_quadratic_gradient_estimate(g, radius, K, fs, ts, tol=DEFAULT_TOL, H=None) -> VerificationTrace:
    """Check ``|∇_R √(P_t f)|² <= e^{-2Kt} P_t |∇_R √f|²`` for positive ``f``."""
    H = _heat(g, H)
    fs = _positive(fs)
    ts = np.asarray(ts, dtype=float)
    margins = np.full(ts.size, math.inf)
    if K == -math.inf:
        return VerificationTrace("quadratic_gradient", ts, margins, tol, meta={"K": K})
    for f in fs:
        grad0 = r_gradient_all(g, np.sqrt(f), radius) ** 2
        for k, t in enumerate(ts):
            lhs = r_gradient_all(g, np.sqrt(H.apply(t, f)), radius) ** 2
            rhs = math.exp(-2 * K * t) * H.apply(t, grad0)
            margins[k] = min(margins[k], float(np.min(rhs - lhs)))
    return VerificationTrace("quadratic_gradient", ts, margins, tol, meta={"K": K, "R": radius})


def verify_exponential_gradient_estimate(g, radius, K, fs, ts, tol=DEFAULT_TOL, H=None) -> VerificationTrace:
    """Check ``‖∇_R log P_t f‖_∞ <= e^{-Kt} ‖∇_R log f‖_∞`` for positive ``f``."""
    H = _heat(g, H)
    fs = _positive(fs)
    ts = np.asarray(ts, dtype=float)
    margins = np.full(ts.size, math.inf)
    if K == -math.inf:
        return VerificationTrace("exponential_gradient", ts, margins, tol, meta={"K": K})
    for f in fs:
        rhs0 = float(r_gradient_all(g, np.log(f), radius).max())
        for k, t in enumerate(ts):
            lhs = float(r_gradient_all(g, np.log(H.apply(t, f)), radius).max())
            margins[k] = min(margins[k], math.exp(-K * t) * rhs0 - lhs)
    return VerificationTrace("exponential_gradient", ts, margins, tol, meta={"K": K, "R": radius})


def trace_G_monotone(g, radius, K, f, x, t, steps=50, tol=DEFAULT_TOL, H=None) -> VerificationTrace:
    """Sample ``G_s = e^{-Ks} P_s |∇_R P_{t-s} f|`` at ``x`` for ``s`` in ``[0, t]``.

    Margins are the forward differences ``G_{s_{k+1}} - G_{s_k}``; the
    trace passes when none drops below ``-tol``. ``values`` holds ``G_s``.
    """
    H = _heat(g, H)
    f = np.asarray(f, dtype=float)
    s = np.linspace(0.0, t, steps + 1)
    if K == -math.inf:
        return VerificationTrace("G_monotone", s[1:], np.full(steps, math.inf), tol, meta={"K": K, "x": int(x), "t": float(t)})
    vals = np.empty(s.size)
    for k, sk in enumerate(s):
        inner = r_gradient_all(g, H.apply(t - sk, f), radius)
        vals[k] = math.exp(-K * sk) * H.apply(sk, inner)[x]
    return VerificationTrace("G_monotone", s[1:], np.diff(vals), tol, values=vals, meta={"K": K, "x": int(x), "t": float(t)})


def growth_factor(K: float, t: float) -> float:
    """``(e^{2Kt} - 1) / (2K)``, equal to ``t`` at ``K = 0``."""
    if K == 0:
        return t
    return math.expm1(2 * K * t) / (2 * K)


def _xlogx(f):
    return f * np.log(f)


def verify_decay_bounds(g, radius, K, fs, ts, K_quadratic=None, tol=DEFAULT_TOL, H=None) -> VerificationTrace:
    """Check the gradient decay bounds for bounded and positive functions.

    Always checks the general form
    ``growth(K, t) |∇_R P_t f|² <= 2R dim^{R-1} / Q_min ‖f‖²_∞``.
    With ``K_quadratic`` given (and all ``f > 0``) it also checks
    ``growth(Kq, t) |∇_R √(P_t f)|² <= 2R dim^{R-1} / Q_min ‖f log f‖_∞``.
    On simple graphs with a non-negative hypothesis the ``Deg_max`` forms
    ``t |∇_R P_t f|² <= 2R Deg_max^{R-1} ‖f‖²_∞`` (and the ``f log f``
    analogue) are checked as well.

    ``meta['per_bound']`` holds the worst margin of each inequality.
    """
    H = _heat(g, H)
    ts = np.asarray(ts, dtype=float)
    if K_quadratic is not None:
        fs = _positive(fs)
    c_general = 2 * radius * g.dim ** (radius - 1) / g.q_min
    c_simple = 2 * radius * g.deg_max ** (radius - 1)
    checks = {"general_linear": K is not None and K > -math.inf}
    checks["general_quadratic"] = K_quadratic is not None and K_quadratic > -math.inf
    checks["simple_linear"] = g.is_simple and K is not None and K >= 0
    checks["simple_quadratic"] = g.is_simple and K_quadratic is not None and K_quadratic >= 0
    per = {name: math.inf for name, on in checks.items() if on}
    margins = np.full(ts.size, math.inf)
    for f in fs:
        f = np.asarray(f, dtype=float)
        sup2 = float(np.max(np.abs(f))) ** 2
        ent = float(np.max(np.abs(_xlogx(f)))) if K_quadratic is not None else 0.0
        for k, t in enumerate(ts):
            pf = H.apply(t, f)
            found = []
            if checks["general_linear"] or checks["simple_linear"]:
                lin = float(r_gradient_all(g, pf, radius).max()) ** 2
            if checks["general_quadratic"] or checks["simple_quadratic"]:
                quad = float(r_gradient_all(g, np.sqrt(pf), radius).max()) ** 2
            if checks["general_linear"]:
                found.append(("general_linear", c_general * sup2 - growth_factor(K, t) * lin))
            if checks["general_quadratic"]:
                found.append(("general_quadratic", c_general * ent - growth_factor(K_quadratic, t) * quad))
            if checks["simple_linear"]:
                found.append(("simple_linear", c_simple * sup2 / t - lin))
            if checks["simple_quadratic"]:
                found.append(("simple_quadratic", c_simple * ent / t - quad))
            for name, m in found:
                per[name] = min(per[name], m)
                margins[k] = min(margins[k], m)
    meta = {"K": K, "K_quadratic": K_quadratic, "R": radius, "per_bound": per}
    return VerificationTrace("decay_bounds", ts, margins, tol, meta=meta)


def _rotate_eigenspaces(lam, funcs, rng, gap=1e-9):
    """Random orthogonal change of basis inside each eigenspace (m-orthonormality kept)."""
    out = funcs.copy()
    start = 0
    while start < lam.size:
        stop = start + 1
        while stop < lam.size and lam[stop] - lam[start] < gap:
            stop += 1
        k = stop - start
        if k > 1:
            q, r = np.linalg.qr(rng.normal(size=(k, k)))
            q = q * np.sign(np.diag(r))
            out[:, start:stop] = funcs[:, start:stop] @ q
        start = stop
    return out


def harnack_check(g, radius, tol=DEFAULT_TOL, certify=False, rotation_seed=None, H=None) -> VerificationTrace:
    """Check ``|∇_R f|² <= 2eR Deg_max^{R-1} λ ‖f‖²_∞`` for every eigenpair of ``-Δ``.

    The grid of the returned trace is the list of nonzero eigenvalues. With
    ``certify=True`` non-negative curvature is first confirmed through
    zero transport defects on every pair within distance ``R``; the trace
    fails (with ``meta['certified'] = False``) otherwise.
    """
    from .curvature_linear import all_pairs
    from .transport import defect

    H = _heat(g, H)
    lam, funcs = H.eigenpairs()
    if rotation_seed is not None:
        funcs = _rotate_eigenspaces(lam, funcs, np.random.default_rng(rotation_seed))
    const = 2 * math.e * radius * g.deg_max ** (radius - 1)
    keep = lam > ZERO_EIGENVALUE
    lam, funcs = lam[keep], funcs[:, keep]
    margins = np.empty(lam.size)
    for k in range(lam.size):
        f = funcs[:, k]
        lhs = float(r_gradient_all(g, f, radius).max()) ** 2
        margins[k] = const * lam[k] * float(np.max(np.abs(f))) ** 2 - lhs
    meta = {"R": radius, "constant": const}
    if certify:
        ok = all(defect(g, y, x, radius).defect == 0 for x, y in all_pairs(g, radius))
        meta["certified"] = ok
        if not ok:
            margins = np.append(margins, -math.inf)
            lam = np.append(lam, math.nan)
    return VerificationTrace("harnack", lam, margins, tol, meta=meta)
