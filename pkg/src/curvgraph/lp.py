"""Thin linear-programming layer over HiGHS (via :func:`scipy.optimize.linprog`)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"

FEAS_TOL = 1e-9
GAP_TOL = 1e-8


class LPError(RuntimeError):
    """The solver failed for a reason other than infeasibility or unboundedness."""


@dataclass
class LinearProgram:
    """``minimize c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x == b_eq`` and bounds.

    ``bounds`` is a list of ``(lo, hi)`` pairs, ``None`` meaning unbounded
    on that side. All variables are free when it is omitted.
    """

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: list | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        for name in ("A_ub", "b_ub", "A_eq", "b_eq"):
            val = getattr(self, name)
            if val is not None:
                setattr(self, name, np.asarray(val, dtype=float))
        arrays = [a for a in (self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq) if a is not None]
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("LP coefficients must be finite")

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass
class LPResult:
    status: str
    value: float | None = None
    x: np.ndarray | None = None


def lp_solve(p: LinearProgram) -> LPResult:
    bounds = p.bounds if p.bounds is not None else [(None, None)] * p.n_vars
    res = linprog(
        p.c,
        A_ub=p.A_ub,
        b_ub=p.b_ub,
        A_eq=p.A_eq,
        b_eq=p.b_eq,
        bounds=bounds,
        method="highs-ds",
        options={
            "primal_feasibility_tolerance": FEAS_TOL,
            "dual_feasibility_tolerance": FEAS_TOL,
            "presolve": True,
        },
    )
    if res.status == 0:
        return LPResult(OPTIMAL, float(res.fun), np.asarray(res.x))
    if res.status == 3:
        return LPResult(UNBOUNDED, -np.inf)
    if res.status == 2:
        return LPResult(INFEASIBLE)
    raise LPError(f"LP solver failed (status {res.status}): {res.message}")
