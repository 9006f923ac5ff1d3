"""Transport maps between unit balls, their defect, and Hall-condition failures.

A ``y -> x`` transport map at scale ``R`` is an injection from some
``A`` with ``B_1(y) \\ B_R(x) ⊆ A ⊆ B_1(y)`` into ``B_1(x)`` moving every
vertex by at most ``R``. Its defect counts the vertices of
``B_1(x) \\ B_R(y)`` it leaves uncovered.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph_core import GraphError, WeightedGraph, distance

MAP_FOUND = "map_found"
NO_MAP = "no_map"


@dataclass(frozen=True)
class TransportInstance:
    """The bipartite matching problem behind a ``y -> x`` transport map."""

    x: int
    y: int
    radius: int
    left: tuple[int, ...]
    mandatory: tuple[int, ...]
    right: tuple[int, ...]
    target: tuple[int, ...]
    admissible: dict[int, tuple[int, ...]] = field(repr=False)

    def neighborhood(self, subset) -> list[int]:
        """``N_R(A)``: right vertices within distance ``R`` of some vertex of ``A``."""
        out = set()
        for z in subset:
            out.update(self.admissible[z])
        return sorted(out)


@dataclass(frozen=True)
class TransportCertificate:
    x: int
    y: int
    radius: int
    status: str
    defect: float
    assignment: dict[int, int] = field(default_factory=dict)
    hall_witness: tuple[int, ...] = ()

    @property
    def found(self) -> bool:
        return self.status == MAP_FOUND

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "R": self.radius,
            "status": self.status,
            "defect": self.defect if self.found else math.inf,
            "assignment": [[z, u] for z, u in sorted(self.assignment.items())],
            "hall_witness": list(self.hall_witness),
        }


class CurvatureBounds(NamedTuple):
    lower_K: float
    lower_Ke: float
    lower_Kq: float


def build_instance(g: WeightedGraph, x: int, y: int, radius: int) -> TransportInstance:
    """Set up the ``y -> x`` matching problem.

    Raises
    ------
    GraphError
        If ``d(x, y) > radius`` or ``radius < 1``.
    """
    if radius < 1:
        raise GraphError("radius must be at least 1")
    dxy = distance(g, x, y)
    if dxy > radius:
        raise GraphError(f"d({x}, {y}) = {dxy} exceeds radius {radius}")
    dx = g.distances_from(x)
    dy = g.distances_from(y)
    left = tuple(int(v) for v in g.ball_array(y, 1))
    right = tuple(int(v) for v in g.ball_array(x, 1))
    mandatory = tuple(z for z in left if dx[z] > radius)
    target = tuple(u for u in right if dy[u] > radius)
    admissible = {}
    for z in left:
        dz = g.distances_from(z)
        admissible[z] = tuple(u for u in right if dz[u] <= radius)
    return TransportInstance(x, y, radius, left, mandatory, right, target, admissible)


def _max_matching(order, adj):
    """Augmenting-path maximum matching; returns ``(match_left, match_right)``."""
    match_l: dict[int, int] = {}
    match_r: dict[int, int] = {}

    def augment(z, seen):
        for u in adj[z]:
            if u in seen:
                continue
            seen.add(u)
            if u not in match_r or augment(match_r[u], seen):
                match_l[z] = u
                match_r[u] = z
                return True
        return False

    for z in order:
        augment(z, set())
    return match_l, match_r


def _hall_violator(inst: TransportInstance, match_l, match_r) -> tuple[int, ...]:
    # Alternating reachability from an unmatched mandatory vertex: every right
    # vertex reached is matched (otherwise the matching would not be maximum),
    # and matched back into the reached set, so |N(A)| = |A| - 1.
    root = next(z for z in inst.mandatory if z not in match_l)
    reached = {root}
    queue = deque([root])
    while queue:
        z = queue.popleft()
        for u in inst.admissible[z]:
            w = match_r.get(u)
            if w is not None and w not in reached:
                reached.add(w)
                queue.append(w)
    return tuple(sorted(reached))


def is_hall_violator(inst: TransportInstance, subset) -> bool:
    subset = list(subset)
    return bool(subset) and set(subset) <= set(inst.mandatory) and len(inst.neighborhood(subset)) < len(subset)


def transport_map_exists(g: WeightedGraph, y: int, x: int, radius: int) -> bool:
    inst = build_instance(g, x, y, radius)
    match_l, _ = _max_matching(inst.mandatory, inst.admissible)
    return len(match_l) == len(inst.mandatory)


def defect(g: WeightedGraph, y: int, x: int, radius: int) -> TransportCertificate:
    """Minimum defect over all ``y -> x`` transport maps.

    Returns a ``no_map`` certificate with a Hall violator when no transport
    map exists. Otherwise the optimal map is found as a single maximum
    weight matching in which covering a mandatory vertex is worth more
    than covering every target vertex combined.
    """
    inst = build_instance(g, x, y, radius)
    match_l, match_r = _max_matching(inst.mandatory, inst.admissible)
    if len(match_l) < len(inst.mandatory):
        witness = _hall_violator(inst, match_l, match_r)
        cert = TransportCertificate(x, y, radius, NO_MAP, math.inf, hall_witness=witness)
        validate_certificate(inst, cert)
        return cert

    left, right = inst.left, inst.right
    big = len(right) + 1
    mand = set(inst.mandatory)
    tgt = set(inst.target)
    col = {u: j for j, u in enumerate(right)}
    weight = np.zeros((len(left), len(right)))
    allowed = np.zeros_like(weight, dtype=bool)
    for i, z in enumerate(left):
        for u in inst.admissible[z]:
            j = col[u]
            allowed[i, j] = True
            weight[i, j] = big * (z in mand) + (u in tgt)
    rows, cols = linear_sum_assignment(weight, maximize=True)
    assignment = {}
    total = 0
    for i, j in zip(rows, cols):
        if allowed[i, j]:
            assignment[left[i]] = right[j]
            total += int(weight[i, j])
    covered = total - big * len(mand)
    cert = TransportCertificate(x, y, radius, MAP_FOUND, len(tgt) - covered, assignment=assignment)
    validate_certificate(inst, cert)
    return cert


def validate_certificate(inst: TransportInstance, cert: TransportCertificate) -> None:
    """Re-check a certificate against its instance; raises ``AssertionError`` on failure."""
    if cert.status == NO_MAP:
        if not is_hall_violator(inst, cert.hall_witness):
            raise AssertionError(f"invalid Hall witness {cert.hall_witness} for {inst}")
        return
    image = list(cert.assignment.values())
    if len(set(image)) != len(image):
        raise AssertionError("assignment is not injective")
    if not set(inst.mandatory) <= set(cert.assignment):
        raise AssertionError("assignment does not cover the mandatory set")
    for z, u in cert.assignment.items():
        if u not in inst.admissible.get(z, ()):
            raise AssertionError(f"pair ({z}, {u}) is not admissible")
    if cert.defect != len(set(inst.target) - set(image)):
        raise AssertionError("reported defect does not match the assignment")


def defect_bruteforce(g: WeightedGraph, y: int, x: int, radius: int, cap: int = 8) -> TransportCertificate:
    """Exhaustive minimum defect over every admissible partial injection.

    Meant as an oracle for :func:`defect`; refuses instances with
    ``|B_1(y)| > cap``.
    """
    inst = build_instance(g, x, y, radius)
    if len(inst.left) > cap:
        raise GraphError(f"|B_1({y})| = {len(inst.left)} exceeds brute-force cap {cap}")
    left = inst.left
    mand = set(inst.mandatory)
    tgt = frozenset(inst.target)

    @lru_cache(maxsize=None)
    def best(i, used):
        # minimum number of target vertices left uncovered; None if infeasible
        if i == len(left):
            return len(tgt - used), ()
        z = left[i]
        options = []
        if z not in mand:
            res = best(i + 1, used)
            if res is not None:
                options.append(res)
        for u in inst.admissible[z]:
            if u in used:
                continue
            res = best(i + 1, used | {u})
            if res is not None:
                options.append((res[0], ((z, u),) + res[1]))
        return min(options) if options else None

    res = best(0, frozenset())
    if res is None:
        witness = ()
        mand_list = list(inst.mandatory)
        for k in range(1, len(mand_list) + 1):
            for combo in combinations(mand_list, k):
                if is_hall_violator(inst, combo):
                    witness = combo
                    break
            if witness:
                break
        return TransportCertificate(x, y, radius, NO_MAP, math.inf, hall_witness=tuple(witness))
    return TransportCertificate(x, y, radius, MAP_FOUND, res[0], assignment=dict(res[1]))


def curvature_bounds_from_defect(cert: TransportCertificate) -> CurvatureBounds:
    """Lower bounds on the linear, exponential and quadratic curvatures."""
    if not cert.found:
        return CurvatureBounds(-math.inf, -math.inf, -math.inf)
    d = float(cert.defect)
    return CurvatureBounds(-d if d else 0.0, -d if d else 0.0, -1.5 * d if d else 0.0)
