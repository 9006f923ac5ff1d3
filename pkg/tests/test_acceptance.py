"""Acceptance suite: twelve end-to-end criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` (the lines appear in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import time

import numpy as np

from curvgraph.curvature_linear import (
    all_pairs,
    edge_pairs,
    k_linear,
    k_linear_sampling_oracle,
    k_ollivier,
    linear_objective,
    ollivier_objective,
    witness_check,
)
from curvgraph.curvature_nonlinear import (
    OptimizerConfig,
    k_exponential_estimate,
    k_quadratic_estimate,
    log_inequality_check,
)
from curvgraph.generators import (
    complete,
    cycle,
    gnp,
    hex_torus,
    path,
    random_weighted,
    square_torus,
    star,
    tree,
)
from curvgraph.semigroup import (
    HeatOperator,
    default_times,
    harnack_check,
    random_functions,
    spectrum,
    trace_G_monotone,
    verify_decay_bounds,
    verify_linear_gradient_estimate,
)
from curvgraph.transport import curvature_bounds_from_defect, defect, defect_bruteforce

# Light optimizer settings for the all-pairs sweep; the defaults search a
# finer r-grid with more restarts.
SWEEP_CFG = OptimizerConfig(restarts=1, r_count=9, refine_count=4)
HEX_RUNTIME_TARGET = 60.0
HEX_K1_GOLDEN = -math.inf
HEX_OLLIVIER_GOLDEN = -2.0


def _connected(g):
    return not np.isinf(g.distance_matrix()).any()


def _finite_min_linear(g, radius):
    res = [k_linear(g, x, y, radius) for x, y in all_pairs(g, radius)]
    best = min(res, key=lambda r: r.value)
    return best.value, best


def finite_curvature_graphs(count, radius=2, start=0):
    """Seeded connected G(n, 0.6) graphs on 8..12 vertices whose min ``K_R`` is finite."""
    out, seed = [], start
    while len(out) < count:
        g = gnp(8 + seed % 5, 0.6, seed)
        seed += 1
        if not _connected(g):
            continue
        K, arg = _finite_min_linear(g, radius)
        if math.isfinite(K):
            out.append((seed - 1, g, K, arg))
    return out


# -- criteria -----------------------------------------------------------------


def criterion_1():
    g = hex_torus(6, 6)
    t0 = time.perf_counter()
    pairs = all_pairs(g, 2)
    bad = []
    for x, y in pairs:
        cert = defect(g, y, x, 2)
        if not cert.found or cert.defect != 0:
            bad.append(("defect", x, y))
            continue
        low = curvature_bounds_from_defect(cert)
        if low != (0.0, 0.0, 0.0):
            bad.append(("lower", x, y))
        if k_linear(g, x, y, 2).value < -1e-9:
            bad.append(("linear", x, y))
        q = k_quadratic_estimate(g, x, y, 2, SWEEP_CFG)
        e = k_exponential_estimate(g, x, y, 2, SWEEP_CFG)
        if q.upper < -1e-4 or q.lower != 0:
            bad.append(("quadratic", x, y, q.upper))
        if e.upper < -1e-4 or e.lower != 0:
            bad.append(("exponential", x, y, e.upper))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < HEX_RUNTIME_TARGET
    return ok, f"{len(pairs)} ordered pairs, {len(bad)} violations, {elapsed:.1f}s (target {HEX_RUNTIME_TARGET:.0f}s)"


def _random_lipschitz(g, support, x, y, rng):
    # McShane-type functions: minimum of cones over random anchors
    anchors = rng.choice(support, size=rng.integers(1, len(support) + 1), replace=False)
    f = np.min([rng.uniform(-1, 1) + g.distances_from(int(a)) for a in anchors], axis=0)
    f = f - f[x]
    if abs(abs(f[y]) - 1.0) > 1e-12:
        return None
    return f * np.sign(f[y])


def criterion_2():
    g = hex_torus(6, 6)
    rng = np.random.default_rng(2)
    problems = []
    for x, y in edge_pairs(g):
        lin = k_linear(g, x, y, 1, debug=(x == 0))
        oll = k_ollivier(g, x, y)
        if lin.value != HEX_K1_GOLDEN or abs(oll.value - HEX_OLLIVIER_GOLDEN) > 1e-9:
            problems.append((x, y, lin.value, oll.value))
        if witness_check(g, oll) > 1e-9:
            problems.append(("ollivier witness", x, y))
    # sampling oracles on one edge: Ollivier samples never beat the LP,
    # and the linear functional is unbounded below along the Hall ray
    x, y = 0, int(g.neighbors(0)[0])
    support = sorted(set(g.ball_array(x, 1).tolist()) | set(g.ball_array(y, 1).tolist()))
    sampled = []
    for _ in range(500):
        f = _random_lipschitz(g, support, x, y, rng)
        if f is not None:
            sampled.append(ollivier_objective(g, f, x, y))
    if not sampled or min(sampled) < HEX_OLLIVIER_GOLDEN - 1e-9:
        problems.append(("ollivier oracle", min(sampled, default=None)))
    hall = k_linear(g, x, y, 1).meta["hall_witness"]
    ray = []
    for s in (1e1, 1e2, 1e3):
        f = np.zeros(g.n)
        f[y] = 1.0
        f[hall] = s
        ray.append(linear_objective(g, f, x, y, 1))
    if not (ray[0] > ray[1] > ray[2] and ray[2] < -100):
        problems.append(("hall ray", ray))
    upper = k_linear_sampling_oracle(g, x, y, 1, trials=200, seed=2)
    ok = not problems and upper > -math.inf
    return ok, (
        f"{len(edge_pairs(g))} oriented edges: K_1 = {HEX_K1_GOLDEN}, K_1^Ol = {HEX_OLLIVIER_GOLDEN:g}; "
        f"Ollivier samples >= {min(sampled):.4f}; Hall ray {ray[-1]:.0f}; {len(problems)} problems"
    )


def criterion_3():
    graphs = [gnp(6 + s % 7, 0.4, 300 + s) for s in range(50)]
    graphs += [hex_torus(6, 6), square_torus(4, 5), cycle(5), cycle(6), path(5), complete(5), star(4), tree(2, 3)]
    graphs += [gnp(10, 0.6, 7)]
    worst, edges = math.inf, 0
    for g in graphs:
        for x, y in edge_pairs(g):
            edges += 1
            gap = k_ollivier(g, x, y).value - k_linear(g, x, y, 1).value
            worst = min(worst, gap)
    return worst >= -1e-8, f"{len(graphs)} graphs, {edges} oriented edges, min(K^Ol - K_1) = {worst:.3g}"


def criterion_4():
    counts = dict(pairs=0, mismatch=0, bound=0, inf=0, symmetry=0, sign=0, no_map=0)
    graphs, seed = 0, 0
    while graphs < 30:
        g = gnp(7 + seed % 4, 0.4, seed)
        seed += 1
        if g.degree.max() > 7:
            continue
        graphs += 1
        for radius in (1, 2):
            lin = {}
            for x, y in all_pairs(g, radius):
                counts["pairs"] += 1
                fast = defect(g, y, x, radius)
                slow = defect_bruteforce(g, y, x, radius)
                if fast.status != slow.status or (fast.found and fast.defect != slow.defect):
                    counts["mismatch"] += 1
                res = k_linear(g, x, y, radius, debug=True)
                lin[x, y] = res.value
                if fast.found:
                    if res.value < -fast.defect - 1e-8:
                        counts["bound"] += 1
                    if res.value == -math.inf:
                        counts["inf"] += 1
                else:
                    counts["no_map"] += 1
                    if res.value != -math.inf:
                        counts["inf"] += 1
            for x, y in all_pairs(g, radius):
                a, b = defect(g, y, x, radius), defect(g, x, y, radius)
                zero_a, zero_b = a.found and a.defect == 0, b.found and b.defect == 0
                if zero_a != zero_b or zero_a != (a.found and b.found):
                    counts["symmetry"] += 1
                nonneg = lin[x, y] >= -1e-9 and lin[y, x] >= -1e-9
                if nonneg != zero_a:
                    counts["sign"] += 1
    failures = sum(counts[k] for k in ("mismatch", "bound", "inf", "symmetry", "sign"))
    return failures == 0, f"{graphs} graphs, {counts['pairs']} pairs ({counts['no_map']} without map), failures {failures}: {counts}"


def criterion_5():
    ts = default_times()
    worst, probes_failed, instances = math.inf, 0, 0
    for seed, g, K, arg in finite_curvature_graphs(20):
        H = HeatOperator(g)
        fs = random_functions(g, 20, seed)
        trace = verify_linear_gradient_estimate(g, 2, K, fs, ts, H=H)
        worst = min(worst, trace.worst_margin)
        probe = verify_linear_gradient_estimate(g, 2, K + 0.1, fs + [arg.witness], ts, H=H)
        instances += 1
        probes_failed += not probe.passed
    ok = worst >= -1e-8 and probes_failed >= 1
    return ok, f"{instances} graphs, worst margin {worst:.3g}; K+0.1 probe failed on {probes_failed}/{instances}"


def criterion_6():
    g = complete(2)
    ts = default_times()
    errs = {
        "k_linear": abs(k_linear(g, 0, 1, 1).value - 2.0),
        "k_ollivier": abs(k_ollivier(g, 0, 1).value - 2.0),
        "spectrum": float(np.max(np.abs(spectrum(g) - [0.0, 2.0]))),
    }
    trace = verify_linear_gradient_estimate(g, 1, 2.0, [np.array([0.0, 1.0])], ts)
    errs["gradient_equality"] = float(np.max(np.abs(trace.margins)))
    ok = errs["k_linear"] < 1e-9 and errs["k_ollivier"] < 1e-9 and errs["spectrum"] < 1e-10 and errs["gradient_equality"] < 1e-10
    return ok, ", ".join(f"{k} err {v:.2g}" for k, v in errs.items())


def criterion_7():
    worst, traces = math.inf, 0
    h = hex_torus(6, 6)
    H = HeatOperator(h)
    for k, f in enumerate(random_functions(h, 3, 7)):
        for x in (0, 13, 40):
            for t in (0.5, 2.0):
                tr = trace_G_monotone(h, 2, 0.0, f, x, t, steps=50, H=H)
                worst, traces = min(worst, tr.worst_margin), traces + 1
    for seed, g, K, _ in finite_curvature_graphs(10, start=100):
        H = HeatOperator(g)
        f = random_functions(g, 1, seed)[0]
        for x in range(g.n):
            tr = trace_G_monotone(g, 2, K, f, x, 1.0, steps=50, H=H)
            worst, traces = min(worst, tr.worst_margin), traces + 1
    return worst >= -1e-8, f"{traces} traces (hex K=0 and 10 random graphs at exact K), worst step {worst:.3g}"


def criterion_8():
    ts = default_times()
    results = []
    h = hex_torus(6, 6)
    H = HeatOperator(h)
    signed = verify_decay_bounds(h, 2, 0.0, random_functions(h, 20, 8), ts, H=H)
    pos = verify_decay_bounds(h, 2, 0.0, random_functions(h, 20, 8, positive=True), ts, K_quadratic=0.0, H=H)
    results += [signed, pos]
    weighted = 0
    seed = 100
    while weighted < 6:
        g = random_weighted(7 + seed % 3, 0.6, seed)
        seed += 1
        if not _connected(g):
            continue
        K, _ = _finite_min_linear(g, 2)
        if not math.isfinite(K):
            continue
        # smallest K^q upper estimate: a conservative stand-in for the
        # hypothesis, since the bound only gets harder as K grows
        Kq = min(k_quadratic_estimate(g, x, y, 2, SWEEP_CFG).upper for x, y in all_pairs(g, 2))
        fs = random_functions(g, 20, seed, positive=True)
        results.append(verify_decay_bounds(g, 2, K, fs, ts, K_quadratic=Kq))
        weighted += 1
    worst = min(r.worst_margin for r in results)
    forms = sorted({k for r in results for k in r.meta["per_bound"]})
    return worst >= -1e-8, f"hex + {weighted} weighted graphs, forms {forms}, worst margin {worst:.3g}"


def criterion_9():
    h = hex_torus(6, 6)
    H = HeatOperator(h)
    traces = [harnack_check(h, 2, certify=True, H=H)]
    traces += [harnack_check(h, 2, rotation_seed=s, H=H) for s in range(3)]
    worst = min(t.worst_margin for t in traces)
    ok = worst >= -1e-8 and traces[0].meta["certified"] and abs(traces[0].meta["constant"] - 12 * math.e) < 1e-12
    return ok, f"{traces[0].grid.size} nonzero eigenpairs x 4 bases, constant 12e, worst margin {worst:.3g}"


def criterion_10():
    rng = np.random.default_rng(10)
    worst = dict(identity=0.0, composition=0.0, mass=0.0, positivity=0.0, symmetry=0.0)
    graphs = [random_weighted(n, p, 1000 + n) for n, p in ((10, 0.5), (40, 0.2), (120, 0.05), (200, 0.03))]
    graphs += [gnp(60, 0.1, 5), hex_torus(6, 6)]
    for g in graphs:
        H = HeatOperator(g)
        m = g.measure
        for _ in range(3):
            f, u = rng.normal(size=g.n), rng.normal(size=g.n)
            t, s = rng.uniform(0, 3, size=2)
            worst["identity"] = max(worst["identity"], np.max(np.abs(H.apply(0.0, f) - f)))
            comp = H.apply(t, H.apply(s, f)) - H.apply(t + s, f)
            worst["composition"] = max(worst["composition"], np.max(np.abs(comp)))
            worst["mass"] = max(worst["mass"], np.max(np.abs(H.apply(t, np.ones(g.n)) - 1)))
            neg = -np.min(H.apply(t, np.abs(f)))
            worst["positivity"] = max(worst["positivity"], neg)
            sym = np.dot(H.apply(t, f) * m, u) - np.dot(f * m, H.apply(t, u))
            worst["symmetry"] = max(worst["symmetry"], abs(sym))
    ok = all(v <= 1e-10 for v in worst.values())
    return ok, f"{len(graphs)} graphs (n <= 200): " + ", ".join(f"{k} {v:.1g}" for k, v in worst.items())


def criterion_11():
    rng = np.random.default_rng(11)
    pairs = np.exp(rng.uniform(-20, 20, size=(100_000, 2)))
    violations = sum(not log_inequality_check(float(a), float(b)) for a, b in pairs)
    return violations == 0, f"{len(pairs)} log-uniform pairs on [e^-20, e^20], {violations} violations"


def _cli(args, env_seed=None, cwd=None):
    env = dict(os.environ)
    env.pop("CURVGRAPH_SEED", None)
    if env_seed is not None:
        env["CURVGRAPH_SEED"] = str(env_seed)
    out = subprocess.run(
        [sys.executable, "-m", "curvgraph", *args], capture_output=True, env=env, cwd=cwd, check=False
    )
    return out.returncode, out.stdout


def criterion_12(tmp_dir):
    graph = os.path.join(tmp_dir, "g.json")
    code, data = _cli(["gen", "--family", "gnp", "--size", "9", "--p", "0.5", "--seed", "4"])
    with open(graph, "wb") as fh:
        fh.write(data)
    runs = [
        (["gen", "--family", "gnp", "--size", "9", "--p", "0.5", "--seed", "4"], None),
        (["curvature", "--graph", graph, "--variant", "quadratic", "--radius", "2", "--pair", "0,1", "--seed", "3", "--restarts", "2"], None),
        (["curvature", "--graph", graph, "--variant", "exponential", "--radius", "2", "--pair", "0,1", "--restarts", "2"], 5),
        (["verify", "--graph", graph, "--theorem", "linear", "--radius", "2", "--samples", "4"], 9),
        (["defect", "--graph", graph, "--radius", "2", "--all-pairs"], None),
    ]
    identical = 0
    for args, env_seed in runs:
        first = _cli(args, env_seed)
        second = _cli(args, env_seed)
        identical += first == second and first[0] in (0, 1) and len(first[1]) > 0
    return identical == len(runs), f"{identical}/{len(runs)} commands byte-identical across repeated runs"


# -- pytest wrappers ----------------------------------------------------------


def _record(log, number, result):
    ok, detail = result
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} | {detail}"
    log.append(line)
    print(line)
    assert ok, line


def test_criterion_01_hex_nonnegative_at_radius_two(acceptance_log):
    _record(acceptance_log, 1, criterion_1())


def test_criterion_02_hex_negative_at_radius_one(acceptance_log):
    _record(acceptance_log, 2, criterion_2())


def test_criterion_03_ollivier_dominates_linear(acceptance_log):
    _record(acceptance_log, 3, criterion_3())


def test_criterion_04_transport_suite(acceptance_log):
    _record(acceptance_log, 4, criterion_4())


def test_criterion_05_linear_gradient_estimate(acceptance_log):
    _record(acceptance_log, 5, criterion_5())


def test_criterion_06_single_edge(acceptance_log):
    _record(acceptance_log, 6, criterion_6())


def test_criterion_07_G_monotone(acceptance_log):
    _record(acceptance_log, 7, criterion_7())


def test_criterion_08_decay_bounds(acceptance_log):
    _record(acceptance_log, 8, criterion_8())


def test_criterion_09_harnack(acceptance_log):
    _record(acceptance_log, 9, criterion_9())


def test_criterion_10_semigroup_laws(acceptance_log):
    _record(acceptance_log, 10, criterion_10())


def test_criterion_11_log_inequality(acceptance_log):
    _record(acceptance_log, 11, criterion_11())


def test_criterion_12_cli_determinism(acceptance_log, tmp_path):
    _record(acceptance_log, 12, criterion_12(str(tmp_path)))


if __name__ == "__main__":
    import tempfile

    failures = 0
    for k in range(1, 13):
        fn = globals()[f"criterion_{k}"]
        if k == 12:
            with tempfile.TemporaryDirectory() as d:
                ok, detail = fn(d)
        else:
            ok, detail = fn()
        failures += not ok
        print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} | {detail}", flush=True)
    sys.exit(1 if failures else 0)
