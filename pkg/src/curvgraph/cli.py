"""Command line entry point: ``curvgraph {gen,curvature,defect,verify,spectrum}``.

Results go to stdout as canonical JSON (or CSV); diagnostics go to
stderr. Exit status is 0 on success, 1 when a verification fails and 2
on any input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .curvature_linear import all_pairs, edge_pairs, k_linear, k_ollivier
from .curvature_nonlinear import OptimizerConfig, k_exponential_estimate, k_quadratic_estimate
from .generators import FAMILIES, LatticeSpec, generate
from .graph_core import GraphError, WeightedGraph, load_graph
from .lp import LPError
from .semigroup import (
    HeatOperator,
    default_times,
    harnack_check,
    random_functions,
    spectrum,
    trace_G_monotone,
    verify_decay_bounds,
    verify_exponential_gradient_estimate,
    verify_linear_gradient_estimate,
    verify_quadratic_gradient_estimate,
)
from .transport import defect

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SEED_ENV = "CURVGRAPH_SEED"
THEOREMS = ("linear", "quadratic", "exponential", "decay", "gmono", "harnack")
CSV_COLUMNS = ("x", "y", "R", "variant", "value", "kind")


class InputError(Exception):
    """Bad command-line input; reported on one line with exit status 2."""


# -- canonical JSON ---------------------------------------------------------


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return "%.12g" % v


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats as ``%.12g``, non-finite floats as strings."""
    import json

    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + canonical_json(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def fingerprint(g: WeightedGraph) -> str:
    return hashlib.sha256(canonical_json(g.to_dict()).encode()).hexdigest()


def report(command, g, results, status, **extra) -> str:
    body = {
        "tool": "curvgraph",
        "version": __version__,
        "command": list(command),
        "graph": {"sha256": fingerprint(g), "n": g.n} if g is not None else None,
        "results": results,
        "status": status,
    }
    body.update(extra)
    return canonical_json(body) + "\n"


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _pair(text):
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y got {text!r}") from None
    return x, y


def _size(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    seed = _default_seed()
    p = _Parser(prog="curvgraph", description="Large-scale Ricci curvature on graphs.")
    p.add_argument("--version", action="version", version=f"curvgraph {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("gen", help="build a graph and print its JSON")
    s.add_argument("--family", required=True, choices=FAMILIES)
    s.add_argument("--size", required=True, type=_size)
    s.add_argument("--p", type=float)
    s.add_argument("--seed", type=int, default=seed)

    def graph_args(s, pairs=True):
        s.add_argument("--graph", required=True, help="graph JSON file")
        s.add_argument("--radius", type=int, default=1)
        if pairs:
            grp = s.add_mutually_exclusive_group(required=True)
            grp.add_argument("--pair", type=_pair)
            grp.add_argument("--all-pairs", action="store_true")
            s.add_argument("--jobs", type=int, default=1)

    s = sub.add_parser("curvature", help="curvature of one pair or all pairs")
    graph_args(s)
    s.add_argument("--variant", default="linear", choices=("linear", "ollivier", "quadratic", "exponential"))
    s.add_argument("--format", default="json", choices=("json", "csv"))
    s.add_argument("--restarts", type=int, default=3)
    s.add_argument("--r-count", type=int, default=33)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--witness", action="store_true", help="include witness functions in JSON")

    s = sub.add_parser("defect", help="transport-map defect")
    graph_args(s)

    s = sub.add_parser("verify", help="numerically check a gradient estimate")
    graph_args(s, pairs=False)
    s.add_argument("--theorem", required=True, choices=THEOREMS)
    s.add_argument("--K", default="auto", help="curvature hypothesis, a number or 'auto'")
    s.add_argument("--Kq", default="auto", help="hypothesis for the f log f decay form")
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--samples", type=int, default=20, help="number of random test functions")
    s.add_argument("--t", type=float, default=1.0, help="horizon for gmono")
    s.add_argument("--vertex", type=int, default=0, help="vertex for gmono")
    s.add_argument("--steps", type=int, default=50, help="s-grid steps for gmono")
    s.add_argument("--certify", action="store_true", help="harnack: confirm zero defects first")
    s.add_argument("--format", default="json", choices=("json", "csv"))
    s.add_argument("--csv-out", help="also write (t, margin) rows to this file")

    s = sub.add_parser("spectrum", help="eigenvalues of -Δ")
    s.add_argument("--graph", required=True)
    return p


# -- pair sweeps ----------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(data):
    _WORKER["g"] = WeightedGraph.from_dict(data)


def _compute(task):
    kind, x, y, radius, cfg, witness = task
    g = _WORKER["g"]
    if kind == "defect":
        return defect(g, y, x, radius).to_dict()
    if kind == "linear":
        return k_linear(g, x, y, radius).to_dict(with_witness=witness)
    if kind == "ollivier":
        return k_ollivier(g, x, y).to_dict(with_witness=witness)
    if kind == "quadratic":
        return k_quadratic_estimate(g, x, y, radius, cfg).to_dict(with_witness=witness)
    return k_exponential_estimate(g, x, y, radius, cfg).to_dict(with_witness=witness)


def sweep(g, tasks, jobs):
    """Evaluate tasks in order; ``jobs > 1`` uses worker processes but keeps the order."""
    if jobs <= 1 or len(tasks) < 2:
        _WORKER["g"] = g
        return [_compute(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(g.to_dict(),)) as ex:
        return list(ex.map(_compute, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _pairs(g, args, variant=None):
    if args.radius < 1:
        raise InputError("--radius must be at least 1")
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")
    if args.pair is not None:
        x, y = args.pair
        for v in (x, y):
            if not 0 <= v < g.n:
                raise InputError(f"vertex {v} out of range 0..{g.n - 1}")
        if variant == "ollivier":
            if g.weights[x, y] <= 0:
                raise InputError(f"({x}, {y}) is not an edge")
        elif x == y or g.distances_from(x)[y] > args.radius:
            raise InputError(f"pair ({x}, {y}) must satisfy 0 < d(x, y) <= {args.radius}")
        return [(x, y)]
    return edge_pairs(g) if variant == "ollivier" else all_pairs(g, args.radius)


# -- subcommands --------------------------------------------------------------


def _cmd_gen(args, argv, out):
    spec = LatticeSpec(args.family, args.size, p=args.p, seed=args.seed if args.family == "gnp" else None)
    g = generate(spec)
    out.write(canonical_json(g.to_dict()) + "\n")
    return EXIT_OK


def _cmd_curvature(args, argv, out):
    g = load_graph(args.graph)
    if args.variant == "ollivier" and args.radius != 1:
        raise InputError("the Ollivier variant is only defined at radius 1")
    pairs = _pairs(g, args, args.variant)
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed, r_count=args.r_count)
    tasks = [(args.variant, x, y, args.radius, cfg, args.witness) for x, y in pairs]
    results = sweep(g, tasks, args.jobs)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in results:
            w.writerow([r["x"], r["y"], r["R"], r["variant"], _fmt_float(r["value"]).strip('"'), r["kind"]])
        out.write(buf.getvalue())
    else:
        out.write(report(argv, g, results, "ok"))
    return EXIT_OK


def _cmd_defect(args, argv, out):
    g = load_graph(args.graph)
    tasks = [("defect", x, y, args.radius, None, False) for x, y in _pairs(g, args)]
    out.write(report(argv, g, sweep(g, tasks, args.jobs), "ok"))
    return EXIT_OK


def _hypothesis(g, radius, text, variant):
    """Curvature lower bound: a number, or 'auto' (exact for linear, certified otherwise)."""
    if text != "auto":
        try:
            return float(text)
        except ValueError:
            raise InputError(f"--K must be a number or 'auto', got {text!r}") from None
    pairs = all_pairs(g, radius)
    if variant == "linear":
        return min((k_linear(g, x, y, radius).value for x, y in pairs), default=math.inf)
    factor = 1.5 if variant == "quadratic" else 1.0
    worst = -math.inf
    for x, y in pairs:
        cert = defect(g, y, x, radius)
        if not cert.found:
            return -math.inf
        worst = max(worst, cert.defect)
    return -factor * worst if worst > 0 else 0.0


def _cmd_verify(args, argv, out):
    g = load_graph(args.graph)
    if args.radius < 1:
        raise InputError("--radius must be at least 1")
    if args.samples < 1:
        raise InputError("--samples must be at least 1")
    H = HeatOperator(g)
    ts = default_times()
    th = args.theorem
    extra = {}
    if th == "harnack":
        trace = harnack_check(g, args.radius, certify=args.certify, H=H)
    else:
        variant = {"quadratic": "quadratic", "exponential": "exponential"}.get(th, "linear")
        K = _hypothesis(g, args.radius, args.K, variant)
        extra["K"] = K
        if th == "linear":
            fs = random_functions(g, args.samples, args.seed)
            trace = verify_linear_gradient_estimate(g, args.radius, K, fs, ts, H=H)
        elif th == "quadratic":
            fs = random_functions(g, args.samples, args.seed, positive=True)
            trace = verify_quadratic_gradient_estimate(g, args.radius, K, fs, ts, H=H)
        elif th == "exponential":
            fs = random_functions(g, args.samples, args.seed, positive=True)
            trace = verify_exponential_gradient_estimate(g, args.radius, K, fs, ts, H=H)
        elif th == "gmono":
            if not 0 <= args.vertex < g.n:
                raise InputError(f"vertex {args.vertex} out of range 0..{g.n - 1}")
            if args.t < 0 or args.steps < 1:
                raise InputError("--t must be >= 0 and --steps >= 1")
            f = random_functions(g, 1, args.seed)[0]
            trace = trace_G_monotone(g, args.radius, K, f, args.vertex, args.t, args.steps, H=H)
        else:
            Kq = _hypothesis(g, args.radius, args.Kq, "quadratic")
            extra["Kq"] = Kq
            fs = random_functions(g, args.samples, args.seed, positive=True)
            trace = verify_decay_bounds(g, args.radius, K, fs, ts, K_quadratic=Kq, H=H)
    status = "pass" if trace.passed else "fail"
    rows = trace.rows()
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            _write_trace_csv(fh, th, rows)
    if args.format == "csv":
        _write_trace_csv(out, th, rows)
    else:
        out.write(report(argv, g, [trace.to_dict()], status, **extra))
    return EXIT_OK if trace.passed else EXIT_FAIL


def _write_trace_csv(fh, theorem, rows):
    fh.write(("s" if theorem == "gmono" else "lambda" if theorem == "harnack" else "t") + ",margin\n")
    for a, b in rows:
        fh.write(f"{_fmt_float(a).strip(chr(34))},{_fmt_float(b).strip(chr(34))}\n")


def _cmd_spectrum(args, argv, out):
    g = load_graph(args.graph)
    out.write(report(argv, g, [float(v) for v in spectrum(g)], "ok"))
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "curvature": _cmd_curvature,
    "defect": _cmd_defect,
    "verify": _cmd_verify,
    "spectrum": _cmd_spectrum,
}


def run(argv=None, out=None, err=None) -> int:
    """Execute one command; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.cmd](args, argv, out)
    except (InputError, GraphError, OSError, ValueError) as exc:
        err.write(f"curvgraph: error: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}\n")
        return EXIT_INPUT
    except LPError as exc:
        err.write(f"curvgraph: solver failure: {str(exc).splitlines()[0]}\n")
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())
