"""Command-line interface: solve, path, sweep, repro-edpp, lambda-max.

Structured results go to JSON, plot-ready matrices to CSV.  All reals
are serialized with 17 significant digits so a double round-trips
losslessly.  ``--no-timing`` drops wall-clock columns so that repeated
runs produce byte-identical CSV bodies.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import _backend
from .datasets import (
    Dataset,
    edpp_counterexample,
    load_csv_dense,
    load_svmlight,
    make_synthetic,
    model_from_labels,
)
from .models import ModelSpec, ProblemInstance, lambda_max, loss_value
from .path import PathConfig, active_fraction_sweep, lambda_grid, solve_path
from .solver import RULE_EDPP_UNSAFE, RULE_GAP, RULES, SolverConfig, solve

SCHEMA_VERSION = 1


def _fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _add_data_args(p):
    p.add_argument("--model", choices=("lasso", "mtl", "logreg", "multinomial"),
                   default="lasso")
    p.add_argument("--data", help="svmlight or CSV input file")
    p.add_argument("--format", choices=("auto", "svmlight", "csv"), default="auto")
    p.add_argument("--label-column", type=int, default=0,
                   help="CSV column holding the target (default 0)")
    p.add_argument("--label-columns",
                   help="comma-separated CSV columns for multi-task targets")
    p.add_argument("--synthetic", action="store_true",
                   help="generate data instead of reading a file")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=500)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--n-nonzero", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def _add_solver_args(p):
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--relative-eps", action="store_true",
                   help="scale --eps by max(1, primal value at zero)")
    p.add_argument("--max-epochs", type=int, default=100_000)
    p.add_argument("--screen-every", type=int, default=10)
    p.add_argument("--rule",
                   choices=("none", "static", "gap", "edpp-seeded", "unsafe-a", "unsafe-b"),
                   default="gap")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock columns (for byte-stable outputs)")


def _load_problem(args):
    if args.synthetic:
        X, model, _ = make_synthetic(
            args.model, args.n, args.p, q=args.q, n_nonzero=args.n_nonzero,
            noise=args.noise, density=args.density, amplitude=args.amplitude,
            seed=args.seed,
        )
        return X, model
    if not args.data:
        raise SystemExit("either --data or --synthetic is required")
    fmt = args.format
    if fmt == "auto":
        fmt = "csv" if args.data.lower().endswith(".csv") else "svmlight"
    if fmt == "csv":
        cols = None
        if args.label_columns:
            cols = [int(c) for c in args.label_columns.split(",")]
        ds = load_csv_dense(args.data, label_column=args.label_column,
                            label_columns=cols)
    else:
        ds = load_svmlight(args.data)
    return ds.X, model_from_labels(args.model, ds.labels)


def _solver_config(args, model, rule=None):
    eps = args.eps
    if args.relative_eps:
        eps *= max(1.0, loss_value(model, np.zeros((model.n, model.q))))
    rule = rule if rule is not None else args.rule
    if rule in ("unsafe-a", "unsafe-b"):
        rule = RULE_EDPP_UNSAFE
    return SolverConfig(gap_tolerance=eps, max_epochs=args.max_epochs,
                        screen_every=args.screen_every, rule=rule)


def _config_echo(args, extra=None):
    echo = {k.replace("_", "-"): v for k, v in vars(args).items() if k != "func"}
    echo["backend"] = _backend.active_name()
    if extra:
        echo.update(extra)
    return echo


def _trace_rows(point_index, lam, events):
    for ev in events:
        yield (point_index, lam, ev.epoch, ev.gap, ev.radius,
               ev.n_screened_new, ev.n_active_after)


def cmd_lambda_max(args):
    X, model = _load_problem(args)
    print(_fmt(lambda_max(model, X)))
    return 0


def cmd_solve(args):
    X, model = _load_problem(args)
    lam = args.lam
    if lam is None:
        lam = args.lambda_ratio * lambda_max(model, X)
    cfg = _solver_config(args, model)
    prob = ProblemInstance(X, model, lam)
    res = solve(prob, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    nz = {int(j): res.B[j].tolist() for j in np.flatnonzero(np.any(res.B != 0, axis=1))}
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": _config_echo(args, {"lambda": lam}),
        "result": {
            "gap": res.gap,
            "cert_gap": res.cert_gap,
            "epochs": res.epochs_run,
            "converged": res.converged,
            "n_active": res.active.n_active,
            "p": X.p,
            "q": model.q,
            "nonzero_rows": nz,
        },
    }
    _write_json(os.path.join(args.out_dir, "solve.json"), payload)
    _write_csv(
        os.path.join(args.out_dir, "solve_trace.csv"),
        ["point", "lambda", "epoch", "gap", "radius", "n_screened_new", "n_active_after"],
        _trace_rows(0, lam, res.events),
    )
    print(f"gap={_fmt(res.gap)} epochs={res.epochs_run} "
          f"n_active={res.active.n_active} converged={res.converged}")
    return 0


def _path_config(args, model, rule=None):
    variant = "b" if args.rule == "unsafe-b" else "a"
    return PathConfig(
        n_points=args.n_lambdas,
        delta=args.delta,
        solver=_solver_config(args, model, rule=rule),
        unsafe_variant=variant,
    )


def _path_rows(pres, with_timing, with_true_gap):
    for pt in pres.points:
        row = [pt.lam, pt.gap, pt.epochs, pt.n_active, int(pt.converged), pt.failure]
        if with_true_gap:
            row.append(pt.true_gap)
        if with_timing:
            row.append(pt.wall_s * 1e3)
        yield row


def cmd_path(args):
    X, model = _load_problem(args)
    pcfg = _path_config(args, model)
    pres = solve_path(X, model, pcfg)
    os.makedirs(args.out_dir, exist_ok=True)
    unsafe = args.rule.startswith("unsafe")
    rows_json = []
    for pt in pres.points:
        row = {
            "lambda": pt.lam,
            "gap": pt.gap,
            "epochs": pt.epochs,
            "n_active": pt.n_active,
            "converged": pt.converged,
            "failure": pt.failure,
        }
        if unsafe:
            row["true_gap"] = pt.true_gap
        if not args.no_timing:
            row["wall_ms"] = pt.wall_s * 1e3
        rows_json.append(row)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": _config_echo(args),
        "rows": rows_json,
    }
    if not args.no_timing:
        payload["total_wall_s"] = pres.total_wall_s
    _write_json(os.path.join(args.out_dir, "path_report.json"), payload)
    header = ["lambda", "gap", "epochs", "n_active", "converged", "failure"]
    if unsafe:
        header.append("true_gap")
    if not args.no_timing:
        header.append("wall_ms")
    _write_csv(os.path.join(args.out_dir, "path_points.csv"), header,
               _path_rows(pres, not args.no_timing, unsafe))
    trace_path = os.path.join(args.out_dir, "path_trace.csv")
    with open(trace_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point", "lambda", "epoch", "gap", "radius",
                    "n_screened_new", "n_active_after"])
        for t, res in enumerate(pres.results):
            for row in _trace_rows(t, pres.points[t].lam, res.events):
                w.writerow([_fmt(v) for v in row])
    with open(os.path.join(args.out_dir, "path_coefs.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point", "lambda", "row", "col", "value"])
        for t, res in enumerate(pres.results):
            for j in np.flatnonzero(np.any(res.B != 0.0, axis=1)):
                for k in range(res.B.shape[1]):
                    w.writerow([t, _fmt(pres.points[t].lam), j, k, _fmt(res.B[j, k])])
    n_fail = sum(1 for pt in pres.points if pt.failure)
    print(f"path: {len(pres.points)} points, {n_fail} failures, "
          f"total {pres.total_wall_s:.3f}s")
    return 0


def cmd_sweep(args):
    X, model = _load_problem(args)
    budgets = tuple(int(b) for b in args.budget_list.split(","))
    pcfg = _path_config(args, model, rule=RULE_GAP)
    pcfg.budgets = budgets
    sres = active_fraction_sweep(X, model, pcfg)
    os.makedirs(args.out_dir, exist_ok=True)
    header = ["lambda"] + [f"K{b}" for b in budgets]
    rows = (
        [sres.lambdas[t]] + list(sres.fractions[t])
        for t in range(len(sres.lambdas))
    )
    _write_csv(os.path.join(args.out_dir, "sweep.csv"), header, rows)
    print(f"sweep: {len(sres.lambdas)} lambdas x {len(budgets)} budgets")
    return 0


def cmd_repro_edpp(args):
    """Run the counterexample path under the safe dynamic rule and both
    unsafe sequential variants over a small grid of path shapes."""
    X, y = edpp_counterexample()
    model = ModelSpec.lasso(y)
    os.makedirs(args.out_dir, exist_ok=True)
    rows = []
    n_failures = {}
    for n_points in (20, 50, 100):
        for delta in (1.5, 2.0, 3.0):
            for rule in ("gap", "unsafe-a", "unsafe-b"):
                solver_rule = RULE_GAP if rule == "gap" else RULE_EDPP_UNSAFE
                pcfg = PathConfig(
                    n_points=n_points,
                    delta=delta,
                    solver=SolverConfig(gap_tolerance=args.eps,
                                        max_epochs=args.max_epochs,
                                        rule=solver_rule),
                    unsafe_variant="b" if rule == "unsafe-b" else "a",
                )
                pres = solve_path(X, model, pcfg)
                for t, pt in enumerate(pres.points):
                    rows.append([n_points, delta, rule, t, pt.lam, pt.gap,
                                 pt.true_gap, pt.failure])
                key = (n_points, delta, rule)
                n_failures[key] = sum(1 for pt in pres.points if pt.failure)
    _write_csv(
        os.path.join(args.out_dir, "repro_edpp.csv"),
        ["n_lambdas", "delta", "rule", "point", "lambda", "final_gap",
         "true_gap", "failure"],
        rows,
    )
    for key, nf in sorted(n_failures.items()):
        if nf:
            print(f"T={key[0]} delta={key[1]} rule={key[2]}: {nf} failing point(s)")
    total_unsafe = sum(v for k, v in n_failures.items() if k[2] != "gap")
    total_gap = sum(v for k, v in n_failures.items() if k[2] == "gap")
    print(f"unsafe failures: {total_unsafe}; safe-rule failures: {total_gap}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="glmscreen",
        description="l1/l1-l2 regularized GLM solvers with safe screening",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lambda-max", help="print the critical regularization")
    _add_data_args(p)
    p.set_defaults(func=cmd_lambda_max)

    p = sub.add_parser("solve", help="solve a single problem instance")
    _add_data_args(p)
    _add_solver_args(p)
    p.add_argument("--lambda", dest="lam", type=float,
                   help="absolute regularization strength")
    p.add_argument("--lambda-ratio", type=float, default=0.1,
                   help="fraction of lambda_max when --lambda is absent")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("path", help="solve a warm-started regularization path")
    _add_data_args(p)
    _add_solver_args(p)
    p.add_argument("--delta", type=float, default=3.0)
    p.add_argument("--n-lambdas", type=int, default=100)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("sweep", help="active fraction per (lambda, epoch budget)")
    _add_data_args(p)
    _add_solver_args(p)
    p.add_argument("--delta", type=float, default=3.0)
    p.add_argument("--n-lambdas", type=int, default=100)
    p.add_argument("--budget-list", default="2,8,32,128,512,2048")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("repro-edpp",
                       help="counterexample runs for the sequential rule")
    p.add_argument("--eps", type=float, default=10 ** -1.5)
    p.add_argument("--max-epochs", type=int, default=10_000)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_repro_edpp)

    return parser


def run_command(argv):
    args = build_parser().parse_args(argv)
    return args.func(args)


def main(argv=None):
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
