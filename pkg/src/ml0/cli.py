"""Command line interface: generate data, train, evaluate, and benchmark.

Commands
--------
gen    write a synthetic planted-block dataset plus a JSON sidecar
train  fit weights on a dataset file; writes weights, trace CSV, sidecar
eval   score a weights file on a dataset; prints metrics JSON
bench  repeat train/eval across seeds and schedules; emits a CSV report

Exit codes: 0 success, 2 usage error, 1 runtime or data error.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .data import (
    FormatError,
    SyntheticConfig,
    generate_synthetic,
    load_dataset,
    load_params,
    save_dataset,
    save_params,
    split,
)
from .metrics import accuracy, auc
from .model import Problem, margin_batch, objective
from .solver import SolverConfig, random_init, run, write_trace_csv

SCHEDULE_NAMES = {"apalm+": "adaptive", "apalm": "nesterov", "bpgd": "none"}


def _add_solver_flags(sub):
    sub.add_argument("--t", type=float, default=1.3, help="momentum growth/decay factor")
    sub.add_argument("--beta1", type=float, default=0.6, help="initial momentum factor")
    sub.add_argument("--beta-max", type=float, default=0.9999, help="momentum cap")
    sub.add_argument("--gamma", type=float, default=1.5, help="step-size inflation factor")
    sub.add_argument("--lambda", dest="lam", type=float, action="append",
                     help="ridge weight; repeat once per block or give once to broadcast "
                          "(default: 2e-4)")
    sub.add_argument("--sparsity-frac", type=float, default=0.30,
                     help="per-block nonzero budget as a fraction of the block length")
    sub.add_argument("--tol-obj", type=float, default=1e-5, help="objective-change tolerance")
    sub.add_argument("--tol-grad", type=float, default=1e-4, help="gradient-change tolerance")
    sub.add_argument("--max-iters", type=int, default=2000)
    sub.add_argument("--max-seconds", type=float, default=60.0)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--no-wall-time", action="store_true",
                     help="record 0.0 for elapsed times so outputs are byte-reproducible")


def _resolve_problem(args, dims):
    p = len(dims)
    lam = args.lam if args.lam else [2e-4]
    if len(lam) == 1:
        lam = lam * p
    if len(lam) != p:
        raise ValueError(f"got {len(lam)} ridge weights for {p} blocks")
    if not 0.0 < args.sparsity_frac <= 1.0:
        raise ValueError(f"sparsity fraction must lie in (0, 1], got {args.sparsity_frac}")
    sparsity = [max(1, math.ceil(args.sparsity_frac * d)) for d in dims]
    return Problem(ridge=tuple(lam), sparsity=tuple(sparsity), gamma=args.gamma)


def _solver_config(args, schedule, seed=None):
    return SolverConfig(
        schedule=SCHEDULE_NAMES[schedule],
        t=args.t,
        beta1=args.beta1 if SCHEDULE_NAMES[schedule] == "adaptive" else 0.0,
        beta_max=args.beta_max,
        gamma=args.gamma,
        tol_obj=args.tol_obj,
        tol_grad=args.tol_grad,
        max_iters=args.max_iters,
        max_seconds=args.max_seconds,
        seed=args.seed if seed is None else seed,
    )


def _config_dump(args, problem, config, extra=None):
    dump = {
        "t": config.t,
        "beta1": config.beta1,
        "beta_max": config.beta_max,
        "gamma": config.gamma,
        "lambda": list(problem.ridge),
        "sparsity": list(problem.sparsity),
        "sparsity_frac": args.sparsity_frac,
        "tol_obj": config.tol_obj,
        "tol_grad": config.tol_grad,
        "max_iters": config.max_iters,
        "max_seconds": config.max_seconds,
        "seed": config.seed,
    }
    if extra:
        dump.update(extra)
    return dump


def _write_sidecar(path, payload):
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_gen(args):
    cfg = SyntheticConfig(
        rows=args.rows,
        cols=args.cols,
        block=args.block,
        per_class=args.per_class,
        margin=args.margin,
        seed=args.seed,
    )
    ds, (v1, v2) = generate_synthetic(cfg)
    save_dataset(ds, args.output)
    _write_sidecar(args.output, {
        "command": "gen",
        "config": {
            "rows": cfg.rows, "cols": cfg.cols, "block": cfg.block,
            "per_class": cfg.per_class, "margin": cfg.margin, "seed": cfg.seed,
        },
        "ground_truth": {"v1": v1.tolist(), "v2": v2.tolist()},
    })
    print(f"wrote {ds.n} samples of shape {tuple(ds.feature_dims)} to {args.output}")
    return 0


def cmd_train(args):
    ds = load_dataset(args.dataset)
    dims = ds.feature_dims
    problem = _resolve_problem(args, dims)
    config = _solver_config(args, args.schedule)
    init = random_init(dims, problem.sparsity, seed=config.seed)
    time_source = (lambda: 0.0) if args.no_wall_time else None

    result = run(problem, ds, init, config, time_source=time_source)

    save_params(result.params, args.output)
    trace_path = args.trace if args.trace else str(args.output) + ".trace.csv"
    write_trace_csv(result.trace, trace_path)
    dump = _config_dump(args, problem, config, extra={
        "command": "train",
        "schedule": args.schedule,
        "dataset": str(args.dataset),
        "stop_reason": result.stop_reason,
        "iterations": len(result.trace),
        "final_objective": result.trace[-1].objective if result.trace else None,
    })
    _write_sidecar(args.output, dump)
    print("config: " + json.dumps(dump, sort_keys=True))
    final_obj = result.trace[-1].objective if result.trace else math.nan
    print(f"final objective: {final_obj:.17g}")
    print(f"iterations: {len(result.trace)}")
    print(f"stop reason: {result.stop_reason}")
    return 0


def _load_model_sidecar(model_path):
    try:
        with open(str(model_path) + ".json", "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValueError(
            f"missing sidecar {model_path}.json (needed for the ridge/sparsity settings)"
        ) from None


def cmd_eval(args):
    params = load_params(args.model)
    ds = load_dataset(args.dataset)
    if params.block_dims() != ds.feature_dims:
        raise ValueError(
            f"model dims {params.block_dims()} do not match dataset dims {ds.feature_dims}"
        )
    sidecar = _load_model_sidecar(args.model)
    problem = Problem(
        ridge=tuple(sidecar["lambda"]),
        sparsity=tuple(sidecar["sparsity"]),
        gamma=sidecar["gamma"],
    )
    m = margin_batch(ds.X, params.blocks, params.bias)
    report = {
        "accuracy": accuracy(m, ds.y),
        "auc": auc(m, ds.y),
        "n": ds.n,
        "objective": objective(params, ds, problem),
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _fmt(x):
    return f"{x:.17g}"


def _mean_std(values):
    mean = float(np.mean(values))
    std = float(np.std(values)) if len(values) > 1 else 0.0
    return f"{mean:.6g}+-{std:.6g}"


def cmd_bench(args):
    schedules = [s.strip() for s in args.schedules.split(",") if s.strip()]
    for s in schedules:
        if s not in SCHEDULE_NAMES:
            raise ValueError(f"unknown schedule {s!r}; choose from {sorted(SCHEDULE_NAMES)}")
    if args.runs < 1:
        raise ValueError("--runs must be >= 1")
    if args.runs < 2:
        print("warning: fewer than 2 runs, std reported as 0", file=sys.stderr)

    ds = load_dataset(args.dataset)
    dims = ds.feature_dims
    problem = _resolve_problem(args, dims)
    time_source = (lambda: 0.0) if args.no_wall_time else None

    header = "schedule,run,seed,objective,iterations,seconds,accuracy,auc,stop_reason"
    lines = [header]
    per_schedule = {s: [] for s in schedules}
    for r in range(args.runs):
        seed = args.seed + r
        train_ds, test_ds = split(ds, args.train_frac, seed=seed)
        init = random_init(dims, problem.sparsity, seed=seed)
        for name in schedules:
            config = _solver_config(args, name, seed=seed)
            result = run(problem, train_ds, init, config, time_source=time_source)
            m = margin_batch(test_ds.X, result.params.blocks, result.params.bias)
            row = {
                "objective": result.trace[-1].objective if result.trace else math.nan,
                "iterations": len(result.trace),
                "seconds": result.trace[-1].elapsed_seconds if result.trace else 0.0,
                "accuracy": accuracy(m, test_ds.y),
                "auc": auc(m, test_ds.y),
            }
            per_schedule[name].append(row)
            lines.append(
                f"{name},{r},{seed},{_fmt(row['objective'])},{row['iterations']},"
                f"{_fmt(row['seconds'])},{_fmt(row['accuracy'])},{_fmt(row['auc'])},"
                f"{result.stop_reason}"
            )
    for name in schedules:
        rows = per_schedule[name]
        lines.append(
            f"{name},mean+-std,,{_mean_std([r['objective'] for r in rows])},"
            f"{_mean_std([r['iterations'] for r in rows])},"
            f"{_mean_std([r['seconds'] for r in rows])},"
            f"{_mean_std([r['accuracy'] for r in rows])},"
            f"{_mean_std([r['auc'] for r in rows])},"
        )
    report = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(report)
        _write_sidecar(args.output, _config_dump(
            args, problem, _solver_config(args, schedules[0]), extra={
                "command": "bench",
                "dataset": str(args.dataset),
                "schedules": schedules,
                "runs": args.runs,
                "train_frac": args.train_frac,
            }))
        print(f"wrote {args.output}")
    else:
        print(report, end="")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ml0",
        description="Sparse multilinear logistic regression trainer and benchmark harness.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a synthetic planted-block dataset")
    gen.add_argument("--rows", type=int, default=200)
    gen.add_argument("--cols", type=int, default=200)
    gen.add_argument("--block", type=int, default=20, help="planted block side length")
    gen.add_argument("--per-class", type=int, default=500)
    gen.add_argument("--margin", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", required=True, help="dataset file to write")
    gen.set_defaults(func=cmd_gen)

    train = subs.add_parser("train", help="fit weights on a dataset file")
    train.add_argument("dataset", help="dataset file")
    train.add_argument("-o", "--output", required=True, help="weights file to write")
    train.add_argument("--trace", help="trace CSV path (default: OUTPUT.trace.csv)")
    train.add_argument("--schedule", choices=sorted(SCHEDULE_NAMES), default="apalm+",
                       help="momentum schedule (default: apalm+)")
    _add_solver_flags(train)
    train.set_defaults(func=cmd_train)

    ev = subs.add_parser("eval", help="score a weights file on a dataset")
    ev.add_argument("model", help="weights file")
    ev.add_argument("dataset", help="dataset file")
    ev.add_argument("-o", "--output", help="also write the metrics JSON here")
    ev.set_defaults(func=cmd_eval)

    bench = subs.add_parser("bench", help="compare schedules across repeated seeded runs")
    bench.add_argument("dataset", help="dataset file")
    bench.add_argument("--schedules", default="apalm+,bpgd",
                       help="comma-separated subset of apalm+,apalm,bpgd")
    bench.add_argument("--runs", type=int, default=10)
    bench.add_argument("--train-frac", type=float, default=0.8)
    bench.add_argument("-o", "--output", help="report CSV path (default: stdout)")
    _add_solver_flags(bench)
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
