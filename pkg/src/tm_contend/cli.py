"""``tm-contend`` command line entry point."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .engine import pending_commit_holds, run, validate_trace
from .model import WorkloadError, load_workload, save_workload
from .oracles import (
    DEFAULT_LIMIT,
    OracleLimitError,
    load_graph,
    lower_bound,
    optimal_makespan,
    reduce_coloring_to_scheduling,
    reduce_scheduling_to_coloring,
    save_graph,
)


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def cmd_gen(args) -> int:
    params = harness.GeneratorParams(
        n=args.n, s=args.s, beta_target=args.beta, read_only_fraction=args.read_only_frac,
        tau_min=args.tau_min, tau_max=args.tau_max,
        lambda_min=args.lambda_min, lambda_max=args.lambda_max, seed=args.seed,
    )
    save_workload(harness.generate(params), args.out)
    return 0


def cmd_run(args) -> int:
    w = load_workload(args.workload)
    policy = harness.make_policy(
        args.algo, w, args.seed, record_priorities=bool(args.dump_priorities or args.dump_r)
    )
    trace = run(w, policy)
    problems = validate_trace(w, trace)
    if args.trace:
        _write(args.trace, trace.to_json())
    if args.trace_csv:
        _write(args.trace_csv, trace.to_csv())
    dump = args.dump_priorities or args.dump_r
    if dump:
        _write(dump, json.dumps(policy.priority_log, indent=2) + "\n")
    summary = {
        "algorithm": args.algo,
        "seed": args.seed,
        "makespan": trace.makespan,
        "aborts": sum(r.abort_count for r in trace.records.values()),
        "pending_commit": pending_commit_holds(trace),
        "violations": problems,
    }
    print(json.dumps(summary, indent=2))
    return 0 if not problems else 1


def cmd_experiment(args) -> int:
    config_path = Path(args.config)
    config = json.loads(config_path.read_text())
    report = harness.run_experiment(config, base_dir=config_path.parent, jobs=args.jobs)
    report.write(args.out_dir)
    print(json.dumps(json.loads(report.to_json())["summary"], indent=2))
    return 0 if report.ok else 1


def cmd_oracle(args) -> int:
    w = load_workload(args.workload)
    out = {}
    if args.lower_bound:
        out["lower_bound"] = lower_bound(w).to_dict()
    if args.optimal:
        out["optimal_makespan"] = optimal_makespan(w, limit=args.limit)
    print(json.dumps(out, indent=2))
    return 0


def cmd_reduce(args) -> int:
    if args.graph:
        save_workload(reduce_coloring_to_scheduling(load_graph(args.graph)), args.out)
    else:
        save_graph(reduce_scheduling_to_coloring(load_workload(args.workload)), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tm-contend", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random workload file")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--s", type=int, default=8)
    p.add_argument("--beta", default="1/2", help="target balancing ratio, e.g. 1/2 or 0.25")
    p.add_argument("--read-only-frac", default="0")
    p.add_argument("--tau-min", type=int, default=1)
    p.add_argument("--tau-max", type=int, default=4)
    p.add_argument("--lambda-min", type=int, default=1)
    p.add_argument("--lambda-max", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="simulate one workload under one contention manager")
    p.add_argument("--algo", choices=harness.ALGORITHMS, required=True)
    p.add_argument("--workload", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the trace as JSON")
    p.add_argument("--trace-csv", help="write the trace as step,kind,loser,winner CSV")
    p.add_argument("--dump-priorities", help="clairvoyant: per-step high/low sets as JSON")
    p.add_argument("--dump-r", help="non-clairvoyant: per-step random priorities as JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run a configured sweep and write reports")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle", help="exact optimum or lower bounds for a workload")
    p.add_argument("--workload", required=True)
    p.add_argument("--optimal", action="store_true")
    p.add_argument("--lower-bound", action="store_true")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("reduce", help="graph coloring <-> unit transaction scheduling")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="edge-list graph to turn into a workload")
    src.add_argument("--workload", help="unit-duration workload to turn into a graph")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "oracle" and not (args.optimal or args.lower_bound):
        args.lower_bound = args.optimal = True
    try:
        return args.func(args)
    except (WorkloadError, OracleLimitError, ValueError) as exc:
        print(f"tm-contend: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
