"""Command-line entry point.

    mpplan plan [--config FILE] [--flow F] [--periods N] [--realizations R]
                [--seed S] [--oh X] [--out DIR] [--jobs J] [--snapshots]
    mpplan gen-demands [--config FILE] [--weights CSV] [--scale X] [--out FILE]
    mpplan dump-topology [--config FILE] [--out FILE]
    mpplan dump-catalog [--config FILE] [--out FILE]

Exit status is 0 on success, 2 on configuration or input errors and 1 on
planning errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import RunConfig, demands_csv, gravity_demands, load_config, load_weights, with_overrides
from .errors import ConfigError, OccupancyError, PlanningError, TopologyError
from .planner import run_flow
from .report import aggregate, compute_metrics, emit, flow_line
from .xcvr import catalog_csv, generate_catalog, preselect


def run_realization(cfg: RunConfig, flow: str, realization: int, keep_snapshots: bool = False):
    """One flow, one growth realization: ``(metrics per period, snapshot records or None)``."""
    topo = cfg.load_topology()
    initial = cfg.load_demands(topo)
    res = run_flow(flow, topo, initial, cfg.periods, cfg.growth(), cfg.plan_config(), realization)
    metrics = [compute_metrics(s) for s in res.snapshots]
    records = None
    if keep_snapshots:
        records = [json.dumps(r, sort_keys=True) for s in res.snapshots for r in s.records()]
    return metrics, records


def _task(args):
    return run_realization(*args)


def run_plan(cfg: RunConfig, jobs: int = 1, snapshots: bool = False, log=print) -> dict:
    """Run every selected flow over all realizations, emit files, return aggregates."""
    cfg.validate()
    # fail early on bad topology or demand input, before spawning workers
    cfg.load_demands(cfg.load_topology())
    tasks = [(cfg, f.value, r, snapshots) for f in cfg.flows() for r in range(cfg.realizations)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    aggregates = {}
    for f in cfg.flows():
        mine = [res for t, res in zip(tasks, results) if t[1] == f.value]
        aggregates[f.value] = aggregate([m for m, _ in mine], f.value)
        if snapshots:
            os.makedirs(os.path.join(cfg.out, "snapshots"), exist_ok=True)
            with open(os.path.join(cfg.out, "snapshots", f"{f.value}.jsonl"), "w", encoding="utf-8") as fh:
                for _, records in mine:
                    fh.writelines(line + "\n" for line in records)
    emit(aggregates, cfg.out)
    for agg in aggregates.values():
        log(flow_line(agg))
    return aggregates


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpplan", description="Multi-period C+L optical network planning.")
    sub = p.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="run planning flows and write reports")
    plan.add_argument("--config", help="YAML run configuration")
    plan.add_argument("--flow", choices=["all", "proactive", "incremental", "incremental_max"])
    plan.add_argument("--periods", type=int)
    plan.add_argument("--realizations", type=int)
    plan.add_argument("--seed", type=int)
    plan.add_argument("--oh", type=float, help="overhead on the final-traffic estimate")
    plan.add_argument("--out", help="output directory")
    plan.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    plan.add_argument("--snapshots", action="store_true", help="also write per-period snapshot records")

    gen = sub.add_parser("gen-demands", help="write a gravity demand matrix as CSV")
    gen.add_argument("--config")
    gen.add_argument("--weights", help="CSV with header node,weight")
    gen.add_argument("--scale", type=float)
    gen.add_argument("--seed", type=int, help="accepted for symmetry; the generator is deterministic")
    gen.add_argument("--out", help="output file (stdout if omitted)")

    for name, text in (("dump-topology", "print the parsed topology"),
                       ("dump-catalog", "print the pre-selected transceiver catalog as CSV")):
        d = sub.add_parser(name, help=text)
        d.add_argument("--config")
        d.add_argument("--out", help="output file (stdout if omitted)")
    return p


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "plan":
            jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
            if jobs < 1:
                raise ConfigError("--jobs must be >= 1")
            cfg = with_overrides(cfg, flow=args.flow, periods=args.periods, realizations=args.realizations,
                                 seed=args.seed, oh=args.oh, out=args.out)
            run_plan(cfg, jobs=jobs, snapshots=args.snapshots)
        elif args.command == "gen-demands":
            cfg = with_overrides(cfg, weights_file=args.weights, scale=args.scale).validate()
            topo = cfg.load_topology()
            _write(demands_csv(gravity_demands(topo, load_weights(cfg.weights_file), cfg.scale)), args.out)
        elif args.command == "dump-topology":
            _write(cfg.validate().load_topology().dump(), args.out)
        elif args.command == "dump-catalog":
            _write(catalog_csv(preselect(generate_catalog(cfg.xcvr))), args.out)
    except (ValueError, TopologyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PlanningError, OccupancyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
