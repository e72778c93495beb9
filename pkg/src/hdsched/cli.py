"""Command-line interface.

Subcommands: gen (make a network file), solve (optimize a schedule),
mincut (bottleneck cut under a schedule), group (grouping and tree
decomposition report), compare (baseline ratios), bench (experiment sweeps).
Exit codes: 0 success, 1 usage error, 2 domain/solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import bench as bench_mod
from .baselines import full_duplex_bound, hd_fd_ratio, naive_schedule, simple_random_schedule
from .grouping import (
    NodeGrouping,
    build_clique_graph,
    check_coverage_exhaustive,
    check_sufficient_conditions,
    heuristic_grouping,
    tree_decompose,
)
from .network import gen_layered, gen_line_two_hop
from .serialize import (
    group_schedule_from_json,
    group_schedule_to_json,
    network_from_json,
    network_to_json,
    schedule_from_json,
    schedule_to_json,
)
from .sfm import CutObjective, GroundSetTooLarge, min_cut
from .solve import ObjectiveSpec, RATE_MAX, duty_min, solve_dense, solve_grouped, solve_grouped_lindet


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise _UsageError(message)


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _int_list(raw: str) -> list[int]:
    try:
        return [int(x) for x in raw.split(",") if x]
    except ValueError:
        raise _UsageError(f"expected a comma-separated integer list, got {raw!r}") from None


def _float_list(raw: str) -> list[float]:
    try:
        return [float(x) for x in raw.split(",") if x]
    except ValueError:
        raise _UsageError(f"expected a comma-separated number list, got {raw!r}") from None


def _cmd_gen(args) -> int:
    if args.family == "layered":
        if not args.widths:
            raise _UsageError("--widths is required for the layered family")
        net = gen_layered(
            _int_list(args.widths), gains=args.gains, power=args.power, k=args.k, p=args.p, seed=args.seed
        )
    elif args.family == "line2hop":
        if args.n is None:
            raise _UsageError("--n is required for the line2hop family")
        net = gen_line_two_hop(args.n, gains=args.gains, power=args.power, k=args.k, p=args.p, seed=args.seed)
    else:
        raise _UsageError(f"unknown family {args.family!r}")
    _emit(network_to_json(net), args.out)
    return 0


def _objective_from(args) -> ObjectiveSpec:
    if args.mu1 is not None or args.mu2 is not None:
        if args.mu1 is None or args.mu2 is None:
            raise _UsageError("--mu1 and --mu2 must be given together")
        return ObjectiveSpec(args.mu1, args.mu2, args.c_min or 0.0)
    if args.objective == "rate":
        return RATE_MAX
    if args.c_min is None:
        raise _UsageError("--c-min is required with --objective duty")
    return duty_min(args.c_min)


def _cmd_solve(args) -> int:
    net = network_from_json(_read(args.net))
    objective = _objective_from(args)
    t0 = time.perf_counter()
    if args.solver == "dense":
        res = solve_dense(net, objective, cap=args.cap)
    elif args.solver == "grouped":
        res = solve_grouped(net, objective=objective, verify=not args.no_verify)
    else:
        res = solve_grouped_lindet(net, verify=not args.no_verify)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    doc = {
        "solver": args.solver,
        "objective": {"mu1": objective.mu1, "mu2": objective.mu2, "c_min": objective.c_min},
        "status": res.status,
        "rate": res.rate,
        "t_tot": res.t_tot,
        "iterations": res.iterations,
        "active_cuts": [sorted(c.members) for c in res.active_cuts],
        "wall_ms": wall_ms,
    }
    if res.schedule is not None:
        sched_json = (
            schedule_to_json(res.schedule) if args.solver == "dense" else group_schedule_to_json(res.schedule)
        )
        doc["schedule"] = json.loads(sched_json)
        if args.schedule_out:
            with open(args.schedule_out, "w") as fh:
                fh.write(sched_json)
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if res.status == "optimal" else 2


def _cmd_mincut(args) -> int:
    net = network_from_json(_read(args.net))
    if args.schedule:
        weights = schedule_from_json(_read(args.schedule))
    elif args.group_schedule:
        weights = group_schedule_from_json(_read(args.group_schedule))
    else:
        weights = None  # full duplex
    res = min_cut(CutObjective(net, weights), method=args.method, eps=args.eps)
    doc = {
        "omega": sorted(res.omega.members),
        "value": res.value,
        "method": res.method,
        "certificate_gap": res.certificate_gap,
        "iterations": res.iterations,
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_group(args) -> int:
    net = network_from_json(_read(args.net))
    grouping = heuristic_grouping(net)
    ok, violations = check_sufficient_conditions(net, grouping)
    td = tree_decompose(build_clique_graph(net, grouping))
    try:
        exhaustive = check_coverage_exhaustive(net, grouping)
    except GroundSetTooLarge:
        exhaustive = None
    doc = {
        "groups": [list(g) for g in grouping.groups],
        "sufficient_ok": ok,
        "violations": violations,
        "coverage_exhaustive": exhaustive,
        "bags": [list(b) for b in td.bags],
        "tree_edges": [list(e) for e in td.tree_edges],
        "width": td.width,
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_compare(args) -> int:
    net = network_from_json(_read(args.net))
    fd = full_duplex_bound(net)
    res = solve_grouped(net, objective=RATE_MAX, verify=False)
    doc = {
        "full_duplex": fd,
        "naive": hd_fd_ratio(net, naive_schedule(net)),
        "simple_random": hd_fd_ratio(net, simple_random_schedule(net, seed=args.seed)),
        "optimized": res.rate / fd,
        "seed": args.seed,
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_bench(args) -> int:
    spec = bench_mod.ExperimentSpec(
        kind=args.kind,
        layer_counts=tuple(_int_list(args.layers)),
        width=args.width,
        gains=args.gains,
        powers=tuple(_float_list(args.powers)),
        trials=args.trials,
        seed=args.seed,
        solvers=tuple(args.solvers.split(",")),
        dense_cap=args.cap,
        c_min_points=args.c_min_points,
    )
    rows = bench_mod.run_experiment(spec)
    text = bench_mod.rows_to_csv(rows) if args.format == "csv" else bench_mod.rows_to_json(rows)
    _emit(text, args.out)
    return 0


def _build_parser() -> _Parser:
    p = _Parser(prog="hdsched", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a network JSON file")
    g.add_argument("--family", choices=("layered", "line2hop"), required=True)
    g.add_argument("--widths", help="comma-separated layer widths (layered)")
    g.add_argument("--n", type=int, help="node count (line2hop)")
    g.add_argument("--gains", default="unit", choices=("unit", "gaussian", "complex_gaussian", "shift"))
    g.add_argument("--power", type=float, default=1.0)
    g.add_argument("--k", type=int, default=2, help="signal length for shift gains")
    g.add_argument("--p", type=int, default=2, help="field prime for shift gains")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out")
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="optimize a schedule for a network file")
    s.add_argument("--net", required=True)
    s.add_argument("--solver", choices=("dense", "grouped", "grouped-lindet"), default="grouped")
    s.add_argument("--objective", choices=("rate", "duty"), default="rate")
    s.add_argument("--c-min", dest="c_min", type=float)
    s.add_argument("--mu1", type=float, help="rate weight (overrides --objective)")
    s.add_argument("--mu2", type=float, help="duty weight (overrides --objective)")
    s.add_argument("--cap", type=int, default=12, help="dense solver node cap")
    s.add_argument("--no-verify", action="store_true", help="skip grouping coverage checks")
    s.add_argument("--schedule-out", help="also write the schedule alone to this file")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_solve)

    m = sub.add_parser("mincut", help="bottleneck cut under a schedule (or full duplex)")
    m.add_argument("--net", required=True)
    m.add_argument("--schedule", help="joint schedule JSON")
    m.add_argument("--group-schedule", help="group schedule JSON")
    m.add_argument("--method", choices=("auto", "brute", "min_norm"), default="auto")
    m.add_argument("--eps", type=float, default=1e-7)
    m.add_argument("--out")
    m.set_defaults(func=_cmd_mincut)

    gr = sub.add_parser("group", help="grouping heuristic and tree decomposition report")
    gr.add_argument("--net", required=True)
    gr.add_argument("--out")
    gr.set_defaults(func=_cmd_group)

    c = sub.add_parser("compare", help="baseline vs optimized ratio report")
    c.add_argument("--net", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=_cmd_compare)

    b = sub.add_parser("bench", help="experiment sweeps (CSV or JSON rows)")
    b.add_argument("--kind", choices=("timing", "duty", "ratio", "single"), required=True)
    b.add_argument("--layers", default="4", help="comma-separated layer counts")
    b.add_argument("--width", type=int, default=2)
    b.add_argument("--gains", default="complex_gaussian")
    b.add_argument("--powers", default="1.0", help="comma-separated transmit powers")
    b.add_argument("--trials", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--solvers", default="dense,grouped")
    b.add_argument("--cap", type=int, default=12)
    b.add_argument("--c-min-points", dest="c_min_points", type=int, default=20)
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--out")
    b.set_defaults(func=_cmd_bench)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # domain/solver failures
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
