"""Experiment harness: timing sweeps, duty curves, scheduler comparisons.

Each run function takes an ExperimentSpec and returns a list of flat row
dicts ready for CSV or JSON. Rows carry the spec seed, the per-instance
child seed, and the build stamp (git describe when available) so results
can be reproduced from the row alone. All randomness flows from the spec
seed; trials run sequentially and rows come out in deterministic order.
"""

from __future__ import annotations

import csv
import io
import json
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

from .baselines import full_duplex_bound, hd_fd_ratio, naive_schedule, simple_random_schedule
from .network import Network, gen_layered
from .solve import RATE_MAX, SolveResult, duty_min, solve_dense, solve_grouped

_KINDS = ("timing", "duty", "ratio", "single")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    layer_counts: tuple[int, ...] = (4,)
    width: int = 2
    gains: str = "complex_gaussian"
    powers: tuple[float, ...] = (1.0,)
    trials: int = 3
    seed: int = 0
    solvers: tuple[str, ...] = ("dense", "grouped")
    dense_cap: int = 12
    c_min_points: int = 20

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {_KINDS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.layer_counts or not self.powers:
            raise ValueError("layer_counts and powers must be nonempty")
        if self.width < 1:
            raise ValueError("width must be >= 1")
        if any(s not in ("dense", "grouped") for s in self.solvers):
            raise ValueError(f"unknown solver in {self.solvers}")
        if self.c_min_points < 2:
            raise ValueError("c_min_points must be >= 2")


def build_stamp() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _child_seed(spec: ExperimentSpec, *indices: int) -> int:
    s = spec.seed
    for i in indices:
        s = s * 1000003 + i + 1
    return s % (2 ** 31)


def _gen(spec: ExperimentSpec, n_layers: int, power: float, seed: int) -> Network:
    widths = (1,) + (spec.width,) * (n_layers - 2) + (1,)
    return gen_layered(widths, gains=spec.gains, power=power, seed=seed)


def _solve_rate(net: Network, spec: ExperimentSpec, solver: str) -> tuple[SolveResult, float]:
    t0 = time.perf_counter()
    if solver == "dense":
        res = solve_dense(net, RATE_MAX, cap=spec.dense_cap)
    else:
        res = solve_grouped(net, objective=RATE_MAX, verify=False)
    return res, (time.perf_counter() - t0) * 1000.0


def run_timing(spec: ExperimentSpec) -> list[dict]:
    """Wall-time sweep over layer counts, one row per (L, solver), with a
    cross-solver rate agreement column wherever both solvers ran."""
    stamp = build_stamp()
    rows = []
    for L in spec.layer_counts:
        times: dict[str, list[float]] = {s: [] for s in spec.solvers}
        rates: dict[tuple[str, int], float] = {}
        for trial in range(spec.trials):
            seed = _child_seed(spec, L, trial)
            net = _gen(spec, L, spec.powers[0], seed)
            for solver in spec.solvers:
                if solver == "dense" and net.num_nodes > spec.dense_cap:
                    continue
                res, ms = _solve_rate(net, spec, solver)
                times[solver].append(ms)
                rates[(solver, trial)] = res.rate
        gaps = [
            abs(rates[("dense", t)] - rates[("grouped", t)])
            for t in range(spec.trials)
            if ("dense", t) in rates and ("grouped", t) in rates
        ]
        for solver in spec.solvers:
            ts = times[solver]
            if not ts:
                continue
            rows.append(
                {
                    "kind": "timing",
                    "layers": L,
                    "solver": solver,
                    "trials": len(ts),
                    "mean_ms": sum(ts) / len(ts),
                    "min_ms": min(ts),
                    "max_ms": max(ts),
                    "max_rate_gap": max(gaps) if gaps else "",
                    "seed": spec.seed,
                    "build": stamp,
                }
            )
    return rows


def run_duty_curve(spec: ExperimentSpec) -> list[dict]:
    """Total transmit duty as a function of the rate floor, one curve per
    transmit power, with per-curve monotonicity and convexity check flags."""
    stamp = build_stamp()
    L = spec.layer_counts[0]
    rows = []
    for pi, power in enumerate(spec.powers):
        seed = _child_seed(spec, pi)
        net = _gen(spec, L, power, seed)
        use_dense = net.num_nodes <= spec.dense_cap and "dense" in spec.solvers

        def solve(obj):
            if use_dense:
                return solve_dense(net, obj, cap=spec.dense_cap)
            return solve_grouped(net, objective=obj, verify=False)

        rate_max = solve(RATE_MAX).rate
        grid = [rate_max * 0.98 * i / (spec.c_min_points - 1) for i in range(spec.c_min_points)]
        duties = []
        for c in grid:
            res = solve(duty_min(c))
            duties.append(res.t_tot if res.status == "optimal" else float("nan"))
            rows.append(
                {
                    "kind": "duty",
                    "power": power,
                    "c_min": c,
                    "t_tot": duties[-1],
                    "status": res.status,
                    "rate_max": rate_max,
                    "seed": seed,
                    "build": stamp,
                }
            )
        finite = [d for d in duties if d == d]
        monotone = all(b >= a - 1e-7 for a, b in zip(finite, finite[1:]))
        convex = all(
            finite[i + 1] - finite[i] <= finite[i + 2] - finite[i + 1] + 1e-7
            for i in range(len(finite) - 2)
        )
        for row in rows[-spec.c_min_points:]:
            row["monotone_ok"] = monotone
            row["convex_ok"] = convex
    return rows


def ratio_curve_instances(spec: ExperimentSpec) -> list[dict]:
    """Per-instance half-duplex/full-duplex ratios for the three schedulers."""
    stamp = build_stamp()
    L = spec.layer_counts[0]
    out = []
    for pi, power in enumerate(spec.powers):
        for trial in range(spec.trials):
            seed = _child_seed(spec, pi, trial)
            net = _gen(spec, L, power, seed)
            fd = full_duplex_bound(net)
            naive = hd_fd_ratio(net, naive_schedule(net))
            simple = hd_fd_ratio(net, simple_random_schedule(net, seed=seed + 1))
            if net.num_nodes <= spec.dense_cap and "dense" in spec.solvers:
                res = solve_dense(net, RATE_MAX, cap=spec.dense_cap)
            else:
                res = solve_grouped(net, objective=RATE_MAX, verify=False)
            out.append(
                {
                    "power": power,
                    "trial": trial,
                    "seed": seed,
                    "full_duplex": fd,
                    "naive": naive,
                    "simple_random": simple,
                    "optimized": res.rate / fd,
                    "build": stamp,
                }
            )
    return out


def run_ratio_curve(spec: ExperimentSpec) -> list[dict]:
    """Aggregate ratio rows, one per (power, scheduler)."""
    instances = ratio_curve_instances(spec)
    rows = []
    for power in spec.powers:
        sub = [r for r in instances if r["power"] == power]
        for scheduler in ("naive", "simple_random", "optimized"):
            vals = [r[scheduler] for r in sub]
            rows.append(
                {
                    "kind": "ratio",
                    "power": power,
                    "scheduler": scheduler,
                    "trials": len(vals),
                    "mean_ratio": sum(vals) / len(vals),
                    "min_ratio": min(vals),
                    "max_ratio": max(vals),
                    "seed": spec.seed,
                    "build": sub[0]["build"],
                }
            )
    return rows


def run_single(spec: ExperimentSpec) -> list[dict]:
    """One instance, one row per requested solver."""
    stamp = build_stamp()
    L = spec.layer_counts[0]
    seed = _child_seed(spec, 0)
    net = _gen(spec, L, spec.powers[0], seed)
    rows = []
    for solver in spec.solvers:
        if solver == "dense" and net.num_nodes > spec.dense_cap:
            continue
        res, ms = _solve_rate(net, spec, solver)
        rows.append(
            {
                "kind": "single",
                "layers": L,
                "solver": solver,
                "rate": res.rate,
                "t_tot": res.t_tot,
                "status": res.status,
                "wall_ms": ms,
                "seed": seed,
                "build": stamp,
            }
        )
    return rows


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    runner = {
        "timing": run_timing,
        "duty": run_duty_curve,
        "ratio": run_ratio_curve,
        "single": run_single,
    }[spec.kind]
    return runner(spec)


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    fields = list(rows[0].keys())
    for row in rows[1:]:
        for k in row:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def rows_to_json(rows: list[dict]) -> str:
    return json.dumps(rows, indent=2) + "\n"
