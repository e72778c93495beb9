"""Schedule optimization by LP constraint generation.

Rather than materializing one constraint per cut (2^|V|-2 of them), the
solvers keep a small working set of cuts, solve the restricted LP, and ask
the submodular min-cut oracle for the bottleneck cut under the returned
schedule. If that cut's value is below the claimed rate by more than the
separation tolerance it joins the working set and the LP is re-solved;
otherwise the schedule is optimal up to tolerance and the min-cut value is
its validity certificate.

Two formulations share the loop:

* dense: one probability variable per mode configuration (2^|V| of them),
  exact but only for small networks;
* grouped: one local distribution per tree-decomposition bag, with marginal
  consistency constraints on overlapping bags and cut constraints decomposed
  per cut-graph component. Polynomial-size whenever the bags stay small.

Objectives are linear in (rate R, total transmit duty T_tot): minimize
mu1*R + mu2*T_tot subject to R >= c_min, covering both rate maximization
(RATE_MAX) and duty minimization at a rate floor (duty_min(c)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._masks import mask_of
from .gauss import GaussianEvaluator, first_covering_group, _component_masks
from .lindet import LindetEvaluator
from .lp import lp_solve
from .network import Cut, GroupSchedule, ModeConfig, Network, Schedule
from .grouping import (
    GroupingInvalid,
    NodeGrouping,
    TreeDecomposition,
    check_coverage_exhaustive,
    check_sufficient_conditions,
    heuristic_grouping,
    tree_decompose,
    build_clique_graph,
)
from ._masks import nodes_of
from .sfm import CutObjective, GroundSetTooLarge, min_cut

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_CAP = "iteration_cap"

DEFAULT_SEP_TOL = 1e-7
DUTY_SEP_TOL = 1e-9


class NetworkTooLarge(ValueError):
    """Dense solver refused: mode space above the cap."""


@dataclass(frozen=True)
class ObjectiveSpec:
    """Minimize mu1 * rate + mu2 * total_duty subject to rate >= c_min."""

    mu1: float
    mu2: float
    c_min: float = 0.0

    def __post_init__(self):
        if self.mu1 == 0.0 and self.mu2 == 0.0:
            raise ValueError("objective weights cannot both be zero")
        if self.c_min < 0.0:
            raise ValueError(f"rate floor must be nonnegative, got {self.c_min}")

    @property
    def duty_pinned(self) -> bool:
        """Duty-only objectives pin the rate to exactly c_min (the rate does
        not appear in the objective, so this loses nothing and makes the
        solution deterministic)."""
        return self.mu1 == 0.0


RATE_MAX = ObjectiveSpec(mu1=-1.0, mu2=0.0, c_min=0.0)


def duty_min(c_min: float) -> ObjectiveSpec:
    """Minimize total transmit duty subject to rate >= c_min."""
    return ObjectiveSpec(mu1=0.0, mu2=1.0, c_min=c_min)


@dataclass
class SolveResult:
    rate: float
    t_tot: float
    schedule: Schedule | GroupSchedule | None
    active_cuts: list[Cut]
    iterations: int
    status: str


def _make_evaluator(net: Network):
    return GaussianEvaluator(net) if net.model.is_gaussian else LindetEvaluator(net)


def _initial_cuts(net: Network) -> list[Cut]:
    out = [Cut(frozenset({net.source}))]
    everything_but_dest = frozenset(range(net.num_nodes)) - {net.destination}
    if everything_but_dest != out[0].members:
        out.append(Cut(everything_but_dest))
    return out


def _infeasible(cuts: list[Cut], iterations: int) -> SolveResult:
    return SolveResult(math.nan, math.nan, None, cuts, iterations, INFEASIBLE)


# ---------------------------------------------------------------------------
# dense formulation


def _dense_schedule(qvec: np.ndarray, modes: list[int], n: int) -> Schedule:
    entries: dict[ModeConfig, float] = {}
    for val, mask in zip(qvec, modes):
        v = max(float(val), 0.0)
        if v > 1e-12:
            entries[ModeConfig.from_mask(mask, n)] = v
    total = sum(entries.values())
    return Schedule({m: p / total for m, p in entries.items()})


def solve_dense(
    net: Network,
    objective: ObjectiveSpec = RATE_MAX,
    cap: int = 12,
    fix_source_dest: bool = False,
    sep_tol: float | None = None,
    max_rounds: int = 200,
) -> SolveResult:
    """Optimize over full joint schedules (one variable per mode
    configuration). Works for Gaussian and linear deterministic models.
    fix_source_dest pins the source to transmit and the destination to
    receive, shrinking the mode space fourfold (no loss for RATE_MAX)."""
    n = net.num_nodes
    if n > cap:
        raise NetworkTooLarge(f"{n} nodes exceeds dense cap {cap} (raise cap or use the grouped solver)")
    if sep_tol is None:
        sep_tol = DUTY_SEP_TOL if objective.duty_pinned else DEFAULT_SEP_TOL

    ev = _make_evaluator(net)
    full = (1 << n) - 1
    src_bit, dst_bit = 1 << net.source, 1 << net.destination
    modes = [m for m in range(1 << n) if not fix_source_dest or ((m & src_bit) and not (m & dst_bit))]
    nm = len(modes)

    r_hi = ev.pair_value(src_bit, full & ~src_bit)
    cuts = _initial_cuts(net)
    if objective.c_min > r_hi + 1e-12:
        return _infeasible(cuts, 0)

    nv = 2 + nm  # R, T_tot, q
    c_obj = np.zeros(nv)
    c_obj[0] = -objective.mu1
    c_obj[1] = -objective.mu2
    if objective.duty_pinned:
        bounds = [(objective.c_min, objective.c_min)]
    else:
        bounds = [(objective.c_min, max(r_hi, objective.c_min))]
    bounds.append((0.0, float(n)))
    bounds.extend([(0.0, 1.0)] * nm)

    a_eq = np.zeros((1, nv))
    a_eq[0, 2:] = 1.0
    b_eq = np.array([1.0])

    duty_row = np.zeros(nv)
    duty_row[1] = -1.0
    for j, m in enumerate(modes):
        duty_row[2 + j] = float(bin(m).count("1"))

    def cut_row(cut: Cut) -> np.ndarray:
        row = np.zeros(nv)
        row[0] = 1.0
        om = cut.mask
        for j, m in enumerate(modes):
            row[2 + j] = -ev.mode_value(om, m, full)
        return row

    rows = [cut_row(c) for c in cuts]
    seen = {c.members for c in cuts}
    iterations = 0
    last = None
    for _ in range(max_rounds):
        a_ub = np.vstack([duty_row] + rows)
        b_ub = np.zeros(len(rows) + 1)
        sol = lp_solve(c_obj, a_ub=a_ub, b_ub=b_ub, bounds=bounds, a_eq=a_eq, b_eq=b_eq)
        iterations += 1
        if sol.status == "infeasible":
            return _infeasible(cuts, iterations)
        schedule = _dense_schedule(sol.x[2:], modes, n)
        rate = objective.c_min if objective.duty_pinned else float(sol.x[0])
        last = (rate, schedule)
        obj = CutObjective(net, schedule, evaluator=ev)
        mc = min_cut(obj, eps=sep_tol)
        if mc.value >= rate - sep_tol or mc.omega.members in seen:
            return SolveResult(rate, schedule.duty_total(), schedule, cuts, iterations, OPTIMAL)
        cuts.append(mc.omega)
        seen.add(mc.omega.members)
        rows.append(cut_row(mc.omega))
    rate, schedule = last
    return SolveResult(rate, schedule.duty_total(), schedule, cuts, iterations, ITERATION_CAP)


def solve_dense_rate(net: Network, **kwargs) -> SolveResult:
    """Maximize the achievable rate over full joint schedules."""
    return solve_dense(net, RATE_MAX, **kwargs)


# ---------------------------------------------------------------------------
# grouped formulation


def _resolve_decomposition(
    net: Network,
    decomposition: TreeDecomposition | NodeGrouping | None,
    verify: bool,
    p1_cap: int,
) -> TreeDecomposition:
    if decomposition is None:
        return tree_decompose(build_clique_graph(net, heuristic_grouping(net)))
    if isinstance(decomposition, NodeGrouping):
        grouping = decomposition
        td = tree_decompose(build_clique_graph(net, grouping))
    elif isinstance(decomposition, TreeDecomposition):
        grouping = NodeGrouping(decomposition.bags)
        td = decomposition
    else:
        raise TypeError(f"expected a NodeGrouping or TreeDecomposition, got {type(decomposition).__name__}")
    if verify:
        ok, _ = check_sufficient_conditions(net, grouping)
        if not ok:
            try:
                ok = check_coverage_exhaustive(net, grouping)
            except GroundSetTooLarge:
                ok = False
            if not ok:
                raise GroupingInvalid(
                    "grouping fails the closure conditions and could not be verified exhaustively"
                )
    return td


def _grouped_engine(
    net: Network,
    td: TreeDecomposition,
    objective: ObjectiveSpec,
    include_duty: bool,
    sep_tol: float,
    max_rounds: int,
) -> SolveResult:
    ev = _make_evaluator(net)
    bags = td.bags
    covered = set().union(*(set(b) for b in bags))
    if covered != set(range(net.num_nodes)):
        raise GroupingInvalid("decomposition bags do not cover every node")

    sizes = [1 << len(b) for b in bags]
    offsets = []
    base = 2
    for s in sizes:
        offsets.append(base)
        base += s
    nv = base

    full = (1 << net.num_nodes) - 1
    src_bit = 1 << net.source
    r_hi = ev.pair_value(src_bit, full & ~src_bit)
    cuts = _initial_cuts(net)
    if objective.c_min > r_hi + 1e-12:
        return _infeasible(cuts, 0)

    c_obj = np.zeros(nv)
    c_obj[0] = -objective.mu1
    c_obj[1] = -objective.mu2
    if objective.duty_pinned:
        bounds = [(objective.c_min, objective.c_min)]
    else:
        bounds = [(objective.c_min, max(r_hi, objective.c_min))]
    bounds.append((0.0, float(net.num_nodes)))
    for s in sizes:
        bounds.extend([(0.0, 1.0)] * s)

    eq_rows = []
    for i, s in enumerate(sizes):
        row = np.zeros(nv)
        row[offsets[i]: offsets[i] + s] = 1.0
        eq_rows.append(row)
    # marginal consistency on every overlapping bag pair
    for i in range(len(bags)):
        for l in range(i + 1, len(bags)):
            shared = sorted(set(bags[i]) & set(bags[l]))
            if not shared:
                continue
            pos_i = [bags[i].index(v) for v in shared]
            pos_l = [bags[l].index(v) for v in shared]
            for aidx in range(1 << len(shared)):
                row = np.zeros(nv)
                for idx in range(sizes[i]):
                    if all(((idx >> p) & 1) == ((aidx >> j) & 1) for j, p in enumerate(pos_i)):
                        row[offsets[i] + idx] += 1.0
                for idx in range(sizes[l]):
                    if all(((idx >> p) & 1) == ((aidx >> j) & 1) for j, p in enumerate(pos_l)):
                        row[offsets[l] + idx] -= 1.0
                eq_rows.append(row)
    a_eq = np.vstack(eq_rows)
    b_eq = np.zeros(len(eq_rows))
    b_eq[: len(bags)] = 1.0

    ub_rows = []
    if include_duty:
        duty_row = np.zeros(nv)
        duty_row[1] = -1.0
        for v in range(net.num_nodes):
            i = next(bi for bi, b in enumerate(bags) if v in b)
            pos = bags[i].index(v)
            for idx in range(sizes[i]):
                if (idx >> pos) & 1:
                    duty_row[offsets[i] + idx] += 1.0
        ub_rows.append(duty_row)

    def cut_row(cut: Cut) -> np.ndarray:
        row = np.zeros(nv)
        row[0] = 1.0
        om = cut.mask
        for comp_mask in _component_masks(net, om):
            comp = nodes_of(comp_mask)
            r = first_covering_group(bags, frozenset(comp))
            vals = ev.component_values(comp, om & comp_mask)
            pos = [bags[r].index(v) for v in comp]
            for idx in range(sizes[r]):
                cidx = 0
                for j, p in enumerate(pos):
                    cidx |= ((idx >> p) & 1) << j
                row[offsets[r] + idx] -= vals[cidx]
        return row

    def extract(x: np.ndarray) -> GroupSchedule:
        pmfs = []
        for i, b in enumerate(bags):
            table: dict[tuple[int, ...], float] = {}
            total = 0.0
            for idx in range(sizes[i]):
                v = max(float(x[offsets[i] + idx]), 0.0)
                if v > 1e-12:
                    table[tuple((idx >> j) & 1 for j in range(len(b)))] = v
                    total += v
            pmfs.append({m: p / total for m, p in table.items()})
        return GroupSchedule(bags, tuple(pmfs))

    rows = [cut_row(c) for c in cuts]
    seen = {c.members for c in cuts}
    iterations = 0
    last = None
    for _ in range(max_rounds):
        a_ub = np.vstack(ub_rows + rows)
        b_ub = np.zeros(len(ub_rows) + len(rows))
        sol = lp_solve(c_obj, a_ub=a_ub, b_ub=b_ub, bounds=bounds, a_eq=a_eq, b_eq=b_eq)
        iterations += 1
        if sol.status == "infeasible":
            return _infeasible(cuts, iterations)
        gs = extract(sol.x)
        rate = objective.c_min if objective.duty_pinned else float(sol.x[0])
        last = (rate, gs)
        obj = CutObjective(net, gs, evaluator=ev)
        mc = min_cut(obj, eps=sep_tol)
        if mc.value >= rate - sep_tol or mc.omega.members in seen:
            return SolveResult(rate, gs.duty_total(), gs, cuts, iterations, OPTIMAL)
        cuts.append(mc.omega)
        seen.add(mc.omega.members)
        rows.append(cut_row(mc.omega))
    rate, gs = last
    return SolveResult(rate, gs.duty_total(), gs, cuts, iterations, ITERATION_CAP)


def solve_grouped(
    net: Network,
    decomposition: TreeDecomposition | NodeGrouping | None = None,
    objective: ObjectiveSpec = RATE_MAX,
    verify: bool = True,
    sep_tol: float | None = None,
    max_rounds: int = 200,
    p1_cap: int = 16,
) -> SolveResult:
    """Optimize over bag-local schedules on a tree decomposition. With no
    decomposition given, the greedy grouping heuristic supplies one. Pass
    verify=False to skip coverage validation for groupings known valid by
    construction (it is exponential in the relay count)."""
    if not net.model.is_gaussian:
        from .gauss import ModelMismatch

        raise ModelMismatch("grouped Gaussian solver needs a Gaussian model; use solve_grouped_lindet")
    td = _resolve_decomposition(net, decomposition, verify, p1_cap)
    if sep_tol is None:
        sep_tol = DUTY_SEP_TOL if objective.duty_pinned else DEFAULT_SEP_TOL
    return _grouped_engine(net, td, objective, True, sep_tol, max_rounds)


def solve_grouped_lindet(
    net: Network,
    decomposition: TreeDecomposition | NodeGrouping | None = None,
    verify: bool = True,
    sep_tol: float = DEFAULT_SEP_TOL,
    max_rounds: int = 200,
    p1_cap: int = 16,
) -> SolveResult:
    """Rate maximization over bag-local schedules for linear deterministic
    networks (rank cut values)."""
    if net.model.is_gaussian:
        from .gauss import ModelMismatch

        raise ModelMismatch("solve_grouped_lindet needs a linear deterministic model")
    td = _resolve_decomposition(net, decomposition, verify, p1_cap)
    return _grouped_engine(net, td, RATE_MAX, False, sep_tol, max_rounds)
