import math

import numpy as np
import pytest

from hdsched import (
    Cut,
    CutObjective,
    GroupingInvalid,
    GroupSchedule,
    INFEASIBLE,
    ITERATION_CAP,
    ModelMismatch,
    NetworkTooLarge,
    NodeGrouping,
    OPTIMAL,
    ObjectiveSpec,
    RATE_MAX,
    Schedule,
    duty_min,
    gaussian_real,
    gen_layered,
    gen_line_two_hop,
    linear_deterministic,
    make_network,
    min_cut,
    solve_dense,
    solve_dense_rate,
    solve_grouped,
    solve_grouped_lindet,
    tree_decomposition_for,
)

from _helpers import five_relay_net


def two_hop_line(g1, g2):
    return make_network(3, 0, 2, [(0, 1, g1), (1, 2, g2)], gaussian_real())


def link_capacity(g):
    return 0.5 * math.log2(1.0 + g * g)


def line_sweep_oracle(c1, c2, points=10_001):
    """Best rate over a grid of relay listen fractions."""
    t = np.linspace(0.0, 1.0, points)
    return float(np.max(np.minimum(t * c1, (1.0 - t) * c2)))


def certificate_gap(net, res):
    """Rate minus the worst cut under the returned schedule (<= tol for a
    valid solution)."""
    mc = min_cut(CutObjective(net, res.schedule))
    return res.rate - mc.value


# ---------------------------------------------------------------------------
# objectives


def test_objective_spec_validation():
    with pytest.raises(ValueError):
        ObjectiveSpec(0.0, 0.0)
    with pytest.raises(ValueError):
        ObjectiveSpec(-1.0, 0.0, c_min=-0.5)
    assert duty_min(0.25).duty_pinned
    assert not RATE_MAX.duty_pinned


# ---------------------------------------------------------------------------
# dense solver


def test_line_closed_form():
    """Relay line: best rate is the series formula C1*C2/(C1+C2)."""
    for g1, g2 in ((1.0, 1.0), (1.0, math.sqrt(7.0)), (2.0, 0.5), (3.0, 3.0)):
        net = two_hop_line(g1, g2)
        c1, c2 = link_capacity(g1), link_capacity(g2)
        want = c1 * c2 / (c1 + c2)
        res = solve_dense_rate(net)
        assert res.status == OPTIMAL
        assert res.rate == pytest.approx(want, abs=1e-9)
        # a coarse sweep over the listen fraction agrees
        assert res.rate == pytest.approx(line_sweep_oracle(c1, c2), abs=1e-3)


def test_unit_line_rate_and_schedule():
    net = two_hop_line(1.0, 1.0)
    res = solve_dense_rate(net)
    assert res.rate == pytest.approx(0.25, abs=1e-9)  # C1 = C2 = 0.5
    assert isinstance(res.schedule, Schedule)
    # the relay spends half its time on each side
    assert res.schedule.node_duty(1) == pytest.approx(0.5, abs=1e-6)


def test_dense_solution_is_certified():
    """No cut under the returned schedule is below the claimed rate."""
    for seed in range(4):
        net = gen_layered((1, 2, 2, 1), gains="complex_gaussian", power=5.0, seed=seed)
        res = solve_dense_rate(net)
        assert res.status == OPTIMAL
        assert certificate_gap(net, res) <= 1e-6


def test_dense_duty_minimization_line():
    """Unit line, rate floor 0.125: the relay needs 0.25 of the time on each
    hop, the source transmits 0.25, so T_tot = 0.5."""
    net = two_hop_line(1.0, 1.0)
    res = solve_dense(net, duty_min(0.125))
    assert res.status == OPTIMAL
    assert res.rate == 0.125  # pinned
    assert res.t_tot == pytest.approx(0.5, abs=1e-6)
    # duty reported equals duty recomputed from the schedule
    assert res.t_tot == pytest.approx(res.schedule.duty_total(), abs=1e-12)
    # and the rate floor is actually met
    assert certificate_gap(net, res) <= 1e-6


def test_dense_duty_matches_per_hop_formula():
    for g1, g2 in ((1.0, math.sqrt(7.0)), (2.0, 1.0)):
        net = two_hop_line(g1, g2)
        c1, c2 = link_capacity(g1), link_capacity(g2)
        c = 0.4 * (c1 * c2 / (c1 + c2))
        res = solve_dense(net, duty_min(c))
        assert res.status == OPTIMAL
        assert res.t_tot == pytest.approx(c / c1 + c / c2, abs=1e-6)


def test_dense_duty_monotone_in_floor():
    net = gen_layered((1, 2, 1), gains="gaussian", power=4.0, seed=3)
    rmax = solve_dense_rate(net).rate
    t_lo = solve_dense(net, duty_min(0.3 * rmax)).t_tot
    t_hi = solve_dense(net, duty_min(0.9 * rmax)).t_tot
    assert t_lo <= t_hi + 1e-9


def test_dense_infeasible_floor():
    net = two_hop_line(1.0, 1.0)
    res = solve_dense(net, duty_min(100.0))  # above even the full-duplex bound
    assert res.status == INFEASIBLE
    assert math.isnan(res.rate) and math.isnan(res.t_tot)
    assert res.schedule is None

    # floor between the half-duplex optimum and the single-cut bound:
    # only the cutting-plane loop can discover the infeasibility
    res = solve_dense(net, duty_min(0.4))  # optimum is 0.25, cut {0} allows 0.5
    assert res.status == INFEASIBLE


def test_dense_rate_floor_infeasible_too():
    net = two_hop_line(1.0, 1.0)
    res = solve_dense(net, ObjectiveSpec(mu1=-1.0, mu2=0.0, c_min=0.4))
    assert res.status == INFEASIBLE


def test_fix_source_dest_keeps_rate():
    for seed in range(3):
        net = gen_layered((1, 2, 1), gains="complex_gaussian", seed=seed)
        a = solve_dense_rate(net)
        b = solve_dense_rate(net, fix_source_dest=True)
        assert b.rate == pytest.approx(a.rate, abs=1e-7)


def test_dense_cap():
    net = gen_layered((1, 3, 3, 3, 3, 1), gains="gaussian", seed=0)  # 14 nodes
    with pytest.raises(NetworkTooLarge):
        solve_dense_rate(net)
    # raising the cap clears the refusal (not run to completion here)
    solve_dense_rate(gen_layered((1, 2, 1), seed=0), cap=4)


def test_dense_iteration_cap_status():
    net = five_relay_net()
    res = solve_dense_rate(net, max_rounds=1)
    assert res.status == ITERATION_CAP
    assert res.schedule is not None
    assert res.iterations == 1


def test_dense_handles_lindet_model():
    net = make_network(3, 0, 2, [(0, 1, 2), (1, 2, 2)], linear_deterministic(2, 2))
    res = solve_dense_rate(net)
    assert res.rate == pytest.approx(1.0, abs=1e-9)  # 2 bits each hop, half-time


# ---------------------------------------------------------------------------
# grouped solver


def test_grouped_matches_dense_rate():
    for seed in range(4):
        net = gen_layered((1, 2, 2, 1), gains="complex_gaussian", power=3.0, seed=seed)
        dense = solve_dense_rate(net)
        grouped = solve_grouped(net)
        assert grouped.status == OPTIMAL
        assert grouped.rate == pytest.approx(dense.rate, abs=1e-5)


def test_grouped_matches_dense_duty():
    for seed in range(3):
        net = gen_line_two_hop(5, gains="gaussian", power=2.0, seed=seed)
        rmax = solve_dense_rate(net).rate
        c = 0.5 * rmax
        dense = solve_dense(net, duty_min(c))
        grouped = solve_grouped(net, objective=duty_min(c))
        assert grouped.status == OPTIMAL
        assert grouped.rate == c
        assert grouped.t_tot == pytest.approx(dense.t_tot, abs=1e-5)


def test_grouped_five_relay_equals_dense():
    net = five_relay_net()
    dense = solve_dense_rate(net)
    grouped = solve_grouped(net)
    assert grouped.rate == pytest.approx(dense.rate, abs=1e-5)
    assert isinstance(grouped.schedule, GroupSchedule)
    # grouped validity certificate
    mc = min_cut(CutObjective(net, grouped.schedule))
    assert mc.value >= grouped.rate - 1e-6


def test_grouped_single_bag_equals_dense():
    """One bag holding every node makes the grouped LP a joint LP."""
    for seed in range(2):
        net = gen_layered((1, 2, 1), gains="gaussian", power=2.0, seed=seed)
        dense = solve_dense_rate(net)
        one_bag = NodeGrouping((tuple(range(net.num_nodes)),))
        grouped = solve_grouped(net, decomposition=one_bag)
        assert grouped.rate == pytest.approx(dense.rate, abs=1e-7)


def test_grouped_accepts_explicit_tree_decomposition():
    net = five_relay_net()
    td = tree_decomposition_for(net)
    a = solve_grouped(net)
    b = solve_grouped(net, decomposition=td)
    assert b.rate == pytest.approx(a.rate, abs=1e-9)


def test_grouped_rejects_bad_grouping():
    net = gen_line_two_hop(5, seed=0)
    pairs = NodeGrouping(tuple((i, i + 1) for i in range(4)))
    with pytest.raises(GroupingInvalid):
        solve_grouped(net, decomposition=pairs)


def test_grouped_duty_pinned_reports_floor():
    net = two_hop_line(1.0, 1.0)
    res = solve_grouped(net, objective=duty_min(0.125))
    assert res.rate == 0.125
    assert res.t_tot == pytest.approx(0.5, abs=1e-6)


def test_grouped_infeasible_floor():
    net = two_hop_line(1.0, 1.0)
    res = solve_grouped(net, objective=duty_min(0.4))
    assert res.status == INFEASIBLE


def test_grouped_model_dispatch():
    gauss_net = two_hop_line(1.0, 1.0)
    det_net = make_network(3, 0, 2, [(0, 1, 2), (1, 2, 2)], linear_deterministic(2, 2))
    with pytest.raises(ModelMismatch):
        solve_grouped(det_net)
    with pytest.raises(ModelMismatch):
        solve_grouped_lindet(gauss_net)


# ---------------------------------------------------------------------------
# linear deterministic grouped solver


def test_lindet_grouped_matches_dense():
    for seed in range(5):
        net = gen_layered((1, 2, 2, 1), gains="shift", k=3, seed=seed)
        dense = solve_dense_rate(net)
        grouped = solve_grouped_lindet(net)
        assert grouped.status == OPTIMAL
        assert grouped.rate == pytest.approx(dense.rate, abs=1e-6)


def test_lindet_line_half_time():
    net = make_network(3, 0, 2, [(0, 1, 2), (1, 2, 2)], linear_deterministic(2, 2))
    res = solve_grouped_lindet(net)
    assert res.rate == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# bookkeeping


def test_active_cuts_include_seeds_and_solution_is_reproducible():
    net = five_relay_net()
    a = solve_dense_rate(net)
    b = solve_dense_rate(net)
    assert {Cut(frozenset({0})).members, frozenset(range(6))} <= {c.members for c in a.active_cuts}
    assert a.rate == b.rate
    assert a.iterations == b.iterations
    assert [c.members for c in a.active_cuts] == [c.members for c in b.active_cuts]
