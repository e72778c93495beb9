import itertools

import numpy as np
import pytest

from hdsched import (
    ConvergenceFailure,
    Cut,
    CutObjective,
    GroundSetTooLarge,
    decomposed_cut_value,
    expected_cut_value,
    fullduplex_cut_value,
    gaussian_real,
    gen_layered,
    gen_line_two_hop,
    lindet_expected_cut_value,
    make_network,
    min_cut,
    min_cut_brute,
    min_cut_submodular,
)
from hdsched.sfm import _greedy_vertex

from _helpers import all_cuts, joint_to_group_schedule, random_joint


def brute_oracle(net, value_fn):
    """Min cut by plain enumeration of relay subsets, via the public
    evaluation functions only."""
    relays = net.relay_nodes
    best = None
    for r in range(len(relays) + 1):
        for combo in itertools.combinations(relays, r):
            cut = Cut(frozenset({net.source, *combo}))
            v = value_fn(net, cut)
            if best is None or v < best:
                best = v
    return best


def unit_line(n=3):
    edges = [(i, i + 1, 1.0) for i in range(n - 1)]
    return make_network(n, 0, n - 1, edges, gaussian_real())


class ModularStub:
    """Additive set function; its min-norm point is the weight vector itself,
    so Wolfe must finish in a couple of major cycles."""

    def __init__(self, w, offset=0.0):
        self.w = np.asarray(w, dtype=float)
        self.ground = tuple(range(len(self.w)))
        self.offset = offset

    def subset_value(self, mask):
        return self.offset + float(sum(self.w[i] for i in self.ground if (mask >> i) & 1))

    def omega_of(self, mask):
        return Cut(frozenset({99, *(i for i in self.ground if (mask >> i) & 1)}))


# ---------------------------------------------------------------------------
# the objective


def test_cut_objective_agrees_with_public_evaluators():
    rng = np.random.default_rng(0)
    net = gen_line_two_hop(6, gains="complex_gaussian", seed=0)
    joint = random_joint(rng, net.num_nodes)
    gs = joint_to_group_schedule(joint, [tuple(range(net.num_nodes))])

    obj_fd = CutObjective(net, None)
    obj_sched = CutObjective(net, joint)
    obj_group = CutObjective(net, gs)
    for cut in all_cuts(net):
        assert obj_fd.cut_value(cut) == pytest.approx(fullduplex_cut_value(net, cut), abs=1e-12)
        assert obj_sched.cut_value(cut) == pytest.approx(expected_cut_value(net, cut, joint), abs=1e-12)
        assert obj_group.cut_value(cut) == pytest.approx(decomposed_cut_value(net, cut, gs), abs=1e-12)


def test_cut_objective_caches():
    net = unit_line(4)
    obj = CutObjective(net, None)
    cut = Cut(frozenset({0, 1}))
    obj.cut_value(cut)
    n = obj.evaluations
    obj.cut_value(cut)
    assert obj.evaluations == n


def test_expected_cut_is_submodular():
    """f(A|B) + f(A&B) <= f(A) + f(B), exhaustively on small networks."""
    rng = np.random.default_rng(4)
    for seed in range(3):
        for gains in ("gaussian", "shift"):
            net = gen_layered((1, 2, 1), gains=gains, seed=seed)
            joint = random_joint(rng, net.num_nodes)
            obj = CutObjective(net, joint)
            g = len(obj.ground)
            for a in range(1 << g):
                for b in range(1 << g):
                    lhs = obj.subset_value(a | b) + obj.subset_value(a & b)
                    rhs = obj.subset_value(a) + obj.subset_value(b)
                    assert lhs <= rhs + 1e-9


# ---------------------------------------------------------------------------
# brute force


def test_brute_matches_enumeration_oracle():
    rng = np.random.default_rng(1)
    for seed in range(6):
        net = gen_line_two_hop(6, gains="gaussian", power=2.0, seed=seed)
        joint = random_joint(rng, net.num_nodes)
        res = min_cut_brute(CutObjective(net, joint))
        want = brute_oracle(net, lambda n, c: expected_cut_value(n, c, joint))
        assert res.value == pytest.approx(want, abs=1e-12)
        assert res.method == "brute"
        assert res.certificate_gap == 0.0
        # the reported cut actually achieves the reported value
        assert expected_cut_value(net, res.omega, joint) == pytest.approx(res.value, abs=1e-12)


def test_brute_tie_breaks_toward_smallest_relay_set():
    # unit line: cuts {0} and {0,1} have the same full-duplex value
    net = unit_line(3)
    a = fullduplex_cut_value(net, Cut(frozenset({0})))
    b = fullduplex_cut_value(net, Cut(frozenset({0, 1})))
    assert a == b
    res = min_cut_brute(CutObjective(net, None))
    assert res.omega.members == frozenset({0})


def test_brute_refuses_large_ground_set():
    net = gen_line_two_hop(7, seed=0)
    with pytest.raises(GroundSetTooLarge):
        min_cut_brute(CutObjective(net, None), cap=2)


# ---------------------------------------------------------------------------
# min-norm point


def test_greedy_vertex_lands_in_base_polytope():
    rng = np.random.default_rng(2)
    net = gen_line_two_hop(6, gains="complex_gaussian", seed=3)
    joint = random_joint(rng, net.num_nodes)
    obj = CutObjective(net, joint)
    g = len(obj.ground)
    f0 = obj.subset_value(0)
    full = (1 << g) - 1
    for _ in range(10):
        w = rng.normal(size=g)
        x = _greedy_vertex(obj, w, f0)
        # tight at the full set
        assert float(x.sum()) == pytest.approx(obj.subset_value(full) - f0, abs=1e-9)
        # never exceeds any normalized subset value
        for mask in range(1 << g):
            xa = sum(float(x[i]) for i in range(g) if (mask >> i) & 1)
            fa = obj.subset_value(mask) - f0
            assert xa <= fa + 1e-9


def test_greedy_vertex_certifies_lower_bound():
    rng = np.random.default_rng(3)
    net = gen_layered((1, 2, 2, 1), gains="gaussian", seed=2)
    joint = random_joint(rng, net.num_nodes)
    obj = CutObjective(net, joint)
    g = len(obj.ground)
    f0 = obj.subset_value(0)
    true_min = min(obj.subset_value(m) - f0 for m in range(1 << g))
    for _ in range(10):
        x = _greedy_vertex(obj, rng.normal(size=g), f0)
        lower = float(np.minimum(x, 0.0).sum())
        assert lower <= true_min + 1e-9


def test_min_norm_matches_brute_on_randoms():
    rng = np.random.default_rng(5)
    for seed in range(12):
        kind = ("gaussian", "complex_gaussian", "shift")[seed % 3]
        net = gen_line_two_hop(6 + seed % 3, gains=kind, power=3.0, seed=seed)
        joint = random_joint(rng, net.num_nodes)
        obj_a = CutObjective(net, joint)
        obj_b = CutObjective(net, joint)
        ref = min_cut_brute(obj_a)
        got = min_cut_submodular(obj_b, eps=1e-7)
        assert got.value == pytest.approx(ref.value, abs=1e-6)
        assert got.method == "min_norm"
        assert got.certificate_gap >= 0.0
        assert got.certificate_gap <= 1e-7
        # reported omega must achieve the reported value
        assert obj_b.cut_value(got.omega) == pytest.approx(got.value, abs=1e-12)


def test_min_norm_fullduplex_and_grouped_weights():
    rng = np.random.default_rng(6)
    for seed in range(4):
        net = gen_layered((1, 2, 2, 1), gains="complex_gaussian", seed=seed)
        ref = min_cut_brute(CutObjective(net, None))
        got = min_cut_submodular(CutObjective(net, None))
        assert got.value == pytest.approx(ref.value, abs=1e-6)

        joint = random_joint(rng, net.num_nodes)
        gs = joint_to_group_schedule(joint, [tuple(range(net.num_nodes))])
        ref = min_cut_brute(CutObjective(net, gs))
        got = min_cut_submodular(CutObjective(net, gs))
        assert got.value == pytest.approx(ref.value, abs=1e-6)


def test_min_norm_modular_exact():
    stub = ModularStub([1.5, -2.0, 0.25, -0.5], offset=3.0)
    res = min_cut_submodular(stub, eps=1e-9)
    assert res.value == pytest.approx(3.0 - 2.0 - 0.5, abs=1e-12)
    assert res.omega.members == frozenset({99, 1, 3})
    assert res.iterations <= 3


def test_min_norm_no_relays():
    net = make_network(2, 0, 1, [(0, 1, 1.0)], gaussian_real())
    res = min_cut_submodular(CutObjective(net, None))
    assert res.omega.members == frozenset({0})
    assert res.iterations == 0


def test_min_norm_stall_reports_gap():
    stub = ModularStub([1.0, -1.0])
    with pytest.raises(ConvergenceFailure) as ei:
        min_cut_submodular(stub, eps=-1.0, max_major=2)  # unsatisfiable target
    assert ei.value.best_gap >= 0.0
    assert ei.value.iterations >= 1


# ---------------------------------------------------------------------------
# dispatcher


def test_min_cut_dispatch():
    net = unit_line(4)
    obj = CutObjective(net, None)
    assert min_cut(obj).method == "brute"
    assert min_cut(obj, method="min_norm").value == pytest.approx(min_cut(obj, method="brute").value, abs=1e-9)
    assert min_cut(CutObjective(net, None), auto_threshold=1).method == "min_norm"
    with pytest.raises(ValueError):
        min_cut(obj, method="bogus")


def test_min_cut_lindet_weights():
    rng = np.random.default_rng(9)
    net = gen_layered((1, 2, 1), gains="shift", k=3, seed=4)
    joint = random_joint(rng, net.num_nodes)
    res = min_cut(CutObjective(net, joint))
    want = brute_oracle(net, lambda n, c: lindet_expected_cut_value(n, c, joint))
    assert res.value == pytest.approx(want, abs=1e-12)
