"""Cut values for Gaussian half-duplex relay networks.

For a cut (source side Omega) and a mode configuration m, the achievable
flow across the cut with independent unit-power inputs is the log-det value

    1/2 * log2 det(I + H H^T)    (real model)
          log2 det(I + H H^+)    (complex model)

where H is the channel matrix from the transmitting nodes inside Omega to
the receiving nodes outside it. The matrix I + H H^+ is Hermitian positive
definite by construction, so values are computed from a Cholesky factor in
natural log and rescaled, which cannot overflow for any gain magnitudes a
double can hold.

The cut graph (crossing edges only) and its connected components are what
make grouped schedules work: the cut value splits into one independent term
per component, because receivers in different components hear disjoint
transmitter sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._masks import iter_bits, mask_of, nodes_of
from .network import (
    ComplexScalar,
    Cut,
    GAUSSIAN_COMPLEX,
    GroupSchedule,
    ModeConfig,
    Network,
    RealScalar,
    Schedule,
    _pmf_marginal,
)

CutValue = float

_LN2 = math.log(2.0)


class ModelMismatch(TypeError):
    """Operation applied to a network with the wrong channel model."""


class ComponentNotCovered(ValueError):
    """A cut-graph component is not contained in any group."""

    def __init__(self, component: frozenset[int]):
        self.component = component
        super().__init__(f"cut component {sorted(component)} not inside any group")


@dataclass(frozen=True)
class CutGraph:
    """Edges crossing a cut and the connected components they induce.
    Components partition the nodes incident to at least one crossing edge
    and are ordered by smallest member."""

    omega: Cut
    kept_edges: tuple[tuple[int, int], ...]
    components: tuple[frozenset[int], ...]


def crossing_edges(net: Network, omega: Cut) -> tuple[tuple[int, int], ...]:
    om = omega.members
    return tuple((e.u, e.v) for e in net.edges if e.u in om and e.v not in om)


def _component_masks(net: Network, omega_mask: int) -> list[int]:
    """Connected components (as node masks) of the undirected graph on the
    crossing edges of the cut given by omega_mask."""
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for e in net.edges:
        if (omega_mask >> e.u) & 1 and not (omega_mask >> e.v) & 1:
            for w in (e.u, e.v):
                if w not in parent:
                    parent[w] = w
            ru, rv = find(e.u), find(e.v)
            if ru != rv:
                parent[ru] = rv
    comps: dict[int, int] = {}
    for w in parent:
        r = find(w)
        comps[r] = comps.get(r, 0) | (1 << w)
    return sorted(comps.values(), key=lambda m: m & -m)


def cut_graph(net: Network, omega: Cut) -> CutGraph:
    net.validate_cut(omega)
    kept = crossing_edges(net, omega)
    comps = tuple(frozenset(nodes_of(m)) for m in _component_masks(net, omega.mask))
    return CutGraph(omega, kept, comps)


# ---------------------------------------------------------------------------
# evaluation


class GaussianEvaluator:
    """Caching log-det evaluator for one network.

    pair_value(A_mask, B_mask) is the cut value with transmitter set A and
    receiver set B. component_values(comp, inside_mask) tabulates the value
    of one cut-graph component for every local transmit pattern.
    """

    def __init__(self, net: Network):
        if not net.model.is_gaussian:
            raise ModelMismatch(f"expected a Gaussian model, got {net.model.kind}")
        self.net = net
        self.complex = net.model.kind == GAUSSIAN_COMPLEX
        dtype = np.complex128 if self.complex else np.float64
        G = np.zeros((net.num_nodes, net.num_nodes), dtype=dtype)
        for e in net.edges:
            if isinstance(e.gain, RealScalar):
                G[e.u, e.v] = e.gain.value
            elif isinstance(e.gain, ComplexScalar):
                G[e.u, e.v] = e.gain.value
            else:  # unreachable for validated networks
                raise ModelMismatch(f"non-scalar gain on edge ({e.u},{e.v})")
        self.G = G
        self._pair_cache: dict[tuple[int, int], float] = {}
        self._comp_cache: dict[tuple[tuple[int, ...], int], np.ndarray] = {}

    def pair_value(self, a_mask: int, b_mask: int) -> float:
        if not a_mask or not b_mask:
            return 0.0
        key = (a_mask, b_mask)
        hit = self._pair_cache.get(key)
        if hit is not None:
            return hit
        A = list(iter_bits(a_mask))
        B = list(iter_bits(b_mask))
        W = self.G[np.ix_(A, B)]
        if len(A) <= len(B):
            X = W.conj() @ W.T if self.complex else W @ W.T
        else:
            X = W.T @ W.conj() if self.complex else W.T @ W
        M = np.eye(X.shape[0], dtype=X.dtype) + X
        L = np.linalg.cholesky(M)
        bits = 2.0 * float(np.sum(np.log(np.abs(np.diagonal(L))))) / _LN2
        if not self.complex:
            bits *= 0.5
        self._pair_cache[key] = bits
        return bits

    def mode_value(self, omega_mask: int, tx_mask: int, full_mask: int) -> float:
        a = omega_mask & tx_mask
        b = full_mask & ~omega_mask & ~tx_mask
        return self.pair_value(a, b)

    def component_values(self, comp: tuple[int, ...], inside_mask: int) -> np.ndarray:
        """Value of a component for each local transmit pattern, indexed by
        the little-endian pattern over `comp` (ascending node order).
        inside_mask marks which component nodes are on the source side."""
        key = (comp, inside_mask)
        hit = self._comp_cache.get(key)
        if hit is not None:
            return hit
        w = len(comp)
        comp_mask = mask_of(comp)
        out = np.zeros(2 ** w)
        for idx in range(2 ** w):
            tx = 0
            for j in range(w):
                if (idx >> j) & 1:
                    tx |= 1 << comp[j]
            a = inside_mask & tx
            b = comp_mask & ~inside_mask & ~tx
            out[idx] = self.pair_value(a, b)
        self._comp_cache[key] = out
        return out


def _marginal_vector(group: tuple[int, ...], pmf, comp: tuple[int, ...]) -> np.ndarray:
    """Group-local pmf marginalized onto comp, as a dense vector aligned with
    GaussianEvaluator.component_values indexing."""
    marg = _pmf_marginal(group, pmf, comp)
    out = np.zeros(2 ** len(comp))
    for m, p in marg.items():
        idx = 0
        for j, b in enumerate(m):
            idx |= b << j
        out[idx] += p
    return out


def first_covering_group(groups: tuple[tuple[int, ...], ...], component: frozenset[int]) -> int:
    for i, g in enumerate(groups):
        if component <= set(g):
            return i
    raise ComponentNotCovered(component)


def mode_cut_value(net: Network, omega: Cut, mode: ModeConfig) -> float:
    """Cut value of one mode configuration."""
    net.validate_cut(omega)
    ev = GaussianEvaluator(net)
    full = (1 << net.num_nodes) - 1
    return ev.mode_value(omega.mask, mode.mask, full)


def expected_cut_value(net: Network, omega: Cut, schedule: Schedule) -> float:
    """Schedule-weighted cut value, summed over the sparse support."""
    net.validate_cut(omega)
    ev = GaussianEvaluator(net)
    full = (1 << net.num_nodes) - 1
    om = omega.mask
    return sum(p * ev.mode_value(om, m.mask, full) for m, p in schedule.entries.items())


def fullduplex_cut_value(net: Network, omega: Cut) -> float:
    """Cut value with every node transmitting and receiving at once."""
    net.validate_cut(omega)
    ev = GaussianEvaluator(net)
    full = (1 << net.num_nodes) - 1
    return ev.pair_value(omega.mask, full & ~omega.mask)


def decomposed_cut_value(net: Network, omega: Cut, gs: GroupSchedule) -> float:
    """Cut value from group-local distributions: one term per cut-graph
    component, each read from the first group containing the component.
    Raises ComponentNotCovered when the grouping cannot express this cut."""
    net.validate_cut(omega)
    ev = GaussianEvaluator(net)
    om = omega.mask
    total = 0.0
    for comp_mask in _component_masks(net, om):
        comp = nodes_of(comp_mask)
        r = first_covering_group(gs.groups, frozenset(comp))
        vals = ev.component_values(comp, om & comp_mask)
        marg = _marginal_vector(gs.groups[r], gs.pmfs[r], comp)
        total += float(marg @ vals)
    return total
