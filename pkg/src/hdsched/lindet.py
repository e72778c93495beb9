"""Cut values for finite-field linear deterministic networks.

Each node sends a length-k vector over F_p per use; a receiver observes the
sum of its in-edges' transfer matrices applied to the transmitted vectors.
The cut value of a mode configuration is the rank of the transfer matrix
from the transmitters inside the cut to the receivers outside it. Shift
gains model attenuated links: a level-n edge applies the k x k lower shift
matrix raised to the (k - n)th power, so only the top n symbols get through.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._masks import iter_bits, mask_of, nodes_of
from .gauss import ComponentNotCovered, ModelMismatch, _component_masks, first_covering_group, _marginal_vector
from .network import (
    Cut,
    GainMatrix,
    GroupSchedule,
    LINEAR_DETERMINISTIC,
    ModeConfig,
    Network,
    Schedule,
    ShiftLevel,
)


@dataclass(frozen=True)
class FieldMatrix:
    """Matrix over F_p, entries stored reduced mod p."""

    p: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(x) % self.p for x in row) for row in self.rows))
        if self.rows and any(len(r) != len(self.rows[0]) for r in self.rows):
            raise ValueError("ragged matrix")

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def to_array(self) -> np.ndarray:
        r, c = self.shape
        return np.array(self.rows, dtype=np.int64).reshape(r, c)


def shift_matrix(k: int, level: int) -> np.ndarray:
    """k x k matrix passing the top `level` of k symbols: the lower shift
    matrix S raised to the power k - level. Rank equals level."""
    if not 0 <= level <= k:
        raise ValueError(f"shift level {level} outside [0, {k}]")
    M = np.zeros((k, k), dtype=np.int64)
    for i in range(level):
        M[k - level + i, i] = 1
    return M


def _rank_mod_p(a: np.ndarray, p: int) -> int:
    """Rank by Gaussian elimination with exact arithmetic mod p."""
    a = a.astype(np.int64) % p
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        pivot = -1
        for r in range(rank, rows):
            if a[r, col] % p:
                pivot = r
                break
        if pivot < 0:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        inv = pow(int(a[rank, col]), p - 2, p)
        a[rank] = (a[rank] * inv) % p
        for r in range(rows):
            if r != rank and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank


def rank_mod_p(m: FieldMatrix) -> int:
    if not m.rows:
        return 0
    return _rank_mod_p(m.to_array(), m.p)


class LindetEvaluator:
    """Caching rank evaluator, mirroring GaussianEvaluator's interface."""

    def __init__(self, net: Network):
        if net.model.kind != LINEAR_DETERMINISTIC:
            raise ModelMismatch(f"expected a linear deterministic model, got {net.model.kind}")
        self.net = net
        self.p = net.model.p
        self.k = net.model.k
        self.blocks: dict[tuple[int, int], np.ndarray] = {}
        for e in net.edges:
            if isinstance(e.gain, ShiftLevel):
                self.blocks[(e.u, e.v)] = shift_matrix(self.k, e.gain.level)
            elif isinstance(e.gain, GainMatrix):
                self.blocks[(e.u, e.v)] = np.array(e.gain.rows, dtype=np.int64) % self.p
            else:
                raise ModelMismatch(f"non-deterministic gain on edge ({e.u},{e.v})")
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
        k = self.k
        M = np.zeros((k * len(B), k * len(A)), dtype=np.int64)
        filled = False
        for j, u in enumerate(A):
            for i, v in enumerate(B):
                blk = self.blocks.get((u, v))
                if blk is not None:
                    M[i * k:(i + 1) * k, j * k:(j + 1) * k] = blk
                    filled = True
        val = float(_rank_mod_p(M, self.p)) if filled else 0.0
        self._pair_cache[key] = val
        return val

    def mode_value(self, omega_mask: int, tx_mask: int, full_mask: int) -> float:
        return self.pair_value(omega_mask & tx_mask, full_mask & ~omega_mask & ~tx_mask)

    def component_values(self, comp: tuple[int, ...], inside_mask: int) -> np.ndarray:
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
            out[idx] = self.pair_value(inside_mask & tx, comp_mask & ~inside_mask & ~tx)
        self._comp_cache[key] = out
        return out


def lindet_mode_cut_value(net: Network, omega: Cut, mode: ModeConfig) -> int:
    net.validate_cut(omega)
    ev = LindetEvaluator(net)
    full = (1 << net.num_nodes) - 1
    return int(ev.mode_value(omega.mask, mode.mask, full))


def lindet_expected_cut_value(net: Network, omega: Cut, weights: Schedule | GroupSchedule) -> float:
    """Schedule-weighted rank across the cut; accepts a joint schedule or
    group-local distributions (decomposed by cut-graph component)."""
    net.validate_cut(omega)
    ev = LindetEvaluator(net)
    full = (1 << net.num_nodes) - 1
    om = omega.mask
    if isinstance(weights, Schedule):
        return sum(p * ev.mode_value(om, m.mask, full) for m, p in weights.entries.items())
    total = 0.0
    for comp_mask in _component_masks(net, om):
        comp = nodes_of(comp_mask)
        r = first_covering_group(weights.groups, frozenset(comp))
        vals = ev.component_values(comp, om & comp_mask)
        marg = _marginal_vector(weights.groups[r], weights.pmfs[r], comp)
        total += float(marg @ vals)
    return total


def lindet_fullduplex_cut_value(net: Network, omega: Cut) -> int:
    net.validate_cut(omega)
    ev = LindetEvaluator(net)
    full = (1 << net.num_nodes) - 1
    return int(ev.pair_value(omega.mask, full & ~omega.mask))
