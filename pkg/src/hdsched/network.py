"""Core data model for half-duplex relay networks.

A network is a directed graph with one channel gain per edge, a designated
source and destination, and a channel model (real Gaussian, complex Gaussian,
or a finite-field linear deterministic model). Every node is half-duplex: at
any instant it either transmits or receives, never both.

* ``ModeConfig`` fixes one transmit/receive assignment for all nodes.
  Convention used everywhere: bit v = 1 means node v TRANSMITS.
* ``Schedule`` is a probability distribution over mode configurations
  (the fraction of time each configuration is active), stored sparsely.
* ``GroupSchedule`` stores one local distribution per node group instead of
  a joint distribution; overlapping groups must agree on their overlaps.
* ``Cut`` is a source side of a source/destination vertex cut.

All types are immutable after construction. Networks should be built through
``make_network``, which validates and reports every violation at once, or
through the generators at the bottom of this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from ._masks import mask_of, nodes_of

NodeId = int

SCHEDULE_SUM_TOL = 1e-9
GROUP_CONSISTENCY_TOL = 1e-7


class NetworkError(ValueError):
    """Base class for data-model validation errors."""


class InvalidNetwork(NetworkError):
    """Raised by make_network; carries every violation found.

    Each violation is a (code, message) pair. Codes: "self_loop",
    "duplicate_edge", "bad_gain_variant", "source_equals_destination",
    "node_out_of_range", "bad_model".
    """

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        super().__init__("; ".join(msg for _, msg in violations))

    def codes(self) -> set[str]:
        return {code for code, _ in self.violations}


class BadWidths(NetworkError):
    """Layer width vector rejected by gen_layered."""


class BadSize(NetworkError):
    """Node count rejected by gen_line_two_hop."""


class InvalidSchedule(NetworkError):
    """Schedule probabilities negative or not summing to one."""


class InconsistentMarginals(NetworkError):
    """Group-local distributions disagree on a group overlap."""

    def __init__(self, max_discrepancy: float, detail: str = ""):
        self.max_discrepancy = max_discrepancy
        msg = f"group marginals disagree by {max_discrepancy:.3e}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


# ---------------------------------------------------------------------------
# channel models and gains


GAUSSIAN_REAL = "gaussian_real"
GAUSSIAN_COMPLEX = "gaussian_complex"
LINEAR_DETERMINISTIC = "linear_deterministic"

_MODEL_KINDS = (GAUSSIAN_REAL, GAUSSIAN_COMPLEX, LINEAR_DETERMINISTIC)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class ChannelModel:
    """Channel model tag. Linear deterministic carries the field prime p and
    the per-node signal vector length k."""

    kind: str
    p: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind not in _MODEL_KINDS:
            raise NetworkError(f"unknown channel model kind {self.kind!r}")
        if self.kind == LINEAR_DETERMINISTIC:
            if self.p is None or self.k is None:
                raise NetworkError("linear deterministic model needs p and k")
            if not _is_prime(self.p):
                raise NetworkError(f"field order p={self.p} is not prime")
            if self.k < 1:
                raise NetworkError(f"signal length k={self.k} must be >= 1")
        elif self.p is not None or self.k is not None:
            raise NetworkError(f"{self.kind} model takes no p/k parameters")

    @property
    def is_gaussian(self) -> bool:
        return self.kind in (GAUSSIAN_REAL, GAUSSIAN_COMPLEX)


def gaussian_real() -> ChannelModel:
    return ChannelModel(GAUSSIAN_REAL)


def gaussian_complex() -> ChannelModel:
    return ChannelModel(GAUSSIAN_COMPLEX)


def linear_deterministic(p: int, k: int) -> ChannelModel:
    return ChannelModel(LINEAR_DETERMINISTIC, p=p, k=k)


@dataclass(frozen=True)
class RealScalar:
    value: float


@dataclass(frozen=True)
class ComplexScalar:
    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class ShiftLevel:
    """Shift-matrix gain for the linear deterministic model: a level n edge
    carries the top n of the k transmitted symbols (rank-n shift matrix)."""

    level: int


@dataclass(frozen=True)
class GainMatrix:
    """Explicit k x k transfer matrix over the model's field."""

    rows: tuple[tuple[int, ...], ...]


Gain = Union[RealScalar, ComplexScalar, ShiftLevel, GainMatrix]


def _coerce_gain(raw, model: ChannelModel) -> Gain:
    """Accept raw Python numbers/nested lists and validate tagged gains
    against the model. Raises ValueError with a reason on mismatch."""
    kind = model.kind
    if kind == GAUSSIAN_REAL:
        if isinstance(raw, RealScalar):
            return RealScalar(float(raw.value))
        if isinstance(raw, (int, float, np.integer, np.floating)) and not isinstance(raw, bool):
            return RealScalar(float(raw))
        raise ValueError(f"real Gaussian model needs a real scalar gain, got {type(raw).__name__}")
    if kind == GAUSSIAN_COMPLEX:
        if isinstance(raw, ComplexScalar):
            return ComplexScalar(float(raw.re), float(raw.im))
        if isinstance(raw, (complex, np.complexfloating)):
            return ComplexScalar(float(raw.real), float(raw.imag))
        if isinstance(raw, (int, float, np.integer, np.floating)) and not isinstance(raw, bool):
            return ComplexScalar(float(raw), 0.0)
        raise ValueError(f"complex Gaussian model needs a complex scalar gain, got {type(raw).__name__}")
    # linear deterministic
    k = model.k
    assert k is not None
    if isinstance(raw, ShiftLevel):
        raw = raw.level
        tagged = True
    else:
        tagged = False
    if isinstance(raw, (int, np.integer)) and not isinstance(raw, bool):
        n = int(raw)
        if not 0 <= n <= k:
            raise ValueError(f"shift level {n} outside [0, k={k}]")
        return ShiftLevel(n)
    if tagged:
        raise ValueError("shift level must be an integer")
    if isinstance(raw, GainMatrix):
        raw = raw.rows
    if isinstance(raw, (list, tuple)):
        rows = tuple(tuple(int(x) % model.p for x in row) for row in raw)
        if len(rows) != k or any(len(r) != k for r in rows):
            raise ValueError(f"gain matrix must be {k}x{k}")
        return GainMatrix(rows)
    raise ValueError(
        f"linear deterministic model needs a shift level or a {k}x{k} matrix, got {type(raw).__name__}"
    )


@dataclass(frozen=True)
class Edge:
    u: NodeId
    v: NodeId
    gain: Gain


# ---------------------------------------------------------------------------
# network


@dataclass(frozen=True)
class Network:
    """Validated relay network. Build through make_network."""

    num_nodes: int
    source: NodeId
    destination: NodeId
    edges: tuple[Edge, ...]
    model: ChannelModel

    @cached_property
    def gain_map(self) -> dict[tuple[NodeId, NodeId], Gain]:
        return {(e.u, e.v): e.gain for e in self.edges}

    @cached_property
    def out_neighbors(self) -> tuple[frozenset[NodeId], ...]:
        adj = [set() for _ in range(self.num_nodes)]
        for e in self.edges:
            adj[e.u].add(e.v)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def in_neighbors(self) -> tuple[frozenset[NodeId], ...]:
        adj = [set() for _ in range(self.num_nodes)]
        for e in self.edges:
            adj[e.v].add(e.u)
        return tuple(frozenset(s) for s in adj)

    @property
    def relay_nodes(self) -> tuple[NodeId, ...]:
        return tuple(v for v in range(self.num_nodes) if v not in (self.source, self.destination))

    def validate_cut(self, cut: "Cut") -> None:
        if self.source not in cut.members:
            raise NetworkError("cut must contain the source")
        if self.destination in cut.members:
            raise NetworkError("cut must not contain the destination")
        if any(not 0 <= v < self.num_nodes for v in cut.members):
            raise NetworkError("cut contains node ids outside the network")


def make_network(
    num_nodes: int,
    source: NodeId,
    destination: NodeId,
    edges: Iterable[tuple[NodeId, NodeId, object]],
    model: ChannelModel,
) -> Network:
    """Build and validate a Network, collecting every violation.

    Edge gains may be raw Python values (float/complex/int/nested lists) or
    tagged gain objects; either way they are checked against the model.
    """
    violations: list[tuple[str, str]] = []
    if num_nodes < 2:
        violations.append(("bad_model", f"need at least 2 nodes, got {num_nodes}"))
    if source == destination:
        violations.append(("source_equals_destination", f"source == destination == {source}"))
    for name, v in (("source", source), ("destination", destination)):
        if not 0 <= v < num_nodes:
            violations.append(("node_out_of_range", f"{name} {v} outside [0, {num_nodes})"))

    seen: set[tuple[NodeId, NodeId]] = set()
    built: list[Edge] = []
    for i, (u, v, raw) in enumerate(edges):
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            violations.append(("node_out_of_range", f"edge[{i}] ({u},{v}) endpoint outside [0, {num_nodes})"))
            continue
        if u == v:
            violations.append(("self_loop", f"edge[{i}] is a self loop at node {u}"))
            continue
        if (u, v) in seen:
            violations.append(("duplicate_edge", f"edge[{i}] duplicates ({u},{v})"))
            continue
        seen.add((u, v))
        try:
            gain = _coerce_gain(raw, model)
        except ValueError as exc:
            violations.append(("bad_gain_variant", f"edge[{i}] ({u},{v}): {exc}"))
            continue
        built.append(Edge(u, v, gain))

    if violations:
        raise InvalidNetwork(violations)
    return Network(num_nodes, source, destination, tuple(built), model)


# ---------------------------------------------------------------------------
# modes, cuts, schedules


@dataclass(frozen=True)
class ModeConfig:
    """One transmit/receive assignment. bits[v] == 1 means node v transmits,
    bits[v] == 0 means it receives."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise NetworkError("mode bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_mask(cls, mask: int, num_nodes: int) -> "ModeConfig":
        return cls(tuple((mask >> v) & 1 for v in range(num_nodes)))

    @classmethod
    def from_transmitters(cls, num_nodes: int, transmitters: Iterable[NodeId]) -> "ModeConfig":
        tx = set(transmitters)
        return cls(tuple(1 if v in tx else 0 for v in range(num_nodes)))

    @property
    def num_nodes(self) -> int:
        return len(self.bits)

    @property
    def mask(self) -> int:
        return mask_of(v for v, b in enumerate(self.bits) if b)

    @property
    def transmitters(self) -> frozenset[NodeId]:
        return frozenset(v for v, b in enumerate(self.bits) if b)

    @property
    def receivers(self) -> frozenset[NodeId]:
        return frozenset(v for v, b in enumerate(self.bits) if not b)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class Cut:
    """Source side of a vertex cut: the source must be a member and the
    destination must not be (checked against a network at point of use)."""

    members: frozenset[NodeId]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(v) for v in self.members))

    @property
    def mask(self) -> int:
        return mask_of(self.members)

    def complement(self, num_nodes: int) -> frozenset[NodeId]:
        return frozenset(range(num_nodes)) - self.members

    def __str__(self) -> str:
        return "{" + ",".join(str(v) for v in sorted(self.members)) + "}"


@dataclass(frozen=True)
class Schedule:
    """Sparse distribution over mode configurations. Missing modes have
    probability zero. Probabilities are nonnegative and sum to one within
    SCHEDULE_SUM_TOL."""

    entries: Mapping[ModeConfig, float]

    def __post_init__(self):
        cleaned: dict[ModeConfig, float] = {}
        n = None
        for m, p in self.entries.items():
            if not isinstance(m, ModeConfig):
                m = ModeConfig(tuple(m))
            p = float(p)
            if n is None:
                n = m.num_nodes
            elif m.num_nodes != n:
                raise InvalidSchedule("mode configurations have mixed lengths")
            if p < 0.0:
                raise InvalidSchedule(f"negative probability {p} for mode {m}")
            if p > 0.0:
                cleaned[m] = cleaned.get(m, 0.0) + p
        if not cleaned:
            raise InvalidSchedule("schedule has no support")
        total = sum(cleaned.values())
        if abs(total - 1.0) > SCHEDULE_SUM_TOL:
            raise InvalidSchedule(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "entries", cleaned)

    @property
    def num_nodes(self) -> int:
        return next(iter(self.entries)).num_nodes

    def prob(self, m: ModeConfig) -> float:
        return self.entries.get(m, 0.0)

    def support(self) -> tuple[ModeConfig, ...]:
        return tuple(sorted(self.entries, key=lambda m: m.bits))

    def node_duty(self, v: NodeId) -> float:
        """Fraction of time node v transmits."""
        return sum(p for m, p in self.entries.items() if m.bits[v])

    def duty_total(self) -> float:
        """Sum of per-node transmit fractions."""
        return sum(p * sum(m.bits) for m, p in self.entries.items())


def _pmf_marginal(
    group: Sequence[NodeId], pmf: Mapping[tuple[int, ...], float], onto: Sequence[NodeId]
) -> dict[tuple[int, ...], float]:
    """Marginalize a group-local pmf onto a subset of its nodes (given in the
    order of `onto`)."""
    pos = [group.index(v) for v in onto]
    out: dict[tuple[int, ...], float] = {}
    for m, p in pmf.items():
        key = tuple(m[i] for i in pos)
        out[key] = out.get(key, 0.0) + p
    return out


@dataclass(frozen=True)
class GroupSchedule:
    """One local mode distribution per node group.

    groups[i] is an ordered node tuple; pmfs[i] maps local bit tuples
    (aligned with groups[i]) to probabilities. Each local pmf sums to one
    within SCHEDULE_SUM_TOL, and any two groups agree on the marginal over
    their overlap within GROUP_CONSISTENCY_TOL.
    """

    groups: tuple[tuple[NodeId, ...], ...]
    pmfs: tuple[Mapping[tuple[int, ...], float], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(v) for v in g) for g in self.groups)
        if len(groups) != len(self.pmfs):
            raise NetworkError("groups and pmfs have different lengths")
        if not groups:
            raise NetworkError("need at least one group")
        pmfs = []
        for g, pmf in zip(groups, self.pmfs):
            if len(set(g)) != len(g):
                raise NetworkError(f"group {g} repeats a node")
            cleaned: dict[tuple[int, ...], float] = {}
            for m, p in pmf.items():
                m = tuple(int(b) for b in m)
                if len(m) != len(g) or any(b not in (0, 1) for b in m):
                    raise InvalidSchedule(f"bad local mode {m} for group {g}")
                p = float(p)
                if p < 0.0:
                    raise InvalidSchedule(f"negative probability {p} in group {g}")
                if p > 0.0:
                    cleaned[m] = cleaned.get(m, 0.0) + p
            total = sum(cleaned.values())
            if abs(total - 1.0) > SCHEDULE_SUM_TOL:
                raise InvalidSchedule(f"group {g} probabilities sum to {total!r}")
            pmfs.append(cleaned)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "pmfs", tuple(pmfs))
        gap = self.max_marginal_gap()
        if gap > GROUP_CONSISTENCY_TOL:
            raise InconsistentMarginals(gap)

    def max_marginal_gap(self) -> float:
        """Largest disagreement between any two groups' marginals on their
        overlap (0 when no groups overlap)."""
        worst = 0.0
        for i in range(len(self.groups)):
            for j in range(i + 1, len(self.groups)):
                shared = tuple(sorted(set(self.groups[i]) & set(self.groups[j])))
                if not shared:
                    continue
                mi = _pmf_marginal(self.groups[i], self.pmfs[i], shared)
                mj = _pmf_marginal(self.groups[j], self.pmfs[j], shared)
                for key in set(mi) | set(mj):
                    worst = max(worst, abs(mi.get(key, 0.0) - mj.get(key, 0.0)))
        return worst

    def covered_nodes(self) -> frozenset[NodeId]:
        out: set[NodeId] = set()
        for g in self.groups:
            out.update(g)
        return frozenset(out)

    def group_marginal(self, i: int, onto: Sequence[NodeId]) -> dict[tuple[int, ...], float]:
        return _pmf_marginal(self.groups[i], self.pmfs[i], onto)

    def node_duty(self, v: NodeId) -> float:
        """Transmit fraction of node v, read from the first group containing it."""
        for g, pmf in zip(self.groups, self.pmfs):
            if v in g:
                idx = g.index(v)
                return sum(p for m, p in pmf.items() if m[idx])
        raise KeyError(f"node {v} not in any group")

    def duty_total(self) -> float:
        return sum(self.node_duty(v) for v in sorted(self.covered_nodes()))


# ---------------------------------------------------------------------------
# generators


def _draw_gain(rng: np.random.Generator, kind: str, power: float, k: int | None):
    if kind == "unit":
        return 1.0
    if kind == "gaussian":
        return float(rng.normal(0.0, np.sqrt(power)))
    if kind == "complex_gaussian":
        s = np.sqrt(power / 2.0)
        return complex(rng.normal(0.0, s), rng.normal(0.0, s))
    if kind == "shift":
        return int(rng.integers(0, k + 1))
    raise ValueError(f"unknown gain kind {kind!r}")


def _model_for(kind: str, p: int, k: int) -> ChannelModel:
    if kind in ("unit", "gaussian"):
        return gaussian_real()
    if kind == "complex_gaussian":
        return gaussian_complex()
    if kind == "shift":
        return linear_deterministic(p, k)
    raise ValueError(f"unknown gain kind {kind!r}")


def gen_layered(
    widths: Sequence[int],
    gains: str = "unit",
    power: float = 1.0,
    k: int = 2,
    p: int = 2,
    seed: int | None = None,
) -> Network:
    """Layered network: widths[i] nodes in layer i, consecutive layers fully
    connected, source alone in the first layer and destination alone in the
    last. Gains: "unit", "gaussian" (N(0, power)), "complex_gaussian"
    (circular, variance power), or "shift" (levels uniform on 0..k)."""
    widths = tuple(int(w) for w in widths)
    if len(widths) < 2:
        raise BadWidths(f"need at least 2 layers, got {len(widths)}")
    if widths[0] != 1 or widths[-1] != 1:
        raise BadWidths(f"first and last layer must have width 1, got {widths}")
    if any(w < 1 for w in widths):
        raise BadWidths(f"layer widths must be positive, got {widths}")

    rng = np.random.default_rng(seed)
    layers: list[list[int]] = []
    nxt = 0
    for w in widths:
        layers.append(list(range(nxt, nxt + w)))
        nxt += w
    edges = []
    for a, b in zip(layers, layers[1:]):
        for u in a:
            for v in b:
                edges.append((u, v, _draw_gain(rng, gains, power, k)))
    return make_network(nxt, 0, nxt - 1, edges, _model_for(gains, p, k))


def gen_line_two_hop(
    n: int,
    gains: str = "unit",
    power: float = 1.0,
    k: int = 2,
    p: int = 2,
    seed: int | None = None,
) -> Network:
    """Line network 0 -> 1 -> ... -> n-1 with extra two-hop skip edges
    (i, i+2). Source is node 0, destination node n-1."""
    n = int(n)
    if n < 3:
        raise BadSize(f"line-with-skips needs at least 3 nodes, got {n}")
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n - 1):
        edges.append((i, i + 1, _draw_gain(rng, gains, power, k)))
    for i in range(n - 2):
        edges.append((i, i + 2, _draw_gain(rng, gains, power, k)))
    return make_network(n, 0, n - 1, edges, _model_for(gains, p, k))
