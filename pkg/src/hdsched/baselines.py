"""Reference schedules and the full-duplex upper bound.

The naive schedule alternates layer parities: even layers transmit in one
slot, odd layers in the other, half the time each. On a layered network
every receiver layer hears exactly one transmitter layer, so each cut's
log-det splits per layer pair and the naive schedule collects each pair's
full-duplex value exactly half the time: its min-cut is one half of the
full-duplex bound, which makes it a sharp sanity anchor for the optimizer.

The simple random schedule splits every relay layer into two halves that
run the alternation with opposite phases, so some nodes of each layer
transmit in every slot (source always transmits, destination always
receives).
"""

from __future__ import annotations

import numpy as np

from .network import Cut, ModeConfig, Network, Schedule
from .sfm import CutObjective, min_cut


class NotLayered(ValueError):
    """Network is not a layered graph (source layer to destination layer)."""


class LayerTooThin(ValueError):
    """Relay layer has fewer than two nodes; it cannot be split."""


class ZeroFullDuplex(ValueError):
    """Full-duplex bound is zero; ratios are undefined."""


def infer_layers(net: Network) -> tuple[tuple[int, ...], ...]:
    """Recover the layer structure: breadth-first depth from the source,
    validated so that every edge goes exactly one layer forward, the source
    and destination sit alone in the first and last layer, and every node is
    reachable."""
    depth = {net.source: 0}
    frontier = [net.source]
    while frontier:
        nxt: list[int] = []
        for u in frontier:
            for v in net.out_neighbors[u]:
                if v not in depth:
                    depth[v] = depth[u] + 1
                    nxt.append(v)
        frontier = nxt
    if len(depth) != net.num_nodes:
        missing = sorted(set(range(net.num_nodes)) - set(depth))
        raise NotLayered(f"nodes {missing} unreachable from the source")
    for e in net.edges:
        if depth[e.v] != depth[e.u] + 1:
            raise NotLayered(f"edge ({e.u},{e.v}) spans layers {depth[e.u]} -> {depth[e.v]}")
    n_layers = max(depth.values()) + 1
    layers = [[] for _ in range(n_layers)]
    for v in range(net.num_nodes):
        layers[depth[v]].append(v)
    if layers[0] != [net.source]:
        raise NotLayered("source does not sit alone in the first layer")
    if layers[-1] != [net.destination]:
        raise NotLayered(f"destination is not alone in the last layer {layers[-1]}")
    return tuple(tuple(l) for l in layers)


def naive_schedule(net: Network) -> Schedule:
    """Half/half alternation by layer parity; every node follows its layer."""
    layers = infer_layers(net)
    even = [v for i, l in enumerate(layers) if i % 2 == 0 for v in l]
    odd = [v for i, l in enumerate(layers) if i % 2 == 1 for v in l]
    a = ModeConfig.from_transmitters(net.num_nodes, even)
    b = ModeConfig.from_transmitters(net.num_nodes, odd)
    return Schedule({a: 0.5, b: 0.5})


def simple_random_schedule(net: Network, seed: int | None = None) -> Schedule:
    """Random half/half split of each relay layer, the two halves alternating
    with opposite phases. The source always transmits and the destination
    always receives. Needs every relay layer to have at least two nodes."""
    layers = infer_layers(net)
    for i, l in enumerate(layers[1:-1], start=1):
        if len(l) < 2:
            raise LayerTooThin(f"layer {i} has {len(l)} node(s); cannot split")
    rng = np.random.default_rng(seed)
    first_half: set[int] = set()
    for l in layers[1:-1]:
        picked = rng.choice(len(l), size=(len(l) + 1) // 2, replace=False)
        first_half.update(l[i] for i in picked)

    def transmitters(phase: int) -> list[int]:
        tx = [net.source]
        for i, l in enumerate(layers[1:-1], start=1):
            for v in l:
                half = 0 if v in first_half else 1
                if (i + half) % 2 == phase:
                    tx.append(v)
        return tx

    a = ModeConfig.from_transmitters(net.num_nodes, transmitters(0))
    b = ModeConfig.from_transmitters(net.num_nodes, transmitters(1))
    return Schedule({a: 0.5, b: 0.5})


def full_duplex_bound(net: Network, method: str = "auto") -> float:
    """Min-cut value with every node transmitting and receiving at once."""
    return min_cut(CutObjective(net, None), method=method).value


def hd_fd_ratio(net: Network, schedule: Schedule, method: str = "auto") -> float:
    """Half-duplex min-cut under the schedule over the full-duplex bound."""
    fd = full_duplex_bound(net, method=method)
    if fd <= 0.0:
        raise ZeroFullDuplex("full-duplex min-cut is zero")
    hd = min_cut(CutObjective(net, schedule), method=method).value
    return hd / fd
