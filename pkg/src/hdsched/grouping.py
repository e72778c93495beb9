"""Node groupings and tree decompositions for decomposable schedules.

A grouping is valid for cut decomposition when every connected component of
every cut graph lies inside some group; then each cut value is a sum of
per-group terms and a schedule can be stored as group-local marginals. The
greedy heuristic grows each group to a transmit/receive closure, which makes
three checkable conditions hold by construction:

  1. every node with an outgoing edge is a transmitter in some group,
  2. a transmitter's out-neighbors all belong to its group,
  3. a receiver's in-neighbors all belong to its group.

A tree decomposition of the clique graph (original edges made undirected,
plus one clique per group) then turns the groups into bags whose local
distributions are mutually consistent extensions of some joint schedule;
reconstruct_joint rebuilds one explicitly by the junction-tree product
formula.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._masks import mask_of, nodes_of
from .gauss import _component_masks
from .network import GroupSchedule, InconsistentMarginals, ModeConfig, Network, Schedule
from .sfm import GroundSetTooLarge


class GroupingInvalid(ValueError):
    """Grouping cannot support cut decomposition."""


class InternalVerificationFailure(RuntimeError):
    """A decomposition failed its own structural checks; indicates a bug."""


@dataclass(frozen=True)
class NodeGrouping:
    """Ordered list of node groups (each a sorted node tuple); groups may
    overlap and their union covers the network's nodes."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(sorted(set(g))) for g in self.groups))

    def covered(self) -> frozenset[int]:
        out: set[int] = set()
        for g in self.groups:
            out.update(g)
        return frozenset(out)


@dataclass(frozen=True)
class UGraph:
    """Simple undirected graph as adjacency sets."""

    num_nodes: int
    adj: tuple[frozenset[int], ...]

    def edge_set(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset((u, v)) for u in range(self.num_nodes) for v in self.adj[u] if u < v)


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags (sorted node tuples) connected by tree edges (bag index pairs)."""

    bags: tuple[tuple[int, ...], ...]
    tree_edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        bags = tuple(tuple(sorted(set(b))) for b in self.bags)
        edges = tuple(tuple(sorted(e)) for e in self.tree_edges)
        object.__setattr__(self, "bags", bags)
        object.__setattr__(self, "tree_edges", edges)
        k = len(bags)
        if any(not (0 <= a < k and 0 <= b < k) for a, b in edges):
            raise ValueError("tree edge references a missing bag")
        if len(edges) != k - 1:
            raise ValueError(f"{k} bags need {k - 1} tree edges, got {len(edges)}")
        # connectivity (with k-1 edges this also rules out cycles)
        seen = {0}
        frontier = [0]
        adj: list[list[int]] = [[] for _ in range(k)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        while frontier:
            cur = frontier.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        if len(seen) != k:
            raise ValueError("tree edges do not connect all bags")

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1


# ---------------------------------------------------------------------------
# grouping heuristic and checks


def _closure(net: Network, seed: int) -> tuple[set[int], set[int]]:
    """Grow a group from a seed transmitter: a transmitter pulls in all its
    out-neighbors as receivers, a receiver pulls in all its in-neighbors as
    transmitters, to a fixpoint."""
    tx: set[int] = set()
    rx: set[int] = set()
    new_tx = [seed]
    new_rx: list[int] = []
    while new_tx or new_rx:
        if new_tx:
            t = new_tx.pop()
            if t in tx:
                continue
            tx.add(t)
            for v in net.out_neighbors[t]:
                if v not in rx:
                    new_rx.append(v)
        else:
            r = new_rx.pop()
            if r in rx:
                continue
            rx.add(r)
            for u in net.in_neighbors[r]:
                if u not in tx:
                    new_tx.append(u)
    return tx, rx


def heuristic_grouping(net: Network) -> NodeGrouping:
    """Greedy grouping: seed each node that is not yet a transmitter in any
    group (and has somewhere to transmit to) and take its closure. Isolated
    nodes get singleton groups so the union always covers the network."""
    groups: list[tuple[int, ...]] = []
    is_tx_somewhere: set[int] = set()
    for seed in range(net.num_nodes):
        if seed in is_tx_somewhere or not net.out_neighbors[seed]:
            continue
        tx, rx = _closure(net, seed)
        groups.append(tuple(sorted(tx | rx)))
        is_tx_somewhere.update(tx)
    covered = set().union(*groups) if groups else set()
    for v in range(net.num_nodes):
        if v not in covered:
            groups.append((v,))
    return NodeGrouping(tuple(groups))


def check_sufficient_conditions(net: Network, grouping: NodeGrouping) -> tuple[bool, list[str]]:
    """Check the three closure conditions that guarantee every cut-graph
    component fits inside some group. Sufficient, not necessary."""
    violations: list[str] = []
    tx_somewhere: set[int] = set()
    for gi, g in enumerate(grouping.groups):
        members = set(g)
        for i in g:
            out_in_group = net.out_neighbors[i] & members
            if out_in_group:
                tx_somewhere.add(i)
                missing = net.out_neighbors[i] - members
                if missing:
                    violations.append(
                        f"group {gi} {g}: transmitter {i} has out-neighbors {sorted(missing)} outside"
                    )
            if net.in_neighbors[i] & members:
                missing = net.in_neighbors[i] - members
                if missing:
                    violations.append(
                        f"group {gi} {g}: receiver {i} has in-neighbors {sorted(missing)} outside"
                    )
    for v in range(net.num_nodes):
        if net.out_neighbors[v] and v not in tx_somewhere:
            violations.append(f"node {v} is never a transmitter in any group")
    if grouping.covered() != frozenset(range(net.num_nodes)):
        violations.append("groups do not cover every node")
    return (not violations, violations)


def check_coverage_exhaustive(net: Network, grouping: NodeGrouping, cap: int = 16) -> bool:
    """Check directly, for every source/destination cut, that each cut-graph
    component is contained in some group."""
    ground = [v for v in range(net.num_nodes) if v not in (net.source, net.destination)]
    if len(ground) > cap:
        raise GroundSetTooLarge(f"{len(ground)} relay nodes exceeds exhaustive cap {cap}")
    group_sets = [set(g) for g in grouping.groups]
    src = 1 << net.source
    for mask in range(1 << len(ground)):
        om = src
        for i, v in enumerate(ground):
            if (mask >> i) & 1:
                om |= 1 << v
        for comp_mask in _component_masks(net, om):
            comp = set(nodes_of(comp_mask))
            if not any(comp <= gs for gs in group_sets):
                return False
    return True


# ---------------------------------------------------------------------------
# clique graph and tree decomposition


def build_clique_graph(net: Network, grouping: NodeGrouping) -> UGraph:
    """Undirected version of the network plus a clique over every group."""
    adj = [set() for _ in range(net.num_nodes)]

    def add(u: int, v: int) -> None:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)

    for e in net.edges:
        add(e.u, e.v)
    for g in grouping.groups:
        for i, u in enumerate(g):
            for v in g[i + 1:]:
                add(u, v)
    return UGraph(net.num_nodes, tuple(frozenset(s) for s in adj))


def tree_decompose(g: UGraph) -> TreeDecomposition:
    """Tree decomposition by node elimination with the min-fill rule
    (ties: smaller degree, then smaller node id). Bags that are subsets of a
    tree neighbor are merged away, and the result is verified against the
    three decomposition properties before being returned."""
    n = g.num_nodes
    work = [set(g.adj[v]) for v in range(n)]
    alive = set(range(n))
    elim_pos: dict[int, int] = {}
    raw_bags: list[tuple[int, frozenset[int]]] = []

    def fill_cost(v: int) -> int:
        nbrs = list(work[v])
        cost = 0
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1:]:
                if b not in work[a]:
                    cost += 1
        return cost

    while alive:
        v = min(alive, key=lambda u: (fill_cost(u), len(work[u]), u))
        nbrs = list(work[v])
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1:]:
                work[a].add(b)
                work[b].add(a)
        raw_bags.append((v, frozenset(work[v])))
        for a in nbrs:
            work[a].discard(v)
        elim_pos[v] = len(raw_bags) - 1
        alive.remove(v)

    bags = [frozenset({v}) | nbrs for v, nbrs in raw_bags]
    edges: list[tuple[int, int]] = []
    roots: list[int] = []
    for i, (v, nbrs) in enumerate(raw_bags):
        if nbrs:
            parent = min(nbrs, key=lambda u: elim_pos[u])
            edges.append((i, elim_pos[parent]))
        else:
            roots.append(i)
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))

    # contract tree edges whose bags are nested
    rep = list(range(len(bags)))

    def find(i: int) -> int:
        while rep[i] != i:
            rep[i] = rep[rep[i]]
            i = rep[i]
        return i

    changed = True
    while changed:
        changed = False
        for a, b in edges:
            ra, rb = find(a), find(b)
            if ra == rb:
                continue
            if bags[ra] <= bags[rb]:
                rep[ra] = rb
                changed = True
            elif bags[rb] <= bags[ra]:
                rep[rb] = ra
                changed = True

    kept = sorted({find(i) for i in range(len(bags))})
    index = {r: i for i, r in enumerate(kept)}
    final_bags = tuple(tuple(sorted(bags[r])) for r in kept)
    final_edges = {tuple(sorted((index[find(a)], index[find(b)]))) for a, b in edges if find(a) != find(b)}
    td = TreeDecomposition(final_bags, tuple(sorted(final_edges)))
    _verify_decomposition(g, td)
    return td


def _verify_decomposition(g: UGraph, td: TreeDecomposition) -> None:
    n = g.num_nodes
    bag_sets = [set(b) for b in td.bags]
    covered = set().union(*bag_sets) if bag_sets else set()
    if covered != set(range(n)):
        raise InternalVerificationFailure("decomposition does not cover every node")
    for u in range(n):
        for v in g.adj[u]:
            if u < v and not any(u in b and v in b for b in bag_sets):
                raise InternalVerificationFailure(f"edge ({u},{v}) not inside any bag")
    adj: list[list[int]] = [[] for _ in td.bags]
    for a, b in td.tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    for v in range(n):
        holding = [i for i, b in enumerate(bag_sets) if v in b]
        seen = {holding[0]}
        frontier = [holding[0]]
        holding_set = set(holding)
        while frontier:
            cur = frontier.pop()
            for nxt in adj[cur]:
                if nxt in holding_set and nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        if seen != holding_set:
            raise InternalVerificationFailure(f"bags containing node {v} are not connected in the tree")


def tree_decomposition_for(net: Network, grouping: NodeGrouping | None = None) -> TreeDecomposition:
    """Grouping -> clique graph -> tree decomposition, with the greedy
    heuristic filling in the grouping when none is given."""
    if grouping is None:
        grouping = heuristic_grouping(net)
    return tree_decompose(build_clique_graph(net, grouping))


# ---------------------------------------------------------------------------
# joint reconstruction


def reconstruct_joint(td: TreeDecomposition, gs: GroupSchedule, num_nodes: int | None = None, cap: int = 16) -> Schedule:
    """Rebuild a joint schedule from bag-local distributions by the
    junction-tree product: product of bag marginals over the product of
    tree-edge separator marginals, with 0/0 read as 0. Bag marginals of the
    result reproduce the inputs (up to float rounding) whenever the inputs
    are consistent."""
    if tuple(td.bags) != tuple(gs.groups):
        raise ValueError("group schedule is not indexed by the decomposition's bags")
    covered = sorted(gs.covered_nodes())
    if num_nodes is None:
        num_nodes = covered[-1] + 1
    if set(covered) != set(range(num_nodes)):
        raise ValueError("bags do not cover nodes 0..num_nodes-1")
    if num_nodes > cap:
        raise GroundSetTooLarge(f"{num_nodes} nodes exceeds joint reconstruction cap {cap}")

    # separator marginals, taken from the smaller-indexed endpoint bag
    separators: list[tuple[tuple[int, ...], dict[tuple[int, ...], float]]] = []
    worst = 0.0
    for a, b in td.tree_edges:
        shared = tuple(sorted(set(td.bags[a]) & set(td.bags[b])))
        if not shared:
            continue
        ma = gs.group_marginal(a, shared)
        mb = gs.group_marginal(b, shared)
        for key in set(ma) | set(mb):
            worst = max(worst, abs(ma.get(key, 0.0) - mb.get(key, 0.0)))
        separators.append((shared, ma))
    if worst > 1e-7:
        raise InconsistentMarginals(worst, "tree-edge separators")

    bag_pos = [tuple(b) for b in td.bags]
    entries: dict[ModeConfig, float] = {}
    total = 0.0
    for mask in range(1 << num_nodes):
        bits = tuple((mask >> v) & 1 for v in range(num_nodes))
        p = 1.0
        for bag, pmf in zip(bag_pos, gs.pmfs):
            p *= pmf.get(tuple(bits[v] for v in bag), 0.0)
            if p == 0.0:
                break
        if p != 0.0:
            for shared, marg in separators:
                d = marg.get(tuple(bits[v] for v in shared), 0.0)
                if d == 0.0:
                    p = 0.0
                    break
                p /= d
        if p > 0.0:
            entries[ModeConfig(bits)] = p
            total += p
    # consistent inputs make total == 1 up to rounding; normalize the residue
    entries = {m: p / total for m, p in entries.items()}
    return Schedule(entries)
