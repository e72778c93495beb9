"""JSON interchange for networks and schedules.

The on-disk format keeps floats as decimal strings (shortest round-trip
repr) so that serialize -> deserialize is the identity and re-serializing a
loaded document is byte-identical. Documents are emitted with sorted keys.
"""

from __future__ import annotations

import json
from typing import Any

from .network import (
    ChannelModel,
    ComplexScalar,
    GAUSSIAN_COMPLEX,
    GAUSSIAN_REAL,
    GainMatrix,
    GroupSchedule,
    LINEAR_DETERMINISTIC,
    ModeConfig,
    Network,
    RealScalar,
    Schedule,
    ShiftLevel,
    make_network,
)


class ParseError(ValueError):
    """Structurally invalid document; .location points at the offender."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_float(raw: Any, location: str) -> float:
    if not isinstance(raw, str):
        raise ParseError(location, f"expected a decimal string, got {type(raw).__name__}")
    try:
        return float(raw)
    except ValueError:
        raise ParseError(location, f"bad decimal string {raw!r}") from None


def _dump(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _load(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("$", f"invalid JSON: {exc}") from None


def _expect(doc: Any, key: str, location: str) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(location, f"missing field {key!r}")
    return doc[key]


# ---------------------------------------------------------------------------
# networks


def _gain_doc(gain) -> Any:
    if isinstance(gain, RealScalar):
        return _fmt(gain.value)
    if isinstance(gain, ComplexScalar):
        return {"im": _fmt(gain.im), "re": _fmt(gain.re)}
    if isinstance(gain, ShiftLevel):
        return {"shift": gain.level}
    if isinstance(gain, GainMatrix):
        return {"matrix": [list(row) for row in gain.rows]}
    raise TypeError(f"unknown gain {gain!r}")


def _gain_from_doc(doc: Any, kind: str, location: str):
    if kind == GAUSSIAN_REAL:
        return _parse_float(doc, location)
    if kind == GAUSSIAN_COMPLEX:
        if not isinstance(doc, dict):
            raise ParseError(location, "complex gain must be an object with re/im")
        re = _parse_float(_expect(doc, "re", location), location + ".re")
        im = _parse_float(_expect(doc, "im", location), location + ".im")
        return ComplexScalar(re, im)
    if isinstance(doc, dict) and "shift" in doc:
        if not isinstance(doc["shift"], int):
            raise ParseError(location + ".shift", "shift level must be an integer")
        return ShiftLevel(doc["shift"])
    if isinstance(doc, dict) and "matrix" in doc:
        rows = doc["matrix"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ParseError(location + ".matrix", "matrix must be a list of rows")
        return GainMatrix(tuple(tuple(int(x) for x in r) for r in rows))
    raise ParseError(location, "deterministic gain must carry 'shift' or 'matrix'")


def network_to_json(net: Network) -> str:
    model: dict[str, Any] = {"kind": net.model.kind}
    if net.model.kind == LINEAR_DETERMINISTIC:
        model["p"] = net.model.p
        model["k"] = net.model.k
    doc = {
        "nodes": net.num_nodes,
        "source": net.source,
        "dest": net.destination,
        "model": model,
        "edges": [{"u": e.u, "v": e.v, "gain": _gain_doc(e.gain)} for e in net.edges],
    }
    return _dump(doc)


def network_from_json(text: str) -> Network:
    doc = _load(text)
    nodes = _expect(doc, "nodes", "$")
    source = _expect(doc, "source", "$")
    dest = _expect(doc, "dest", "$")
    model_doc = _expect(doc, "model", "$")
    kind = _expect(model_doc, "kind", "$.model")
    if kind not in (GAUSSIAN_REAL, GAUSSIAN_COMPLEX, LINEAR_DETERMINISTIC):
        raise ParseError("$.model.kind", f"unknown channel model {kind!r}")
    if kind == LINEAR_DETERMINISTIC:
        model = ChannelModel(kind, p=_expect(model_doc, "p", "$.model"), k=_expect(model_doc, "k", "$.model"))
    else:
        model = ChannelModel(kind)
    edges_doc = _expect(doc, "edges", "$")
    if not isinstance(edges_doc, list):
        raise ParseError("$.edges", "edges must be a list")
    edges = []
    for i, e in enumerate(edges_doc):
        loc = f"$.edges[{i}]"
        u = _expect(e, "u", loc)
        v = _expect(e, "v", loc)
        gain = _gain_from_doc(_expect(e, "gain", loc), kind, loc + ".gain")
        edges.append((u, v, gain))
    return make_network(nodes, source, dest, edges, model)


# ---------------------------------------------------------------------------
# schedules


def schedule_to_json(sched: Schedule) -> str:
    entries = [{"mode": str(m), "p": _fmt(p)} for m, p in sched.entries.items()]
    entries.sort(key=lambda e: e["mode"])
    return _dump({"nodes": sched.num_nodes, "entries": entries})


def schedule_from_json(text: str) -> Schedule:
    doc = _load(text)
    n = _expect(doc, "nodes", "$")
    entries_doc = _expect(doc, "entries", "$")
    if not isinstance(entries_doc, list):
        raise ParseError("$.entries", "entries must be a list")
    entries = {}
    for i, e in enumerate(entries_doc):
        loc = f"$.entries[{i}]"
        mode = _expect(e, "mode", loc)
        if not isinstance(mode, str) or len(mode) != n or any(c not in "01" for c in mode):
            raise ParseError(loc + ".mode", f"mode must be a {n}-character bit string")
        p = _parse_float(_expect(e, "p", loc), loc + ".p")
        entries[ModeConfig(tuple(int(c) for c in mode))] = p
    return Schedule(entries)


def group_schedule_to_json(gs: GroupSchedule) -> str:
    pmf_docs = []
    for g, pmf in zip(gs.groups, gs.pmfs):
        entries = [{"mode": "".join(str(b) for b in m), "p": _fmt(p)} for m, p in pmf.items()]
        entries.sort(key=lambda e: e["mode"])
        pmf_docs.append(entries)
    return _dump({"groups": [list(g) for g in gs.groups], "pmfs": pmf_docs})


def group_schedule_from_json(text: str) -> GroupSchedule:
    doc = _load(text)
    groups_doc = _expect(doc, "groups", "$")
    pmfs_doc = _expect(doc, "pmfs", "$")
    if not isinstance(groups_doc, list) or not isinstance(pmfs_doc, list):
        raise ParseError("$", "groups and pmfs must be lists")
    if len(groups_doc) != len(pmfs_doc):
        raise ParseError("$.pmfs", "pmfs must match groups in length")
    groups = []
    pmfs = []
    for i, (g, pmf_doc) in enumerate(zip(groups_doc, pmfs_doc)):
        if not isinstance(g, list):
            raise ParseError(f"$.groups[{i}]", "group must be a list of node ids")
        group = tuple(int(v) for v in g)
        pmf = {}
        for j, e in enumerate(pmf_doc):
            loc = f"$.pmfs[{i}][{j}]"
            mode = _expect(e, "mode", loc)
            if not isinstance(mode, str) or len(mode) != len(group) or any(c not in "01" for c in mode):
                raise ParseError(loc + ".mode", f"mode must be a {len(group)}-character bit string")
            pmf[tuple(int(c) for c in mode)] = _parse_float(_expect(e, "p", loc), loc + ".p")
        groups.append(group)
        pmfs.append(pmf)
    return GroupSchedule(tuple(groups), tuple(pmfs))
