"""Bitmask helpers for node subsets.

Node subsets are manipulated as Python ints in the hot paths (one bit per
node id). Public API types use frozensets/tuples; these helpers convert.
"""

from __future__ import annotations

from typing import Iterable, Iterator


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def nodes_of(mask: int) -> tuple[int, ...]:
    """Ascending node ids contained in the mask."""
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def iter_bits(mask: int) -> Iterator[int]:
    v = 0
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1
