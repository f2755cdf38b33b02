"""Trace-replay oracle for access classification.

Replays the kernel's address stream over a small rectangular grid and, at
one probe iteration away from the edges, measures for every read when the
element was last touched: never (new), earlier in the same row sweep
(L1-resident) or ``k`` row sweeps ago (layer-condition dependent, reuse
distance ``k`` rows). The LRU stack distance of each read is reported too.

Deliberately shares nothing with :mod:`p2ecm.ecm.classify` beyond the
StencilAccessSpec it replays.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass


@dataclass(frozen=True)
class ReplayedRead:
    array: str
    offset: tuple
    kind: str  # "new" | "l1" | "lc"
    reuse_rows: int
    stack_distance: int  # distinct elements touched since the previous use; -1 if never used


def replay(spec, size: int = 8, probe=None) -> list[ReplayedRead]:
    px, py = probe if probe is not None else (size // 2, size // 2)
    last_touch: dict = {}
    lru: OrderedDict = OrderedDict()
    result = []
    for y in range(size):
        for x in range(size):
            seen_now = set()
            for reads in spec.accesses:
                for r in reads:
                    key = (r.source, x + r.dx, y + r.dy)
                    if (x, y) == (px, py) and key not in seen_now:
                        seen_now.add(key)
                        result.append(_observe(r, key, y, last_touch, lru))
                    last_touch[key] = y
                    lru.pop(key, None)
                    lru[key] = None
            if (x, y) == (px, py):
                return result
    raise ValueError(f"probe {probe} lies outside a {size}x{size} grid")


def _observe(read, key, y, last_touch, lru) -> ReplayedRead:
    if key not in last_touch:
        return ReplayedRead(read.source, (read.dx, read.dy), "new", 0, -1)
    keys = list(lru)
    distance = len(keys) - 1 - keys.index(key)
    rows = y - last_touch[key]
    return ReplayedRead(read.source, (read.dx, read.dy), "l1" if rows == 0 else "lc", rows, distance)


def replay_counts(spec, size: int = 8, probe=None) -> tuple[int, int, int]:
    reads = replay(spec, size, probe)
    return (sum(r.kind == "new" for r in reads),
            sum(r.kind == "l1" for r in reads),
            sum(r.kind == "lc" for r in reads))
