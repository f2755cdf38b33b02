"""Stencil access descriptions for the four P2 apply kernels.

A spec names its source and target arrays, the layout of each, and for
every target the ordered list of weighted reads. The order of the reads is
the summation order used by every executor in the package (kernels,
interpreter, generated access plans), which is what makes their results
bit-identical.

Offsets are ``(dx, dy)`` relative to the target point ``(x, y)``; the
listing notation ``a[y+1][x-1]`` becomes ``dx=-1, dy=+1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import SpecError
from .grid import EDGE, VERTEX


class Access(NamedTuple):
    source: str
    dx: int
    dy: int
    weight: int


@dataclass(frozen=True)
class StencilAccessSpec:
    name: str
    layouts: dict  # array id -> VERTEX | EDGE
    targets: tuple[str, ...]
    accesses: tuple[tuple[Access, ...], ...]  # one tuple per target, same order as targets

    def __post_init__(self):
        if len(self.targets) != len(self.accesses):
            raise SpecError(f"{self.name}: {len(self.targets)} targets but {len(self.accesses)} access lists")
        for array in self.targets + tuple(a.source for a in self.all_accesses()):
            if self.layouts.get(array) not in (VERTEX, EDGE):
                raise SpecError(f"{self.name}: array {array!r} has no layout")
        indices = sorted(a.weight for a in self.all_accesses())
        if indices != list(range(len(indices))):
            raise SpecError(f"{self.name}: weight indices must be dense 0..n-1, got {indices}")
        if set(self.targets) & set(self.sources):
            raise SpecError(f"{self.name}: an array cannot be both source and target")

    def __hash__(self):
        return hash((self.name, self.targets, self.accesses))

    @property
    def n_weights(self) -> int:
        return sum(len(acc) for acc in self.accesses)

    @property
    def sources(self) -> tuple[str, ...]:
        seen = []
        for a in self.all_accesses():
            if a.source not in seen:
                seen.append(a.source)
        return tuple(seen)

    def layout_of(self, array: str) -> str:
        return self.layouts[array]

    def all_accesses(self):
        for acc in self.accesses:
            yield from acc

    def bound_accesses(self):
        """Every ``(array, dx, dy)`` that must be in bounds, targets included."""
        for t in self.targets:
            yield t, 0, 0
        for a in self.all_accesses():
            yield a.source, a.dx, a.dy

    def offsets(self, array: str) -> list[tuple[int, int]]:
        """Distinct offsets read from ``array``, in first-use order."""
        out = []
        for a in self.all_accesses():
            if a.source == array and (a.dx, a.dy) not in out:
                out.append((a.dx, a.dy))
        return out

    def check_weights(self, weights) -> None:
        if len(weights) != self.n_weights:
            raise SpecError(f"{self.name} expects {self.n_weights} weights, got {len(weights)}")


def _spec(name, layouts, body):
    targets = tuple(t for t, _ in body)
    accesses = tuple(tuple(Access(*a) for a in reads) for _, reads in body)
    return StencilAccessSpec(name, layouts, targets, accesses)


_EDGE_SRC = {"src_edge_x": EDGE, "src_edge_y": EDGE, "src_edge_xy": EDGE}
_EDGE_DST = {"dst_edge_x": EDGE, "dst_edge_y": EDGE, "dst_edge_xy": EDGE}

VTV = _spec(
    "vtv",
    {"src_vertex": VERTEX, "dst_vertex": VERTEX},
    [
        ("dst_vertex", [
            ("src_vertex", 1, -1, 0), ("src_vertex", 1, 0, 1),
            ("src_vertex", 0, -1, 2), ("src_vertex", 0, 0, 3),
            ("src_vertex", 0, 1, 4), ("src_vertex", -1, 0, 5),
            ("src_vertex", -1, 1, 6),
        ]),
    ],
)

ETV = _spec(
    "etv",
    {**_EDGE_SRC, "dst_vertex": VERTEX},
    [
        ("dst_vertex", [
            ("src_edge_x", 0, 1, 0), ("src_edge_x", 0, 0, 1),
            ("src_edge_x", -1, 0, 2), ("src_edge_x", 0, -1, 3),
            ("src_edge_y", -1, 0, 4), ("src_edge_y", 0, 0, 5),
            ("src_edge_y", 0, -1, 6), ("src_edge_y", 1, -1, 7),
            ("src_edge_xy", -1, 0, 8), ("src_edge_xy", 0, 0, 9),
            ("src_edge_xy", -1, -1, 10), ("src_edge_xy", 0, -1, 11),
        ]),
    ],
)

VTE = _spec(
    "vte",
    {"src_vertex": VERTEX, **_EDGE_DST},
    [
        ("dst_edge_x", [
            ("src_vertex", -1, 1, 0), ("src_vertex", 0, 0, 1),
            ("src_vertex", 1, 0, 2), ("src_vertex", 1, -1, 3),
        ]),
        ("dst_edge_xy", [
            ("src_vertex", 0, 1, 4), ("src_vertex", 1, 1, 5),
            ("src_vertex", 0, 0, 6), ("src_vertex", 1, 0, 7),
        ]),
        ("dst_edge_y", [
            ("src_vertex", -1, 1, 8), ("src_vertex", 0, 1, 9),
            ("src_vertex", 0, 0, 10), ("src_vertex", 1, 0, 11),
        ]),
    ],
)

ETE = _spec(
    "ete",
    {**_EDGE_SRC, **_EDGE_DST},
    [
        ("dst_edge_x", [
            ("src_edge_x", 0, 0, 0), ("src_edge_y", 0, 0, 1),
            ("src_edge_y", 1, -1, 2), ("src_edge_xy", 0, 0, 3),
            ("src_edge_xy", 0, -1, 4),
        ]),
        ("dst_edge_y", [
            ("src_edge_y", 0, 0, 5), ("src_edge_x", 0, 0, 6),
            ("src_edge_x", -1, 1, 7), ("src_edge_xy", 0, 0, 8),
            ("src_edge_xy", -1, 0, 9),
        ]),
        ("dst_edge_xy", [
            ("src_edge_xy", 0, 0, 10), ("src_edge_x", 0, 0, 11),
            ("src_edge_x", 0, 1, 12), ("src_edge_y", 0, 0, 13),
            ("src_edge_y", 1, 0, 14),
        ]),
    ],
)

BUILTIN_SPECS = {"vtv": VTV, "etv": ETV, "vte": VTE, "ete": ETE}
KERNEL_NAMES = tuple(BUILTIN_SPECS)
LONG_NAMES = {
    "vtv": "Vertex-to-Vertex",
    "etv": "Edge-to-Vertex",
    "vte": "Vertex-to-Edge",
    "ete": "Edge-to-Edge",
}


def get_spec(name: str) -> StencilAccessSpec:
    try:
        return BUILTIN_SPECS[name.lower()]
    except KeyError:
        raise SpecError(f"unknown kernel {name!r}; expected one of {', '.join(KERNEL_NAMES)}") from None
