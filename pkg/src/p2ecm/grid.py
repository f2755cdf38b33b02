"""Geometry of a regularly refined macro-triangle.

A triangle refined ``l`` times carries ``N = 2**l`` intervals along each
leg. DoFs are stored in compact triangular row-major layout: row ``y`` of
the vertex layout holds ``N + 1 - y`` entries, row ``y`` of an edge layout
(any of the three orientations) holds ``N - y`` entries. There are no
ghost layers.

Iteration always runs ``y`` in the outer loop and ``x`` in the inner loop,
both ascending, starting at the right-angle corner.

The edge layout is a choice made by analogy with the vertex layout; the
three orientations are stored in separate arrays of identical shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

from .errors import GridIndexError, InvalidLevelError

MAX_LEVEL = 20

VERTEX = "vertex"
EDGE = "edge"
LAYOUTS = (VERTEX, EDGE)


def check_level(level) -> int:
    if isinstance(level, bool):
        raise InvalidLevelError(f"level must be an integer, got {level!r}")
    if not isinstance(level, int):
        try:
            as_int = int(level)
        except (TypeError, ValueError):
            raise InvalidLevelError(f"level must be an integer, got {level!r}") from None
        if as_int != level:
            raise InvalidLevelError(f"level must be an integer, got {level!r}")
        level = as_int
    if not 0 <= level <= MAX_LEVEL:
        raise InvalidLevelError(f"level {level} outside 0..{MAX_LEVEL}")
    return level


def row_extent(level: int) -> int:
    """Nominal number of intervals along a triangle leg, ``2**level``."""
    return 1 << check_level(level)


class DofCounts(NamedTuple):
    vertices: int
    edges_per_orientation: int
    total: int


def dof_counts(level: int) -> DofCounts:
    n = row_extent(level)
    vertices = (n + 1) * (n + 2) // 2
    edges = n * (n + 1) // 2
    return DofCounts(vertices, edges, vertices + 3 * edges)


def layout_size(layout: str, level: int) -> int:
    counts = dof_counts(level)
    if layout == VERTEX:
        return counts.vertices
    if layout == EDGE:
        return counts.edges_per_orientation
    raise ValueError(f"unknown layout {layout!r}")


def _layout_dims(layout: str, n: int) -> tuple[int, int]:
    # (row stride constant, last valid row); row y holds (last_row + 1 - y) entries
    if layout == VERTEX:
        return n + 2, n
    if layout == EDGE:
        return n + 1, n - 1
    raise ValueError(f"unknown layout {layout!r}")


def row_stride(layout: str, level: int) -> int:
    """The constant ``c`` in ``index = x + c*y - y*(y+1)/2``."""
    return _layout_dims(layout, row_extent(level))[0]


def last_row(layout: str, level: int) -> int:
    return _layout_dims(layout, row_extent(level))[1]


def row_start(layout: str, y: int, level: int) -> int:
    """Linear index of ``(0, y)``; valid for any integer ``y`` (no bounds check)."""
    stride = row_stride(layout, level)
    return stride * y - y * (y + 1) // 2


def row_length(layout: str, y: int, level: int) -> int:
    top = last_row(layout, level)
    if y < 0 or y > top:
        return 0
    return top + 1 - y


def in_layout(layout: str, x: int, y: int, level: int) -> bool:
    top = last_row(layout, level)
    return 0 <= y <= top and 0 <= x and x + y <= top


def linear_index(layout: str, x: int, y: int, level: int) -> int:
    if not in_layout(layout, x, y, level):
        raise GridIndexError(f"({x}, {y}) outside the {layout} layout at level {level}")
    return x + row_start(layout, y, level)


def vertex_index(x: int, y: int, level: int) -> int:
    return linear_index(VERTEX, x, y, level)


def edge_index(x: int, y: int, level: int) -> int:
    return linear_index(EDGE, x, y, level)


def layout_coordinates(layout: str, level: int):
    """Yield every valid ``(x, y)`` of a layout in storage order."""
    top = last_row(layout, level)
    for y in range(top + 1):
        for x in range(top + 1 - y):
            yield x, y


@dataclass(frozen=True)
class IterationDomain:
    """Interior iteration space ``y_begin <= y < y_end``, ``x_begin <= x < diag_end - y``.

    ``rows`` lists the non-empty ``(y, x_begin, x_end)`` spans in iteration
    order.
    """

    y_begin: int
    y_end: int
    x_begin: int
    diag_end: int

    @cached_property
    def rows(self) -> tuple[tuple[int, int, int], ...]:
        spans = []
        for y in range(self.y_begin, self.y_end):
            x_end = self.diag_end - y
            if self.x_begin < x_end:
                spans.append((y, self.x_begin, x_end))
        return tuple(spans)

    @cached_property
    def size(self) -> int:
        return sum(e - b for _, b, e in self.rows)

    def __contains__(self, point) -> bool:
        x, y = point
        return self.y_begin <= y < self.y_end and self.x_begin <= x < self.diag_end - y

    def points(self):
        for y, xb, xe in self.rows:
            for x in range(xb, xe):
                yield x, y

    def intersect(self, other: "IterationDomain") -> "IterationDomain":
        return IterationDomain(
            max(self.y_begin, other.y_begin),
            min(self.y_end, other.y_end),
            max(self.x_begin, other.x_begin),
            min(self.diag_end, other.diag_end),
        )


def interior_domain(spec, level: int) -> IterationDomain:
    """Largest set of target points for which every access of ``spec`` is in bounds.

    Each access ``(array, dx, dy)`` on a layout whose last row is ``t``
    contributes ``y >= -dy``, ``y <= t - dy``, ``x >= -dx`` and
    ``x + y <= t - dx - dy``. Targets count as ``(0, 0)`` accesses.
    """
    level = check_level(level)
    y_lo, y_hi, x_lo, d_hi = 0, None, 0, None
    for array, dx, dy in spec.bound_accesses():
        top = last_row(spec.layout_of(array), level)
        y_lo = max(y_lo, -dy)
        x_lo = max(x_lo, -dx)
        y_hi = top - dy if y_hi is None else min(y_hi, top - dy)
        d_hi = top - dx - dy if d_hi is None else min(d_hi, top - dx - dy)
    return IterationDomain(y_lo, y_hi + 1, x_lo, d_hi + 1)
