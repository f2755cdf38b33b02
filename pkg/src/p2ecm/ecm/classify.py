"""Where each stencil read is served from, assuming y-outer / x-inner sweeps.

Every distinct offset of a source array falls into one of three classes:

* ``l1_resident``: the same element was read by a larger-``dx`` offset of
  the same row in an earlier inner iteration;
* ``lc_dependent``: the element was last read one or more rows earlier, so
  whether it still sits in a cache depends on the layer condition;
* ``new``: nothing touched the element before; it streams from wherever the
  dataset lives.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..stencils import StencilAccessSpec


@dataclass(frozen=True)
class ArrayClassification:
    array: str
    new: tuple          # offsets
    l1_resident: tuple  # offsets
    lc_dependent: tuple  # ((dx, dy), reuse_rows)
    row_span: int

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.new), len(self.l1_resident), len(self.lc_dependent)


@dataclass(frozen=True)
class AccessClassification:
    kernel: str
    arrays: tuple  # ArrayClassification, source order
    store_streams: int

    def __getitem__(self, array: str) -> ArrayClassification:
        for a in self.arrays:
            if a.array == array:
                return a
        raise KeyError(array)

    @property
    def new(self) -> int:
        return sum(len(a.new) for a in self.arrays)

    @property
    def l1_resident(self) -> int:
        return sum(len(a.l1_resident) for a in self.arrays)

    @property
    def lc_dependent(self) -> int:
        return sum(len(a.lc_dependent) for a in self.arrays)

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.new, self.l1_resident, self.lc_dependent

    @property
    def rows_in_flight(self) -> int:
        """Rows that must stay cached for every LC-dependent read to hit."""
        return sum(a.row_span for a in self.arrays) + self.store_streams


def classify_accesses(spec: StencilAccessSpec) -> AccessClassification:
    arrays = []
    for array in spec.sources:
        offsets = spec.offsets(array)
        new, l1, pink = [], [], []
        for dx, dy in offsets:
            if any(oy == dy and ox > dx for ox, oy in offsets):
                l1.append((dx, dy))
                continue
            later_rows = [oy - dy for _, oy in offsets if oy > dy]
            if later_rows:
                pink.append(((dx, dy), min(later_rows)))
            else:
                new.append((dx, dy))
        dys = [dy for _, dy in offsets]
        arrays.append(ArrayClassification(array, tuple(new), tuple(l1), tuple(pink), max(dys) - min(dys) + 1))
    return AccessClassification(spec.name, tuple(arrays), len(spec.targets))
