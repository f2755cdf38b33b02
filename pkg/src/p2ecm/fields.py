"""DoF vectors and stencil weight sets for the matrix-free P2 operator."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import grid
from .errors import ShapeError

ORIENTATIONS = ("x", "y", "xy")

# Orientation tags shared by the seeded fill and the binary dump header.
ORIENTATION_TAGS = {"vertex": 0, "x": 1, "y": 2, "xy": 3}
_TAG_NAMES = {v: k for k, v in ORIENTATION_TAGS.items()}


class _Field:
    layout: str
    level: int
    values: np.ndarray

    def _check(self):
        expected = grid.layout_size(self.layout, self.level)
        if self.values.shape != (expected,):
            raise ShapeError(f"{type(self).__name__} at level {self.level} needs {expected} values, "
                             f"got shape {self.values.shape}")
        if self.values.dtype != np.float64:
            raise ShapeError(f"values must be float64, got {self.values.dtype}")

    def __len__(self):
        return self.values.shape[0]

    def index(self, x: int, y: int) -> int:
        return grid.linear_index(self.layout, x, y, self.level)

    def get(self, x: int, y: int) -> float:
        return float(self.values[self.index(x, y)])

    def set(self, x: int, y: int, value: float) -> None:
        self.values[self.index(x, y)] = value

    def __getitem__(self, xy):
        return self.get(*xy)

    def __setitem__(self, xy, value):
        self.set(*xy, value)

    @property
    def tag(self) -> str:
        return "vertex" if self.layout == grid.VERTEX else self.orientation

    def copy(self):
        raise NotImplementedError


@dataclass(eq=False)
class VertexField(_Field):
    level: int
    values: np.ndarray = field(repr=False)
    layout = grid.VERTEX

    def __post_init__(self):
        self.level = grid.check_level(self.level)
        self._check()

    def copy(self) -> "VertexField":
        return VertexField(self.level, self.values.copy())


@dataclass(eq=False)
class EdgeField(_Field):
    level: int
    orientation: str
    values: np.ndarray = field(repr=False)
    layout = grid.EDGE

    def __post_init__(self):
        self.level = grid.check_level(self.level)
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}")
        self._check()

    def copy(self) -> "EdgeField":
        return EdgeField(self.level, self.orientation, self.values.copy())


def _fill_values(n: int, fill, level: int, tag: str) -> np.ndarray:
    """Materialise one sub-field.

    ``fill`` is ``"zeros"``, ``("constant", c)`` or ``("random", seed)``.
    The random fill draws ``uniform(-1, 1)`` from numpy's PCG64 seeded with
    ``SeedSequence([seed, level, orientation_tag])``, so every sub-field has
    its own reproducible stream.
    """
    try:
        if fill == "zeros" or fill is None:
            return np.zeros(n)
        kind, arg = fill
        if kind == "constant":
            return np.full(n, float(arg))
        if kind in ("random", "pseudo_random"):
            seq = np.random.SeedSequence([int(arg), level, ORIENTATION_TAGS[tag]])
            return np.random.Generator(np.random.PCG64(seq)).uniform(-1.0, 1.0, n)
    except MemoryError as exc:
        raise MemoryError(f"cannot allocate {n} doubles for level {level}") from exc
    raise ValueError(f"unknown fill {fill!r}")


def zeros():
    return "zeros"


def constant(c: float):
    return ("constant", c)


def pseudo_random(seed: int):
    return ("random", seed)


@dataclass(eq=False)
class P2Function:
    vertex: VertexField
    edge_x: EdgeField
    edge_y: EdgeField
    edge_xy: EdgeField

    def __post_init__(self):
        levels = {f.level for f in self.parts()}
        if len(levels) != 1:
            raise ShapeError(f"sub-fields disagree on level: {sorted(levels)}")
        for f, o in zip(self.edges(), ORIENTATIONS):
            if f.orientation != o:
                raise ShapeError(f"edge field for {o} has orientation {f.orientation}")

    @property
    def level(self) -> int:
        return self.vertex.level

    def parts(self):
        return (self.vertex, self.edge_x, self.edge_y, self.edge_xy)

    def edges(self):
        return (self.edge_x, self.edge_y, self.edge_xy)

    def __len__(self):
        return sum(len(p) for p in self.parts())

    def flat(self) -> np.ndarray:
        """Concatenate in global order ``[vertex | x | y | xy]``."""
        return np.concatenate([p.values for p in self.parts()])

    @classmethod
    def from_flat(cls, level: int, vec) -> "P2Function":
        counts = grid.dof_counts(level)
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (counts.total,):
            raise ShapeError(f"flat vector needs {counts.total} entries at level {level}, got {vec.shape}")
        nv, ne = counts.vertices, counts.edges_per_orientation
        chunks = [vec[nv + k * ne: nv + (k + 1) * ne].copy() for k in range(3)]
        return cls(VertexField(level, vec[:nv].copy()),
                   *(EdgeField(level, o, c) for o, c in zip(ORIENTATIONS, chunks)))

    def copy(self) -> "P2Function":
        return P2Function(*(p.copy() for p in self.parts()))

    def arrays(self, prefix: str) -> dict:
        """Map stencil array ids (``src_vertex``, ``dst_edge_x`` ...) to sub-fields."""
        return {
            f"{prefix}_vertex": self.vertex,
            f"{prefix}_edge_x": self.edge_x,
            f"{prefix}_edge_y": self.edge_y,
            f"{prefix}_edge_xy": self.edge_xy,
        }


def allocate(level: int, fill="zeros") -> P2Function:
    level = grid.check_level(level)
    counts = grid.dof_counts(level)
    vertex = VertexField(level, _fill_values(counts.vertices, fill, level, "vertex"))
    edges = [EdgeField(level, o, _fill_values(counts.edges_per_orientation, fill, level, o))
             for o in ORIENTATIONS]
    return P2Function(vertex, *edges)


def max_abs_diff(a: P2Function, b: P2Function) -> float:
    if a.level != b.level:
        raise ShapeError(f"level mismatch: {a.level} vs {b.level}")
    worst = 0.0
    for pa, pb in zip(a.parts(), b.parts()):
        if len(pa):
            worst = max(worst, float(np.max(np.abs(pa.values - pb.values))))
    return worst


@dataclass(frozen=True)
class P2Operator:
    """The four constant stencils of one macro-triangle.

    A vertex row couples to 7 vertices and 12 edges (19 entries); an edge
    row couples to 4 vertices and 5 edges (9 entries) per orientation.
    """

    vtv: tuple
    etv: tuple
    vte: tuple
    ete: tuple

    ARITIES = {"vtv": 7, "etv": 12, "vte": 12, "ete": 15}

    def __post_init__(self):
        for name, n in self.ARITIES.items():
            w = tuple(float(v) for v in getattr(self, name))
            if len(w) != n:
                raise ShapeError(f"{name} stencil needs {n} weights, got {len(w)}")
            object.__setattr__(self, name, w)

    def weights(self, kernel: str) -> tuple:
        return getattr(self, kernel)

    @classmethod
    def constant(cls, value: float) -> "P2Operator":
        return cls(**{k: (value,) * n for k, n in cls.ARITIES.items()})

    @classmethod
    def random(cls, seed: int) -> "P2Operator":
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 0x5743])))
        return cls(**{k: tuple(rng.uniform(-1.0, 1.0, n)) for k, n in cls.ARITIES.items()})


_HEADER = struct.Struct("<4sIiiQ")
_MAGIC = b"P2FD"


def dump_field(f, path) -> None:
    """Write one sub-field as little-endian float64 with a small header.

    Header: magic ``P2FD``, format version, level, orientation tag
    (0 vertex, 1 x, 2 y, 3 xy), value count.
    """
    header = _HEADER.pack(_MAGIC, 1, f.level, ORIENTATION_TAGS[f.tag], len(f))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_field(path):
    data = Path(path).read_bytes()
    magic, version, level, tag, count = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != 1:
        raise ValueError(f"{path}: not a P2 field dump")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=_HEADER.size).astype(np.float64)
    name = _TAG_NAMES[tag]
    if name == "vertex":
        return VertexField(level, values)
    return EdgeField(level, name, values)
