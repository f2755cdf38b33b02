"""Assembled sparse-matrix counterpart of the matrix-free operator.

Used two ways: as an independent oracle for :func:`p2ecm.kernels.apply_p2`
(COO assembly, CRS conversion, SpMV), and as the analytical memory model
comparing CRS storage against the matrix-free layout.

Global numbering is ``[vertex | edge x | edge y | edge xy]``, each block in
triangular row-major order. Rows outside the operator interior are identity
rows.

Byte counts are exact integers. Megabyte figures are decimal (10**6 B);
the reference figures this model is checked against are labelled MiB but
are numerically decimal megabytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid
from .errors import IndexOverflowError, ShapeError
from .fields import ORIENTATIONS, P2Function, P2Operator
from .kernels import operator_domains
from .stencils import ETE, ETV, VTE, VTV

MAX_ORACLE_LEVEL = 10


def max_signed(width_bits: int) -> int:
    return (1 << (width_bits - 1)) - 1


def check_index_capacity(count: int, width_bits: int) -> None:
    if width_bits not in (32, 64):
        raise ValueError(f"index width must be 32 or 64, got {width_bits}")
    if count > max_signed(width_bits):
        raise IndexOverflowError(
            f"{count} entries exceed the signed {width_bits}-bit index range ({max_signed(width_bits)})")


@dataclass
class CooMatrix:
    n: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if not (len(self.rows) == len(self.cols) == len(self.values)):
            raise ShapeError("COO arrays differ in length")
        if len(self.rows) and (self.rows.max() >= self.n or self.cols.max() >= self.n
                               or self.rows.min() < 0 or self.cols.min() < 0):
            raise ShapeError(f"COO index outside 0..{self.n - 1}")

    @property
    def nnz(self) -> int:
        return len(self.values)

    def to_crs(self, index_width: int = 32) -> "CrsMatrix":
        check_index_capacity(self.nnz, index_width)
        check_index_capacity(self.n, index_width)
        order = np.lexsort((self.cols, self.rows))
        rows, cols = self.rows[order], self.cols[order]
        if self.nnz > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                i = int(np.argmax(dup))
                raise ShapeError(f"duplicate entry at ({rows[i]}, {cols[i]})")
        itype = np.int32 if index_width == 32 else np.int64
        row_ptr = np.zeros(self.n + 1, dtype=itype)
        np.cumsum(np.bincount(rows, minlength=self.n), out=row_ptr[1:])
        return CrsMatrix(self.n, row_ptr, cols.astype(itype), self.values[order].copy(), index_width)


@dataclass
class CrsMatrix:
    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    index_width: int = 32

    def __post_init__(self):
        check_index_capacity(len(self.values), self.index_width)
        self.validate()

    @property
    def nnz(self) -> int:
        return len(self.values)

    def validate(self) -> None:
        rp = self.row_ptr
        if rp.shape != (self.n + 1,) or rp[0] != 0 or rp[-1] != self.nnz:
            raise ShapeError("row_ptr must have n+1 entries from 0 to nnz")
        if np.any(np.diff(rp) < 0):
            raise ShapeError("row_ptr must be non-decreasing")
        if len(self.col_idx) != self.nnz:
            raise ShapeError("col_idx and values differ in length")
        if self.nnz:
            if self.col_idx.min() < 0 or self.col_idx.max() >= self.n:
                raise ShapeError("column index out of range")
            step = np.diff(self.col_idx.astype(np.int64))
            row_starts = np.zeros(self.nnz, dtype=bool)
            row_starts[rp[:-1][rp[:-1] < self.nnz]] = True
            if np.any(step[~row_starts[1:]] <= 0):
                raise ShapeError("columns must be strictly ascending within a row")

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def row_of_entry(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), self.row_lengths())

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        out[self.row_of_entry(), self.col_idx] = self.values
        return out


def spmv(a: CrsMatrix, x) -> np.ndarray:
    """``y = A x``, accumulating each row in ascending column order."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (a.n,):
        raise ShapeError(f"vector of length {x.shape} does not match a {a.n}x{a.n} matrix")
    products = a.values * x[a.col_idx]
    return np.bincount(a.row_of_entry(), weights=products, minlength=a.n)


def block_offsets(level: int) -> dict:
    counts = grid.dof_counts(level)
    nv, ne = counts.vertices, counts.edges_per_orientation
    return {"vertex": 0, "x": nv, "y": nv + ne, "xy": nv + 2 * ne}


_ARRAY_BLOCK = {
    "src_vertex": "vertex", "dst_vertex": "vertex",
    "src_edge_x": "x", "src_edge_y": "y", "src_edge_xy": "xy",
    "dst_edge_x": "x", "dst_edge_y": "y", "dst_edge_xy": "xy",
}


def _global(array: str, xs, ys, level, offsets):
    layout = grid.VERTEX if _ARRAY_BLOCK[array] == "vertex" else grid.EDGE
    c = grid.row_stride(layout, level)
    return offsets[_ARRAY_BLOCK[array]] + xs + c * ys - ys * (ys + 1) // 2


def interior_rows(level: int) -> np.ndarray:
    """Boolean mask over the global numbering: rows carrying a full stencil."""
    offsets = block_offsets(level)
    mask = np.zeros(grid.dof_counts(level).total, dtype=bool)
    vdom, edom = operator_domains(level)
    for dom, blocks in ((vdom, ("vertex",)), (edom, ORIENTATIONS)):
        pts = np.array(list(dom.points()), dtype=np.int64).reshape(-1, 2)
        for b in blocks:
            arr = "dst_vertex" if b == "vertex" else f"dst_edge_{b}"
            mask[_global(arr, pts[:, 0], pts[:, 1], level, offsets)] = True
    return mask


def assemble_coo(op: P2Operator, level: int) -> CooMatrix:
    level = grid.check_level(level)
    if level > MAX_ORACLE_LEVEL:
        raise ValueError(f"assembly is limited to level {MAX_ORACLE_LEVEL}, got {level}")
    offsets = block_offsets(level)
    n = grid.dof_counts(level).total
    vdom, edom = operator_domains(level)
    rows, cols, vals = [], [], []
    for dom, pairs in ((vdom, ((VTV, op.vtv), (ETV, op.etv))),
                       (edom, ((VTE, op.vte), (ETE, op.ete)))):
        pts = np.array(list(dom.points()), dtype=np.int64).reshape(-1, 2)
        xs, ys = pts[:, 0], pts[:, 1]
        for spec, weights in pairs:
            for target, reads in zip(spec.targets, spec.accesses):
                r = _global(target, xs, ys, level, offsets)
                for a in reads:
                    rows.append(r)
                    cols.append(_global(a.source, xs + a.dx, ys + a.dy, level, offsets))
                    vals.append(np.full(len(r), weights[a.weight]))
    boundary = np.flatnonzero(~interior_rows(level))
    rows.append(boundary)
    cols.append(boundary)
    vals.append(np.ones(len(boundary)))
    return CooMatrix(n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


def assemble(op: P2Operator, level: int, index_width: int = 32) -> CrsMatrix:
    return assemble_coo(op, level).to_crs(index_width)


def zero_boundary(f: P2Function) -> P2Function:
    """Copy of ``f`` with every non-interior slot set to zero."""
    flat = f.flat()
    flat[~interior_rows(f.level)] = 0.0
    return P2Function.from_flat(f.level, flat)


def relative_difference(a: CrsMatrix, x, y_test, mask=None) -> float:
    """Largest ``|y_test - A x|_i / (|A| |x|)_i`` over the selected rows.

    The denominator is the sum of absolute products of row ``i``, which
    bounds any reordering error of that row's sum.
    """
    x = np.asarray(x, dtype=np.float64)
    ref = spmv(a, x)
    scale = np.bincount(a.row_of_entry(), weights=np.abs(a.values * x[a.col_idx]), minlength=a.n)
    diff = np.abs(np.asarray(y_test) - ref)
    if mask is not None:
        diff, scale = diff[mask], scale[mask]
    if not len(diff):
        return 0.0
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(diff / scale))


def write_matrix_market(a: CrsMatrix, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{a.n} {a.n} {a.nnz}\n")
        rows = a.row_of_entry()
        for r, c, v in zip(rows, a.col_idx, a.values):
            fh.write(f"{r + 1} {c + 1} {float(v)!r}\n")


def read_matrix_market(path, index_width: int = 64) -> CrsMatrix:
    with open(path, encoding="ascii") as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket matrix coordinate real general"):
            raise ValueError(f"{path}: unsupported Matrix Market header")
        line = fh.readline()
        while line.startswith("%"):
            line = fh.readline()
        n, m, nnz = (int(t) for t in line.split())
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 3))
    if n != m:
        raise ShapeError("matrix must be square")
    coo = CooMatrix(n, data[:, 0].astype(np.int64) - 1, data[:, 1].astype(np.int64) - 1, data[:, 2].copy())
    return coo.to_crs(index_width)


@dataclass(frozen=True)
class FootprintReport:
    level: int
    index_bytes: int
    dof_mem: int
    vertex_stencil_mem: int
    edge_stencil_mem: int
    col_index_mem: int
    row_index_mem: int

    @property
    def value_mem(self) -> int:
        return self.vertex_stencil_mem + self.edge_stencil_mem

    @property
    def crs_total(self) -> int:
        return self.value_mem + self.col_index_mem + self.row_index_mem + 2 * self.dof_mem

    @property
    def matrix_free_total(self) -> int:
        return 2 * self.dof_mem

    @property
    def hyteg_traffic_total(self) -> int:
        # four separate sweeps each read and write one of the two DoF groups
        return 4 * self.dof_mem

    @property
    def crs_over_matrix_free(self) -> float:
        return self.crs_total / self.matrix_free_total

    @property
    def crs_over_hyteg(self) -> float:
        return self.crs_total / self.hyteg_traffic_total

    def megabytes(self) -> dict:
        names = ("dof_mem", "vertex_stencil_mem", "edge_stencil_mem", "col_index_mem",
                 "row_index_mem", "crs_total", "matrix_free_total", "hyteg_traffic_total")
        return {k: getattr(self, k) / 1e6 for k in names}


def footprint_model(level: int, index_bytes: int = 4) -> FootprintReport:
    if index_bytes not in (4, 8):
        raise ValueError(f"index_bytes must be 4 or 8, got {index_bytes}")
    counts = grid.dof_counts(level)
    dof_mem = 8 * counts.total
    vertex_mem = 8 * 19 * counts.vertices
    edge_mem = 8 * 9 * 3 * counts.edges_per_orientation
    # index arrays scale with the 8-byte value arrays by index_bytes / 8
    col_mem = (vertex_mem + edge_mem) * index_bytes // 8
    row_mem = dof_mem * index_bytes // 8
    return FootprintReport(level, index_bytes, dof_mem, vertex_mem, edge_mem, col_mem, row_mem)


def interior_nnz(level: int) -> int:
    """Entries of one triangle's matrix with the boundary neglected."""
    counts = grid.dof_counts(level)
    return 19 * counts.vertices + 27 * counts.edges_per_orientation


def index_overflow_level(index_bytes: int, n_triangles: int = 2):
    """Smallest level whose nnz exceeds the signed index range, or None up to the max level."""
    if n_triangles < 1:
        raise ValueError("n_triangles must be >= 1")
    limit = max_signed(8 * index_bytes)
    for level in range(grid.MAX_LEVEL + 1):
        if n_triangles * interior_nnz(level) > limit:
            return level
    return None
