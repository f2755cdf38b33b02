"""Matrix-free apply kernels for the P2 operator on one macro-triangle.

Each kernel writes only its interior domain; boundary DoFs are left
untouched. Rows of the triangular layout are contiguous, so every access
``a[y+dy][x+dx]`` over an interior row span is a plain slice and the kernels
vectorise over ``x``. Products are summed strictly left to right in the
order of the kernel listings, which makes the results bit-identical to the
scalar interpreter :func:`reference_apply`.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import grid
from .errors import ShapeError, SpecError
from .fields import P2Function, P2Operator
from .stencils import ETE, ETV, VTE, VTV, BUILTIN_SPECS, StencilAccessSpec


@lru_cache(maxsize=64)
def _row_starts(layout: str, level: int) -> tuple[int, ...]:
    # one extra entry on each side so y-1 and y+1 never index out of the tuple
    top = grid.last_row(layout, level)
    return tuple(grid.row_start(layout, y, level) for y in range(-1, top + 3))


def _starts(layout, level):
    table = _row_starts(layout, level)
    return lambda y: table[y + 1]


@lru_cache(maxsize=64)
def kernel_domain(name: str, level: int) -> grid.IterationDomain:
    return grid.interior_domain(BUILTIN_SPECS[name], level)


@lru_cache(maxsize=64)
def operator_domains(level: int) -> tuple[grid.IterationDomain, grid.IterationDomain]:
    """Points where a full P2 row applies: (vertex rows, edge rows)."""
    vertex = kernel_domain("vtv", level).intersect(kernel_domain("etv", level))
    edge = kernel_domain("vte", level).intersect(kernel_domain("ete", level))
    return vertex, edge


def _same_level(*fields):
    levels = {f.level for f in fields}
    if len(levels) != 1:
        raise ShapeError(f"fields disagree on level: {sorted(levels)}")
    return levels.pop()


def _distinct(srcs, dsts):
    for d in dsts:
        for s in srcs:
            if np.shares_memory(d.values, s.values):
                raise ShapeError("destination must not alias a source field")


def _weights(stencil, n, name):
    w = tuple(float(v) for v in stencil)
    if len(w) != n:
        raise SpecError(f"{name} expects {n} weights, got {len(w)}")
    return w


def _store(dst, lo, hi, acc, accumulate):
    if accumulate:
        dst[lo:hi] += acc
    else:
        dst[lo:hi] = acc


# Row bodies. Each returns the accumulated products for one row span; ``v``
# maps (dx, dy) to the source slice.

def _vtv_row(c, src, vs, y, xb, xe):
    def v(dx, dy):
        s = vs(y + dy) + dx
        return src[s + xb: s + xe]

    acc = c[0] * v(1, -1)
    acc += c[1] * v(1, 0)
    acc += c[2] * v(0, -1)
    acc += c[3] * v(0, 0)
    acc += c[4] * v(0, 1)
    acc += c[5] * v(-1, 0)
    acc += c[6] * v(-1, 1)
    return acc


def _etv_row(c, ex, ey, exy, es, y, xb, xe):
    def e(arr, dx, dy):
        s = es(y + dy) + dx
        return arr[s + xb: s + xe]

    acc = c[0] * e(ex, 0, 1)
    acc += c[1] * e(ex, 0, 0)
    acc += c[2] * e(ex, -1, 0)
    acc += c[3] * e(ex, 0, -1)
    acc += c[4] * e(ey, -1, 0)
    acc += c[5] * e(ey, 0, 0)
    acc += c[6] * e(ey, 0, -1)
    acc += c[7] * e(ey, 1, -1)
    acc += c[8] * e(exy, -1, 0)
    acc += c[9] * e(exy, 0, 0)
    acc += c[10] * e(exy, -1, -1)
    acc += c[11] * e(exy, 0, -1)
    return acc


def _vte_row(c, src, vs, y, xb, xe):
    def v(dx, dy):
        s = vs(y + dy) + dx
        return src[s + xb: s + xe]

    to_x = c[0] * v(-1, 1)
    to_x += c[1] * v(0, 0)
    to_x += c[2] * v(1, 0)
    to_x += c[3] * v(1, -1)

    to_xy = c[4] * v(0, 1)
    to_xy += c[5] * v(1, 1)
    to_xy += c[6] * v(0, 0)
    to_xy += c[7] * v(1, 0)

    to_y = c[8] * v(-1, 1)
    to_y += c[9] * v(0, 1)
    to_y += c[10] * v(0, 0)
    to_y += c[11] * v(1, 0)
    return to_x, to_y, to_xy


def _ete_row(c, ex, ey, exy, es, y, xb, xe):
    def e(arr, dx, dy):
        s = es(y + dy) + dx
        return arr[s + xb: s + xe]

    to_x = c[0] * e(ex, 0, 0)
    to_x += c[1] * e(ey, 0, 0)
    to_x += c[2] * e(ey, 1, -1)
    to_x += c[3] * e(exy, 0, 0)
    to_x += c[4] * e(exy, 0, -1)

    to_y = c[5] * e(ey, 0, 0)
    to_y += c[6] * e(ex, 0, 0)
    to_y += c[7] * e(ex, -1, 1)
    to_y += c[8] * e(exy, 0, 0)
    to_y += c[9] * e(exy, -1, 0)

    to_xy = c[10] * e(exy, 0, 0)
    to_xy += c[11] * e(ex, 0, 0)
    to_xy += c[12] * e(ex, 0, 1)
    to_xy += c[13] * e(ey, 0, 0)
    to_xy += c[14] * e(ey, 1, 0)
    return to_x, to_y, to_xy


def apply_vtv(src, stencil, dst, *, domain=None, accumulate=False):
    """``dst = VtV(src)`` on the interior vertex points."""
    level = _same_level(src, dst)
    _distinct([src], [dst])
    c = _weights(stencil, 7, "vtv")
    dom = kernel_domain("vtv", level) if domain is None else domain
    vs = _starts(grid.VERTEX, level)
    a, out = src.values, dst.values
    for y, xb, xe in dom.rows:
        t = vs(y)
        _store(out, t + xb, t + xe, _vtv_row(c, a, vs, y, xb, xe), accumulate)


def apply_etv(src_x, src_y, src_xy, stencil, dst, *, domain=None, accumulate=False):
    level = _same_level(src_x, src_y, src_xy, dst)
    _distinct([src_x, src_y, src_xy], [dst])
    c = _weights(stencil, 12, "etv")
    dom = kernel_domain("etv", level) if domain is None else domain
    vs = _starts(grid.VERTEX, level)
    es = _starts(grid.EDGE, level)
    ex, ey, exy, out = src_x.values, src_y.values, src_xy.values, dst.values
    for y, xb, xe in dom.rows:
        t = vs(y)
        _store(out, t + xb, t + xe, _etv_row(c, ex, ey, exy, es, y, xb, xe), accumulate)


def apply_vte(src, stencil, dst_x, dst_y, dst_xy, *, domain=None, accumulate=False):
    level = _same_level(src, dst_x, dst_y, dst_xy)
    _distinct([src], [dst_x, dst_y, dst_xy])
    c = _weights(stencil, 12, "vte")
    dom = kernel_domain("vte", level) if domain is None else domain
    vs = _starts(grid.VERTEX, level)
    es = _starts(grid.EDGE, level)
    a = src.values
    outs = (dst_x.values, dst_y.values, dst_xy.values)
    for y, xb, xe in dom.rows:
        t = es(y)
        for out, acc in zip(outs, _vte_row(c, a, vs, y, xb, xe)):
            _store(out, t + xb, t + xe, acc, accumulate)


def apply_ete(src_x, src_y, src_xy, stencil, dst_x, dst_y, dst_xy, *, domain=None, accumulate=False):
    level = _same_level(src_x, src_y, src_xy, dst_x, dst_y, dst_xy)
    _distinct([src_x, src_y, src_xy], [dst_x, dst_y, dst_xy])
    c = _weights(stencil, 15, "ete")
    dom = kernel_domain("ete", level) if domain is None else domain
    es = _starts(grid.EDGE, level)
    ex, ey, exy = src_x.values, src_y.values, src_xy.values
    outs = (dst_x.values, dst_y.values, dst_xy.values)
    for y, xb, xe in dom.rows:
        t = es(y)
        for out, acc in zip(outs, _ete_row(c, ex, ey, exy, es, y, xb, xe)):
            _store(out, t + xb, t + xe, acc, accumulate)


def apply_kernel(name: str, weights, src: P2Function, dst: P2Function, *, domain=None, accumulate=False):
    """Run one of the four kernels between the matching parts of two P2 functions."""
    if name == "vtv":
        apply_vtv(src.vertex, weights, dst.vertex, domain=domain, accumulate=accumulate)
    elif name == "etv":
        apply_etv(*src.edges(), weights, dst.vertex, domain=domain, accumulate=accumulate)
    elif name == "vte":
        apply_vte(src.vertex, weights, *dst.edges(), domain=domain, accumulate=accumulate)
    elif name == "ete":
        apply_ete(*src.edges(), weights, *dst.edges(), domain=domain, accumulate=accumulate)
    else:
        raise SpecError(f"unknown kernel {name!r}")


def apply_p2(op: P2Operator, src: P2Function, dst: P2Function, *, fused=False):
    """``dst = A src`` on the rows where the full P2 stencil applies.

    The default runs the four kernels as separate sweeps: the vertex-source
    kernel writes, the edge-source kernel adds. ``fused=True`` merges the
    four sweeps into a single row loop with identical arithmetic.
    """
    if src.level != dst.level:
        raise ShapeError(f"level mismatch: {src.level} vs {dst.level}")
    if src is dst:
        raise ShapeError("apply_p2 needs distinct source and destination")
    vdom, edom = operator_domains(src.level)
    if not fused:
        apply_kernel("vtv", op.vtv, src, dst, domain=vdom)
        apply_kernel("etv", op.etv, src, dst, domain=vdom, accumulate=True)
        apply_kernel("vte", op.vte, src, dst, domain=edom)
        apply_kernel("ete", op.ete, src, dst, domain=edom, accumulate=True)
        return
    _distinct(src.parts(), dst.parts())
    level = src.level
    vs = _starts(grid.VERTEX, level)
    es = _starts(grid.EDGE, level)
    v = src.vertex.values
    ex, ey, exy = (f.values for f in src.edges())
    out_v = dst.vertex.values
    out_e = tuple(f.values for f in dst.edges())
    for y, xb, xe in vdom.rows:
        t = vs(y)
        acc = _vtv_row(op.vtv, v, vs, y, xb, xe)
        acc += _etv_row(op.etv, ex, ey, exy, es, y, xb, xe)
        out_v[t + xb: t + xe] = acc
    for y, xb, xe in edom.rows:
        t = es(y)
        first = _vte_row(op.vte, v, vs, y, xb, xe)
        second = _ete_row(op.ete, ex, ey, exy, es, y, xb, xe)
        for out, a, b in zip(out_e, first, second):
            a += b
            out[t + xb: t + xe] = a


def reference_apply(spec: StencilAccessSpec, weights, sources: dict, targets: dict, *,
                    domain=None, accumulate=False):
    """Scalar interpreter: walk the interior domain point by point.

    ``sources``/``targets`` map the access spec's array ids to fields. For every
    point and every target the products are summed in spec order. This is
    the ground truth the vectorised kernels and generated plans must match
    bit for bit.
    """
    spec.check_weights(weights)
    w = [float(v) for v in weights]
    missing = [a for a in spec.sources if a not in sources] + [t for t in spec.targets if t not in targets]
    if missing:
        raise SpecError(f"{spec.name}: no field bound to {missing}")
    level = _same_level(*[sources[a] for a in spec.sources], *[targets[t] for t in spec.targets])
    dom = grid.interior_domain(spec, level) if domain is None else domain
    src_vals = {a: sources[a].values.tolist() for a in spec.sources}
    layouts = {a: spec.layout_of(a) for a in spec.layouts}
    index = grid.linear_index
    for x, y in dom.points():
        for target, reads in zip(spec.targets, spec.accesses):
            acc = None
            for r in reads:
                term = w[r.weight] * src_vals[r.source][index(layouts[r.source], x + r.dx, y + r.dy, level)]
                acc = term if acc is None else acc + term
            out = targets[target].values
            i = index(layouts[target], x, y, level)
            out[i] = out[i] + acc if accumulate else acc


def reference_apply_p2(op: P2Operator, src: P2Function, dst: P2Function):
    """Interpreter version of :func:`apply_p2`, same sweep structure."""
    vdom, edom = operator_domains(src.level)
    s, d = src.arrays("src"), dst.arrays("dst")
    reference_apply(VTV, op.vtv, s, d, domain=vdom)
    reference_apply(ETV, op.etv, s, d, domain=vdom, accumulate=True)
    reference_apply(VTE, op.vte, s, d, domain=edom)
    reference_apply(ETE, op.ete, s, d, domain=edom, accumulate=True)


def flops_per_point(name: str) -> int:
    """Scalar flops per target point: one multiply per read, one add between reads."""
    spec = BUILTIN_SPECS[name]
    return sum(2 * len(r) - 1 for r in spec.accesses)
