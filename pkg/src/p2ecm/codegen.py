"""Loop-nest source generation for stencil kernels on triangular layouts.

The generator lowers a :class:`~p2ecm.stencils.StencilAccessSpec` at a fixed
level into a small intermediate form (one statement per target, one read
per weighted access, each read carrying its linearised index). Both the
emitted C-like source and the executable access plan are rendered from
that same form.

Transformations are limited to hoisting every weight into a named constant
and giving every weighted read its own temporary; the level is baked into
the text as integer constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid
from .errors import ShapeError, SpecError
from .stencils import StencilAccessSpec

OUTER = "ctr_2"
INNER = "ctr_1"


@dataclass(frozen=True)
class PlanIndex:
    """``index(x, y) = x + stride*y - (y+dy)*(y+dy+1)/2 + const``."""

    array: str
    stride: int
    dy: int
    const: int

    def __call__(self, x, y):
        s = y + self.dy
        return x + self.stride * y - s * (s + 1) // 2 + self.const


@dataclass(frozen=True)
class PlanRead:
    index: PlanIndex
    weight: int    # weight index in the access spec
    slot: int      # position in the weight array the kernel receives
    temp: str


@dataclass(frozen=True)
class PlanStatement:
    target: PlanIndex
    reads: tuple


@dataclass(frozen=True)
class GeneratedKernel:
    name: str
    spec_name: str
    level: int
    domain: grid.IterationDomain
    hoisted: tuple      # (binding name, slot) in prologue order
    statements: tuple   # PlanStatement
    source_text: str

    @property
    def access_plan(self):
        return self.statements

    def summary(self) -> str:
        reads = sum(len(s.reads) for s in self.statements)
        d = self.domain
        return (f"{self.name}: level {self.level}, {len(self.hoisted)} hoisted weights, "
                f"{len(self.statements)} targets, {reads} weighted reads, "
                f"{d.size} interior points (y in [{d.y_begin}, {d.y_end}), "
                f"x in [{d.x_begin}, {d.diag_end} - y))")


def _plan_index(array: str, layout: str, dx: int, dy: int, level: int) -> PlanIndex:
    stride = grid.row_stride(layout, level)
    return PlanIndex(array, stride, dy, dx + stride * dy)


def _factor(k: int) -> str:
    if k == 0:
        return OUTER
    return f"({OUTER} + {k})" if k > 0 else f"({OUTER} - {-k})"


def _triangle_term(dy: int) -> str:
    a, b = dy, dy + 1
    first, second = (b, a) if b == 0 else (a, b)
    return f"(({_factor(first)}*{_factor(second)}) / (2))"


def _render(idx: PlanIndex) -> str:
    text = f"{INNER} + {idx.stride}*{OUTER} - {_triangle_term(idx.dy)}"
    if idx.const > 0:
        text += f" + {idx.const}"
    elif idx.const < 0:
        text += f" - {-idx.const}"
    return text


def index_expression(layout: str, dx: int, dy: int, level: int) -> str:
    """Linearised index of ``a[y+dy][x+dx]`` in terms of the loop counters."""
    if layout not in grid.LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}")
    return _render(_plan_index("", layout, dx, dy, grid.check_level(level)))


def generate(spec: StencilAccessSpec, level: int, weights_layout=None, name=None) -> GeneratedKernel:
    level = grid.check_level(level)
    n = spec.n_weights
    if weights_layout is None:
        weights_layout = tuple(range(n))
    weights_layout = tuple(int(s) for s in weights_layout)
    if sorted(weights_layout) != list(range(n)):
        raise SpecError(f"{spec.name}: weights_layout must be a permutation of 0..{n - 1}")
    name = name or f"kernel_{spec.name}"
    domain = grid.interior_domain(spec, level)

    hoisted = tuple((f"xi_{k}", weights_layout[k]) for k in range(n))
    temp = n
    statements = []
    for target, reads in zip(spec.targets, spec.accesses):
        plan_reads = []
        for r in reads:
            idx = _plan_index(r.source, spec.layout_of(r.source), r.dx, r.dy, level)
            plan_reads.append(PlanRead(idx, r.weight, weights_layout[r.weight], f"xi_{temp}"))
            temp += 1
        statements.append(PlanStatement(_plan_index(target, spec.layout_of(target), 0, 0, level), tuple(plan_reads)))
    statements = tuple(statements)

    text = _emit(name, spec, domain, hoisted, statements)
    return GeneratedKernel(name, spec.name, level, domain, hoisted, statements, text)


def _emit(name, spec, domain, hoisted, statements) -> str:
    params = [f"double * _data_{t}" for t in spec.targets]
    params += [f"double const * const _data_{s}" for s in spec.sources]
    params.append(f"double const * const _data_{spec.name}")
    lines = [f"void {name}({', '.join(params)})", "{"]
    for binding, slot in hoisted:
        lines.append(f"const double {binding} = _data_{spec.name}[{slot}];")
    lines.append(f"for (int {OUTER} = {domain.y_begin}; {OUTER} < {domain.y_end}; {OUTER} += 1) {{")
    lines.append(f"for (int {INNER} = {domain.x_begin}; {INNER} < {domain.diag_end} - {OUTER}; {INNER} += 1) {{")
    for st in statements:
        for r in st.reads:
            lines.append(f" const double {r.temp} = xi_{r.weight}*_data_{r.index.array}[{_render(r.index)}];")
        total = " + ".join(r.temp for r in st.reads)
        lines.append(f" _data_{st.target.array}[{_render(st.target)}] = {total};")
    lines.append("}")
    lines.append("}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def execute_plan(kernel: GeneratedKernel, weights, sources: dict, targets: dict, accumulate=False):
    """Run the access plan in place of compiling the emitted source.

    ``weights`` is the array the generated function would receive, i.e. in
    ``weights_layout`` order. Sums follow the emitted expression left to
    right.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(kernel.hoisted),):
        raise SpecError(f"{kernel.name} expects {len(kernel.hoisted)} weights, got {w.shape}")
    bound = {**sources, **targets}
    needed = {r.index.array for st in kernel.statements for r in st.reads} | {st.target.array for st in kernel.statements}
    missing = needed - set(bound)
    if missing:
        raise SpecError(f"{kernel.name}: no field bound to {sorted(missing)}")
    for arr in needed:
        if bound[arr].level != kernel.level:
            raise ShapeError(f"{arr} is at level {bound[arr].level}, kernel was generated for {kernel.level}")
    coeff = [float(w[slot]) for _, slot in kernel.hoisted]
    d = kernel.domain
    for y in range(d.y_begin, d.y_end):
        x_end = d.diag_end - y
        if d.x_begin >= x_end:
            continue
        xs = np.arange(d.x_begin, x_end)
        for st in kernel.statements:
            acc = None
            for r in st.reads:
                term = coeff[r.weight] * bound[r.index.array].values[r.index(xs, y)]
                acc = term if acc is None else acc + term
            out = bound[st.target.array].values
            idx = st.target(xs, y)
            if accumulate:
                out[idx] = out[idx] + acc
            else:
                out[idx] = acc
