import re
from pathlib import Path

import numpy as np
import pytest

from p2ecm import codegen, grid, kernels
from p2ecm.errors import ShapeError, SpecError
from p2ecm.fields import P2Operator, allocate, constant, pseudo_random
from p2ecm.stencils import BUILTIN_SPECS, ETE, KERNEL_NAMES, VTV

DATA = Path(__file__).parent / "data"


def _eval_index(text, x, y):
    # the emitted integer division is exact on these operands, so floor division reproduces it
    return eval(text.replace(" / ", " // "), {}, {"ctr_1": x, "ctr_2": y})


def test_vtv_level10_listing():
    k = codegen.generate(VTV, 10)
    text = k.source_text
    assert "1026*ctr_2" in text
    assert "- ((ctr_2*(ctr_2 + 1)) / (2))" in text
    assert "1024 - ctr_2" in text
    assert len(k.hoisted) == 7
    assert len(re.findall(r"const double xi_\d+ = _data_vtv\[", text)) == 7
    assert (k.domain.y_begin, k.domain.y_end, k.domain.diag_end) == (1, 1024, 1024)


@pytest.mark.parametrize("golden,spec,level", [("vtv_l10.c", VTV, 10), ("ete_l3.c", ETE, 3)])
def test_golden_files(golden, spec, level):
    assert codegen.generate(spec, level).source_text == (DATA / golden).read_text()


def test_deterministic():
    for spec in BUILTIN_SPECS.values():
        assert codegen.generate(spec, 7).source_text == codegen.generate(spec, 7).source_text


def test_index_expression_examples():
    assert codegen.index_expression("vertex", -1, 0, 10) == "ctr_1 + 1026*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2)) - 1"
    assert "((ctr_2*(ctr_2 - 1)) / (2)) - 1026" in codegen.index_expression("vertex", 0, -1, 10)
    assert codegen.index_expression("vertex", 0, 0, 3) == "ctr_1 + 10*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))"
    with pytest.raises(ValueError):
        codegen.index_expression("face", 0, 0, 3)


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_plan_and_text_agree(name):
    """Every emitted index expression evaluates to the plan index and the grid's own linear index."""
    spec = BUILTIN_SPECS[name]
    for level in range(2, 6):
        k = codegen.generate(spec, level)
        for reads, st in zip(spec.accesses, k.statements):
            for acc, r in zip(reads, st.reads):
                layout = spec.layout_of(acc.source)
                text = codegen.index_expression(layout, acc.dx, acc.dy, level)
                assert f"[{text}]" in k.source_text
                for x, y in k.domain.points():
                    want = grid.linear_index(layout, x + acc.dx, y + acc.dy, level)
                    assert r.index(x, y) == want == _eval_index(text, x, y)


def test_empty_domain_level1():
    k = codegen.generate(VTV, 1)
    assert k.domain.size == 0
    yb, ye = map(int, re.search(r"ctr_2 = (\d+); ctr_2 < (\d+);", k.source_text).groups())
    xb, diag = map(int, re.search(r"ctr_1 = (\d+); ctr_1 < (\d+) - ctr_2;", k.source_text).groups())
    assert all(xb >= diag - y for y in range(yb, ye))
    src, dst = allocate(1, pseudo_random(0)), allocate(1, constant(4.0))
    codegen.execute_plan(k, (1.0,) * 7, src.arrays("src"), dst.arrays("dst"))
    assert np.all(dst.flat() == 4.0)


def _compare(name, level, seed, weights=None):
    spec = BUILTIN_SPECS[name]
    w = P2Operator.random(seed).weights(name) if weights is None else weights
    src = allocate(level, pseudo_random(seed))
    a, b = allocate(level, constant(2.0)), allocate(level, constant(2.0))
    codegen.execute_plan(codegen.generate(spec, level), w, src.arrays("src"), a.arrays("dst"))
    kernels.reference_apply(spec, w, src.arrays("src"), b.arrays("dst"))
    return a, b


@pytest.mark.parametrize("name", KERNEL_NAMES)
@pytest.mark.parametrize("level", [2, 3, 4, 5])
def test_execute_plan_matches_interpreter(name, level):
    a, b = _compare(name, level, level)
    assert a.flat().tobytes() == b.flat().tobytes()


def test_reference_examples():
    a, b = _compare("vtv", 4, 3)
    assert a.flat().tobytes() == b.flat().tobytes()
    a, b = _compare("ete", 3, 0)
    assert a.flat().tobytes() == b.flat().tobytes()


def test_zero_weights():
    a, b = _compare("etv", 4, 1, weights=(0.0,) * 12)
    assert a.flat().tobytes() == b.flat().tobytes()
    dom = kernels.kernel_domain("etv", 4)
    assert all(a.vertex.get(x, y) == 0.0 for x, y in dom.points())


def test_permuted_weights_layout():
    level = 4
    w = P2Operator.random(5).weights("vte")
    perm = tuple(reversed(range(12)))
    k = codegen.generate(BUILTIN_SPECS["vte"], level, weights_layout=perm)
    assert k.hoisted[0] == ("xi_0", 11)
    stored = [0.0] * 12
    for k_idx, slot in enumerate(perm):
        stored[slot] = w[k_idx]
    src = allocate(level, pseudo_random(5))
    a, b = allocate(level), allocate(level)
    codegen.execute_plan(k, stored, src.arrays("src"), a.arrays("dst"))
    kernels.reference_apply(BUILTIN_SPECS["vte"], w, src.arrays("src"), b.arrays("dst"))
    assert a.flat().tobytes() == b.flat().tobytes()


def test_accumulate():
    level = 3
    w = P2Operator.random(2).weights("vtv")
    src = allocate(level, pseudo_random(2))
    once, twice = allocate(level), allocate(level)
    k = codegen.generate(VTV, level)
    codegen.execute_plan(k, w, src.arrays("src"), once.arrays("dst"))
    codegen.execute_plan(k, w, src.arrays("src"), twice.arrays("dst"))
    codegen.execute_plan(k, w, src.arrays("src"), twice.arrays("dst"), accumulate=True)
    assert np.array_equal(twice.vertex.values, 2 * once.vertex.values)


def test_summary():
    s = codegen.generate(ETE, 8).summary()
    assert "15 hoisted weights" in s and "3 targets" in s


def test_errors():
    with pytest.raises(SpecError):
        codegen.generate(VTV, 4, weights_layout=(0, 0, 1, 2, 3, 4, 5))
    k = codegen.generate(VTV, 4)
    src = allocate(4)
    with pytest.raises(SpecError):
        codegen.execute_plan(k, (1.0,) * 6, src.arrays("src"), allocate(4).arrays("dst"))
    with pytest.raises(ShapeError):
        codegen.execute_plan(k, (1.0,) * 7, allocate(3).arrays("src"), allocate(4).arrays("dst"))
    with pytest.raises(SpecError):
        codegen.execute_plan(k, (1.0,) * 7, {}, allocate(4).arrays("dst"))
