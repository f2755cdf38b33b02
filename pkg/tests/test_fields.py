import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2ecm import grid
from p2ecm.errors import GridIndexError, ShapeError
from p2ecm.fields import (EdgeField, P2Function, P2Operator, VertexField, allocate, constant, dump_field, load_field,
                          max_abs_diff, pseudo_random, zeros)


def test_allocate_sizes():
    assert len(allocate(0, zeros()).vertex) == 3
    assert len(allocate(10, zeros())) == 2100225
    f = allocate(4)
    assert all(len(e) == grid.dof_counts(4).edges_per_orientation for e in f.edges())


def test_pseudo_random_is_deterministic_and_bounded():
    a = allocate(5, pseudo_random(42))
    b = allocate(5, pseudo_random(42))
    assert a.flat().tobytes() == b.flat().tobytes()
    assert np.all(np.abs(a.flat()) <= 1.0)
    # each orientation has its own stream
    assert not np.array_equal(a.edge_x.values, a.edge_y.values)
    assert not np.array_equal(a.flat(), allocate(5, pseudo_random(43)).flat())


def test_set_get_roundtrip_and_linear_slot():
    f = allocate(10)
    f.vertex.set(1, 1, 3.5)
    assert f.vertex.get(1, 1) == 3.5
    assert f.vertex.values[1026] == 3.5
    f.edge_xy[2, 3] = -1.0
    assert f.edge_xy[2, 3] == -1.0


def test_get_out_of_range():
    f = allocate(3)
    with pytest.raises(GridIndexError):
        f.vertex.get(9, 0)
    with pytest.raises(GridIndexError):
        f.edge_x.set(0, 8, 1.0)


def test_every_slot_written_exactly_once():
    for field in allocate(4).parts():
        hits = np.zeros(len(field), dtype=int)
        for x, y in grid.layout_coordinates(field.layout, 4):
            hits[field.index(x, y)] += 1
        assert np.all(hits == 1)


@given(level=st.integers(0, 5), data=st.data(), value=st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=80)
def test_get_set_identity(level, data, value):
    f = allocate(level)
    part = data.draw(st.sampled_from(f.parts()))
    coords = list(grid.layout_coordinates(part.layout, level))
    x, y = data.draw(st.sampled_from(coords))
    part.set(x, y, value)
    assert part.get(x, y) == value


def test_max_abs_diff():
    a = allocate(3, pseudo_random(1))
    assert max_abs_diff(a, a.copy()) == 0.0
    assert max_abs_diff(allocate(3), allocate(3, constant(1.0))) == 1.0
    a, b = allocate(5, pseudo_random(1)), allocate(5, pseudo_random(2))
    brute = max(abs(u - v) for u, v in zip(a.flat().tolist(), b.flat().tolist()))
    assert max_abs_diff(a, b) == brute
    with pytest.raises(ShapeError):
        max_abs_diff(allocate(3), allocate(4))


def test_shape_checks():
    with pytest.raises(ShapeError):
        VertexField(2, np.zeros(3))
    with pytest.raises(ShapeError):
        VertexField(0, np.zeros(3, dtype=np.float32))
    with pytest.raises(ValueError):
        EdgeField(2, "z", np.zeros(10))
    f = allocate(2)
    with pytest.raises(ShapeError):
        P2Function(f.vertex, allocate(3).edge_x, f.edge_y, f.edge_xy)
    with pytest.raises(ShapeError):
        P2Function(f.vertex, f.edge_y, f.edge_x, f.edge_xy)


def test_flat_roundtrip():
    f = allocate(4, pseudo_random(3))
    g = P2Function.from_flat(4, f.flat())
    assert g.flat().tobytes() == f.flat().tobytes()
    with pytest.raises(ShapeError):
        P2Function.from_flat(4, np.zeros(3))


def test_operator_arities():
    op = P2Operator.constant(1.0)
    assert [len(op.weights(k)) for k in ("vtv", "etv", "vte", "ete")] == [7, 12, 12, 15]
    assert len(op.vtv) + len(op.etv) == 19
    assert P2Operator.random(3) == P2Operator.random(3)
    with pytest.raises(ShapeError):
        P2Operator(vtv=(1.0,) * 6, etv=op.etv, vte=op.vte, ete=op.ete)


def test_binary_dump_roundtrip(tmp_path):
    f = allocate(3, pseudo_random(9))
    for part in f.parts():
        path = tmp_path / f"{part.tag}.bin"
        dump_field(part, path)
        back = load_field(path)
        assert back.level == 3 and back.tag == part.tag
        assert back.values.tobytes() == part.values.tobytes()
    (tmp_path / "junk.bin").write_bytes(b"\0" * 64)
    with pytest.raises(ValueError):
        load_field(tmp_path / "junk.bin")
