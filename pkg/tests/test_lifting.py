import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revlogic.circuit import invert
from revlogic.lifting import (
    AddShift,
    AddShiftDown,
    NegateBus,
    SwapBus,
    TransformSpec,
    apply_steps,
    format_spec,
    gen_lift_step,
    gen_transform,
    lift_layout,
    parse_spec,
    s_transform,
)
from revlogic.simulator import check_garbage_free, permutation, run_buses


def _drive(spec, values, inverse=False):
    circ = gen_transform(spec)
    if inverse:
        circ = invert(circ)
    lay = lift_layout(spec)
    out = run_buses(circ, [(lay.bus_lines[j], v) for j, v in enumerate(values)])
    return [out.bus(lay.bus_lines[j]) for j in range(spec.buses)], out, lay


def _all_values(spec):
    grids = np.meshgrid(*[np.arange(1 << spec.n, dtype=np.uint64)] * spec.buses, indexing="ij")
    return [g.ravel() for g in grids]


def test_plain_add_step():
    c = gen_lift_step(AddShift(1, 0, 0, 1), 3, 2)
    spec = TransformSpec(2, 3, (AddShift(1, 0, 0, 1),))
    got, _, _ = _drive(spec, [np.array([1]), np.array([2])])
    assert [int(g[0]) for g in got] == [1, 3]
    assert c.width == gen_transform(spec).width


def test_shifted_add_step():
    spec = TransformSpec(2, 4, (AddShift(1, 0, 1, 1),))
    got, _, _ = _drive(spec, [np.array([3]), np.array([2])])
    assert [int(g[0]) for g in got] == [3, 8]


def test_swap_step():
    spec = TransformSpec(2, 4, (SwapBus(0, 1),))
    got, _, _ = _drive(spec, [np.array([5]), np.array([9])])
    assert [int(g[0]) for g in got] == [9, 5]


def test_empty_transform_is_identity():
    spec = TransformSpec(2, 3)
    assert permutation(gen_transform(spec)).is_identity()


def test_s_transform_round_trip():
    spec = s_transform(6)
    fwd, _, _ = _drive(spec, [np.array([7]), np.array([3])])
    d = (3 - 7) % 64
    assert int(fwd[1][0]) == d
    assert int(fwd[0][0]) == (7 + (-4 >> 1)) % 64
    back, _, _ = _drive(spec, fwd, inverse=True)
    assert [int(b[0]) for b in back] == [7, 3]


def test_floor_is_signed():
    spec = TransformSpec(2, 4, (AddShiftDown(0, 1, 2, 1),))
    # x1 = 0b1011 = -5, floor(-5 / 4) = -2
    got, _, _ = _drive(spec, [np.array([0]), np.array([11])])
    assert int(got[0][0]) == 14
    assert apply_steps(spec, [0, 11])[0] == 14


STEP_KINDS = [
    AddShift(1, 0, 0, 1), AddShift(0, 1, 2, -1), AddShift(1, 0, 5, 1),
    AddShiftDown(0, 1, 1, 1), AddShiftDown(1, 0, 3, -1), AddShiftDown(0, 1, 9, 1),
    SwapBus(0, 1), NegateBus(0), NegateBus(1),
]


@pytest.mark.parametrize("step", STEP_KINDS)
@pytest.mark.parametrize("n", [1, 2, 4])
def test_each_step_matches_oracle(step, n):
    spec = TransformSpec(2, n, (step,))
    vals = _all_values(spec)
    got, out, lay = _drive(spec, vals)
    ref = apply_steps(spec, vals)
    for g, r in zip(got, ref):
        assert np.array_equal(g.astype(np.int64), r)
    assert check_garbage_free(gen_transform(spec)).ok


def test_four_bus_shift_only_spec():
    steps = (AddShift(1, 0, 1, 1), AddShiftDown(2, 1, 1, -1), AddShift(3, 2, 0, 1), SwapBus(0, 3),
             AddShiftDown(0, 2, 2, 1), NegateBus(2))
    spec = TransformSpec(4, 3, steps)
    vals = _all_values(spec)
    got, _, _ = _drive(spec, vals)
    for g, r in zip(got, apply_steps(spec, vals)):
        assert np.array_equal(g.astype(np.int64), r)
    back, _, _ = _drive(spec, got, inverse=True)
    for b, v in zip(back, vals):
        assert np.array_equal(b, v)


def test_integer_inverse_oracle():
    spec = TransformSpec(3, 4, (AddShift(1, 0, 1, -1), AddShiftDown(2, 1, 2, 1), NegateBus(0), SwapBus(1, 2)))
    vals = _all_values(spec)
    fwd = apply_steps(spec, vals)
    back = apply_steps(spec, fwd, inverse=True)
    for b, v in zip(back, vals):
        assert np.array_equal(b, v.astype(np.int64))


def test_layout_lines():
    spec = TransformSpec(2, 4, (AddShiftDown(0, 1, 2, 1), AddShiftDown(1, 0, 3, 1)))
    lay = lift_layout(spec)
    assert lay.carry_line == 8 and lay.pad_lines == (9, 10, 11)
    assert gen_transform(spec).width == 12


@pytest.mark.parametrize("bad", [
    dict(buses=2, n=3, steps=(AddShift(0, 0, 0, 1),)),
    dict(buses=2, n=3, steps=(AddShift(2, 0, 0, 1),)),
    dict(buses=2, n=3, steps=(AddShift(1, 0, -1, 1),)),
    dict(buses=2, n=3, steps=(AddShift(1, 0, 0, 2),)),
    dict(buses=2, n=3, steps=(SwapBus(1, 1),)),
    dict(buses=0, n=3, steps=()),
])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        TransformSpec(**bad)


def test_text_format_round_trip():
    text = """\
    # integer Haar
    buses 2 bits 6
    addshift 1 0 0 -
    addshiftdown 0 1 1 +
    swap 0 1
    neg 1
    """
    spec = parse_spec(text)
    assert spec == TransformSpec(2, 6, (AddShift(1, 0, 0, -1), AddShiftDown(0, 1, 1, 1), SwapBus(0, 1), NegateBus(1)))
    assert parse_spec(format_spec(spec)) == spec


@pytest.mark.parametrize("text, msg", [
    ("addshift 1 0 0 +\n", "header"),
    ("buses 2 bits 4\nrotate 0\n", "unknown step"),
    ("buses 2 bits 4\naddshift 1 0 0\n", "takes dst src shift sign"),
    ("buses 2 bits 4\naddshift 1 0 0 *\n", "bad sign"),
    ("", "missing"),
    ("buses 2 bits 4\naddshift 1 1 0 +\n", "dst == src"),
])
def test_text_format_errors(text, msg):
    with pytest.raises(ValueError, match=msg):
        parse_spec(text)


step_strategy = st.one_of(
    st.builds(AddShift, st.integers(0, 2), st.integers(0, 2), st.integers(0, 5), st.sampled_from([1, -1])),
    st.builds(AddShiftDown, st.integers(0, 2), st.integers(0, 2), st.integers(0, 5), st.sampled_from([1, -1])),
    st.builds(SwapBus, st.integers(0, 2), st.integers(0, 2)),
    st.builds(NegateBus, st.integers(0, 2)),
).filter(lambda s: not (getattr(s, "dst", 0) == getattr(s, "src", 1)) and not (getattr(s, "i", 0) == getattr(s, "j", 1)))


@settings(max_examples=40, deadline=None)
@given(st.lists(step_strategy, max_size=6), st.integers(1, 4))
def test_random_specs_reconstruct(steps, n):
    spec = TransformSpec(3, n, tuple(steps))
    vals = _all_values(spec)
    fwd, out, lay = _drive(spec, vals)
    for g, r in zip(fwd, apply_steps(spec, vals)):
        assert np.array_equal(g.astype(np.int64), r)
    back, _, _ = _drive(spec, fwd, inverse=True)
    for b, v in zip(back, vals):
        assert np.array_equal(b, v)
    for line in ([lay.carry_line] if lay.carry_line is not None else []) + list(lay.pad_lines):
        assert not out.line(line).any()
