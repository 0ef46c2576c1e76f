import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revlogic.arith import (
    add_gates,
    decrement_gates,
    feynman_full_adder,
    gen_alu,
    gen_constmul,
    gen_ctrl_adder,
    gen_rbca,
    gen_vadder,
    increment_gates,
    optimal_block_size,
)
from revlogic.circuit import Circuit, depth, invert
from revlogic.simulator import BitState, check_garbage_free, permutation, run, run_buses


def _grid(*sizes):
    axes = np.meshgrid(*[np.arange(s, dtype=np.uint64) for s in sizes], indexing="ij")
    return [ax.ravel() for ax in axes]


def _add(circ, lay, a, b):
    out = run_buses(circ, [(lay.a_lines, a), (lay.b_lines, b)])
    return out


# -- V-adder ------------------------------------------------------------------

def test_vadder_one_bit_is_cnot():
    c, lay = gen_vadder(1)
    assert len(c.gates) == 1 and c.gates[0].kind.value == "CNOT"
    assert list(permutation(c).table) == [0, 3, 2, 1]


@pytest.mark.parametrize("a, b, s", [(3, 5, 8), (9, 12, 5)])
def test_vadder_examples(a, b, s):
    c, lay = gen_vadder(4)
    bits = [0] * c.width
    for k in range(4):
        bits[lay.a_lines[k]] = a >> k & 1
        bits[lay.b_lines[k]] = b >> k & 1
    out = run(c, BitState(bits))
    val = lambda lines: sum(out.bits[ln] << k for k, ln in enumerate(lines))
    assert val(lay.a_lines) == a and val(lay.b_lines) == s and not out.bits[lay.ancilla_lines[0]]


@pytest.mark.parametrize("n", range(1, 7))
def test_vadder_all_patterns(n):
    # with the carry line at 1 the adder adds one more; it is restored either way
    c, lay = gen_vadder(n)
    table = permutation(c).table
    mask = (1 << n) - 1
    x = np.arange(1 << c.width)
    a, b = x & mask, x >> n & mask
    cin = x >> (2 * n) & 1 if n > 1 else 0
    expect = a | ((a + b + cin) & mask) << n | (cin << (2 * n) if n > 1 else 0)
    assert np.array_equal(table, expect)


@pytest.mark.parametrize("n", range(1, 7))
def test_inverse_vadder_subtracts(n):
    c, lay = gen_vadder(n)
    a, b = _grid(1 << n, 1 << n)
    out = _add(invert(c), lay, a, b)
    assert np.array_equal(out.bus(lay.b_lines), (b - a) % (1 << n))
    assert np.array_equal(out.bus(lay.a_lines), a)


def test_vadder_gate_count_is_affine():
    counts = [len(gen_vadder(n)[0].gates) for n in range(2, 17)]
    diffs = np.diff(counts)
    assert (diffs == diffs[0]).all()


def test_vadder_shape_is_v():
    # carries ripple up through the bit positions and back down
    c, lay = gen_vadder(5)
    anc = lay.ancilla_lines[0]
    assert any(anc in g.support for g in c.gates[:3]) and any(anc in g.support for g in c.gates[-3:])
    pos = [max(lay.a_lines.index(ln) for ln in g.support if ln in lay.a_lines) for g in c.gates
           if g.support & set(lay.a_lines)]
    peak = pos.index(max(pos))
    assert pos[:peak + 1] == sorted(pos[:peak + 1])
    assert pos[peak:] == sorted(pos[peak:], reverse=True)
    assert len(c.ancilla_lines) == 1


def test_vadder_rejects_zero():
    with pytest.raises(ValueError):
        gen_vadder(0)


# -- controlled adder ---------------------------------------------------------

@pytest.mark.parametrize("n", [1, 3, 4])
def test_ctrl_adder_exhaustive(n):
    c, lay = gen_ctrl_adder(n)
    ctrl, a, b = _grid(2, 1 << n, 1 << n)
    out = run_buses(c, [(lay.ctrl_lines, ctrl), (lay.a_lines, a), (lay.b_lines, b)])
    assert np.array_equal(out.bus(lay.b_lines), (b + ctrl * a) % (1 << n))
    assert np.array_equal(out.bus(lay.a_lines), a)
    assert np.array_equal(out.bus(lay.ctrl_lines), ctrl)
    assert check_garbage_free(c).ok


# -- RBCA ---------------------------------------------------------------------

def test_rbca_full_block_is_vadder():
    assert gen_rbca(5, 5)[0] == gen_vadder(5)[0]


@pytest.mark.parametrize("n, b", [(2, 1), (5, 2), (7, 3), (6, 4), (9, 3), (10, 4)])
def test_rbca_matches_addition(n, b):
    c, lay = gen_rbca(n, b)
    a, bb = _grid(1 << n, 1 << n)
    out = _add(c, lay, a, bb)
    assert np.array_equal(out.bus(lay.b_lines), (a + bb) % (1 << n))
    assert np.array_equal(out.bus(lay.a_lines), a)
    for line in lay.ancilla_lines:
        assert not out.line(line).any()


@pytest.mark.parametrize("n, b", [(4, 2), (6, 3), (5, 1)])
def test_rbca_garbage_free(n, b):
    c, _ = gen_rbca(n, b)
    rep = check_garbage_free(c)
    assert rep.ok and rep.exhaustive


def test_rbca_block_range():
    with pytest.raises(ValueError):
        gen_rbca(4, 0)
    with pytest.raises(ValueError):
        gen_rbca(4, 5)


@pytest.mark.parametrize("n", [16, 25, 36, 64])
def test_rbca_is_shallower_at_optimal_block(n):
    assert depth(gen_rbca(n, optimal_block_size(n))[0]) < depth(gen_vadder(n)[0])


@pytest.mark.parametrize("n", [16, 64])
def test_rbca_depth_grows_like_square_root(n):
    d = lambda m: depth(gen_rbca(m, optimal_block_size(m))[0])
    assert d(4 * n) / d(n) <= 2.5


def test_optimal_block_size():
    assert [optimal_block_size(n) for n in (1, 2, 4, 5, 16, 17, 64)] == [1, 2, 2, 3, 4, 5, 8]


def test_rbca_wide_sampled(rng):
    c, lay = gen_rbca(40, 7)
    a = rng.integers(0, 1 << 40, 4000, dtype=np.uint64)
    b = rng.integers(0, 1 << 40, 4000, dtype=np.uint64)
    out = _add(c, lay, a, b)
    assert np.array_equal(out.bus(lay.b_lines), (a + b) & np.uint64((1 << 40) - 1))


# -- constant multiplier ------------------------------------------------------

@pytest.mark.parametrize("n, k, sign, a, r, p", [(4, 2, 1, 3, 2, 17), (4, 2, 1, 0, 0, 0), (4, 2, -1, 5, 1, 16)])
def test_constmul_examples(n, k, sign, a, r, p):
    c, lay = gen_constmul(n, k, sign)
    out = run_buses(c, [(lay.a_lines, np.array([a])), (lay.r_lines, np.array([r]))])
    assert int(out.bus(lay.p_lines)[0]) == p


@pytest.mark.parametrize("k, sign", [(0, 1), (1, 1), (2, -1), (2, 1), (3, -1), (3, 1), (4, -1)])
@pytest.mark.parametrize("n", [1, 3, 5])
def test_constmul_oracle(n, k, sign):
    c, lay = gen_constmul(n, k, sign)
    M = lay.multiplier
    assert lay.m == (k if sign < 0 else k + 1)
    a, r = _grid(1 << n, M)
    out = run_buses(c, [(lay.a_lines, a), (lay.r_lines, r)])
    assert np.array_equal(out.bus(lay.p_lines), a * np.uint64(M) + r)
    assert permutation(c).is_bijection()
    assert not c.ancilla_lines and not c.garbage_lines


@pytest.mark.parametrize("k, sign", [(0, -1), (1, -1)])
def test_constmul_rejects_small_multipliers(k, sign):
    with pytest.raises(ValueError):
        gen_constmul(3, k, sign)


# -- ALU ----------------------------------------------------------------------

def _alu_cases(n, op):
    a, b = _grid(1 << n, 1 << n)
    ctrl = np.zeros_like(a) if op is None else np.full_like(a, 1 << op)
    return ctrl, a, b


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("op", [None, 0, 1, 2])
def test_alu_ops(n, op):
    c, lay = gen_alu(n)
    ctrl, a, b = _alu_cases(n, op)
    out = run_buses(c, [(lay.ctrl_lines, ctrl), (lay.a_lines, a), (lay.b_lines, b)])
    mask = (1 << n) - 1
    expect = {None: b, 0: b ^ a, 1: (b + a) & mask, 2: (b - a) & mask}[op]
    assert np.array_equal(out.bus(lay.b_lines), expect)
    assert np.array_equal(out.bus(lay.a_lines), a)
    assert np.array_equal(out.bus(lay.ctrl_lines), ctrl)
    for line in lay.ancilla_lines:
        assert not out.line(line).any()


@pytest.mark.parametrize("ctrl, expect", [(0b010, 5), (0b100, 1), (0b000, 3), (0b001, 1)])
def test_alu_examples(ctrl, expect):
    c, lay = gen_alu(4)
    out = run_buses(c, [(lay.ctrl_lines, np.array([ctrl])), (lay.a_lines, np.array([2])), (lay.b_lines, np.array([3]))])
    assert int(out.bus(lay.b_lines)[0]) == expect


def test_alu_garbage_free_and_bijective():
    c, _ = gen_alu(3)
    assert check_garbage_free(c).ok
    assert permutation(c).is_bijection()


# -- building blocks ----------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7), st.integers(0, 3))
def test_increment_and_decrement(n, nctrl):
    lines = list(range(nctrl, nctrl + n))
    ctrls = list(range(nctrl))
    inc = Circuit(n + nctrl, tuple(increment_gates(lines, ctrls)))
    table = permutation(inc).table
    x = np.arange(1 << (n + nctrl))
    on = (x & ((1 << nctrl) - 1)) == (1 << nctrl) - 1
    val = x >> nctrl
    expect = np.where(on, ((val + 1) % (1 << n)) << nctrl | (x & ((1 << nctrl) - 1)), x)
    assert np.array_equal(table, expect)
    dec = Circuit(n + nctrl, tuple(decrement_gates(lines, ctrls)))
    assert permutation(dec) == permutation(inc).inverse()


def test_add_gates_on_scattered_lines():
    # operand lines need not be contiguous or ordered
    a, b, cin = [4, 0, 6], [1, 5, 2], 3
    c = Circuit(7, tuple(add_gates(a, b, cin)))
    table = permutation(c).table
    for x in range(1 << 7):
        av = sum((x >> ln & 1) << k for k, ln in enumerate(a))
        bv = sum((x >> ln & 1) << k for k, ln in enumerate(b))
        y = int(table[x])
        assert sum((y >> ln & 1) << k for k, ln in enumerate(b)) == (av + bv + (x >> cin & 1)) % 8
        assert sum((y >> ln & 1) << k for k, ln in enumerate(a)) == av


def test_feynman_adder_truth_table():
    c = feynman_full_adder()
    assert len(c.gates) == 4
    for x in range(8):
        a, b, cin = x & 1, x >> 1 & 1, x >> 2 & 1
        out = run(c, BitState([a, b, cin, 0])).bits
        assert out[0] == a
        assert out[2] == (a ^ b ^ cin)
        assert out[3] == (a + b + cin >= 2)
