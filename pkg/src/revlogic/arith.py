"""Garbage-free reversible arithmetic generators.

All adders are in-place reversible updates ``(A, B) -> (A, B + A mod 2^n)``
built from the majority / unmajority-and-add ripple: a forward ripple leaves
carries on the A lines, the backward ripple clears them while writing sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import CNOT, NOT, TOFFOLI, Circuit, Gate, LineInfo, mcx


@dataclass(frozen=True)
class AdderLayout:
    n: int
    a_lines: tuple[int, ...]
    b_lines: tuple[int, ...]
    ancilla_lines: tuple[int, ...] = ()
    ctrl_lines: tuple[int, ...] = ()


@dataclass(frozen=True)
class MulLayout:
    n: int
    k: int
    sign: int
    m: int
    a_lines: tuple[int, ...]
    r_lines: tuple[int, ...]
    ancilla_lines: tuple[int, ...] = ()

    @property
    def multiplier(self) -> int:
        return (1 << self.k) + self.sign

    @property
    def p_lines(self) -> tuple[int, ...]:
        """Product bus, LSB first: spans the R lines then the A lines."""
        return self.r_lines + self.a_lines

    def valid_inputs(self, bits: np.ndarray) -> np.ndarray:
        """Mask of input samples with ``R < M`` (``bits`` is ``bool[width, samples]``)."""
        r = np.zeros(bits.shape[1], dtype=np.int64)
        for k, line in enumerate(self.r_lines):
            r |= bits[line].astype(np.int64) << k
        return r < self.multiplier


@dataclass(frozen=True)
class AluLayout:
    n: int
    ctrl_lines: tuple[int, int, int]  # c_xor, c_add, c_sub
    a_lines: tuple[int, ...]
    b_lines: tuple[int, ...]
    ancilla_lines: tuple[int, ...] = field(default=())


# -- gate-list builders on arbitrary lines ----------------------------------

def maj(x: int, y: int, z: int) -> list[Gate]:
    return [CNOT(z, y), CNOT(z, x), TOFFOLI((x, y), z)]


def uma(x: int, y: int, z: int) -> list[Gate]:
    return [TOFFOLI((x, y), z), CNOT(z, x), CNOT(x, y)]


def ctrl_uma(ctrl: int, x: int, y: int, z: int) -> list[Gate]:
    # leaves y = b ^ ctrl*(a ^ c) instead of the plain sum
    return [TOFFOLI((x, y), z), CNOT(z, x), TOFFOLI((ctrl, x), y), CNOT(z, y), TOFFOLI((ctrl, z), y)]


def maj_chain(a: Sequence[int], b: Sequence[int], cin: int) -> list[Gate]:
    """Forward ripple; afterwards ``a[-1]`` holds the carry out of the block."""
    prev = [cin, *a]
    gates: list[Gate] = []
    for i in range(len(a)):
        gates += maj(prev[i], b[i], a[i])
    return gates


def add_gates(a: Sequence[int], b: Sequence[int], cin: int | None, ctrl: int | None = None) -> list[Gate]:
    """``b += a (+ cin)`` modulo ``2^len(b)``; ``a`` and ``cin`` are restored.

    ``cin`` may be ``None`` only when it would be a constant 0 and
    ``len(a) == 1``; wider adders need the line as ripple workspace.
    With ``ctrl`` the update is applied only when that line is 1.
    """
    n = len(a)
    assert n == len(b) and n >= 1
    if n == 1 and cin is None:
        return [mcx([a[0]] if ctrl is None else [ctrl, a[0]], b[0])]
    assert cin is not None
    prev = [cin, *a]
    gates: list[Gate] = []
    for i in range(n - 1):
        gates += maj(prev[i], b[i], a[i])
    top = n - 1
    # prev[top] carries into the top bit
    if ctrl is None:
        gates += [CNOT(a[top], b[top]), CNOT(prev[top], b[top])]
    else:
        gates += [TOFFOLI((ctrl, a[top]), b[top]), TOFFOLI((ctrl, prev[top]), b[top])]
    for i in reversed(range(n - 1)):
        gates += uma(prev[i], b[i], a[i]) if ctrl is None else ctrl_uma(ctrl, prev[i], b[i], a[i])
    return gates


def increment_gates(x: Sequence[int], ctrls: Sequence[int] = ()) -> list[Gate]:
    """``x += 1 mod 2^len(x)`` when all ``ctrls`` are 1, ancilla-free."""
    return [mcx([*ctrls, *x[:i]], x[i]) for i in reversed(range(len(x)))]


def decrement_gates(x: Sequence[int], ctrls: Sequence[int] = ()) -> list[Gate]:
    return increment_gates(x, ctrls)[::-1]


def _names(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]


# -- public generators -----------------------------------------------------

def gen_vadder(n: int) -> tuple[Circuit, AdderLayout]:
    """V-shaped modular adder on ``2n`` lines plus one carry ancilla (none for n=1)."""
    if n < 1:
        raise ValueError("adder width must be >= 1")
    a = tuple(range(n))
    b = tuple(range(n, 2 * n))
    if n == 1:
        circ = Circuit(2, (CNOT(0, 1),), (LineInfo("a0"), LineInfo("b0")))
        return circ, AdderLayout(1, a, b)
    anc = 2 * n
    lines = tuple(LineInfo(nm) for nm in _names("a", n) + _names("b", n)) + (LineInfo("c", 0),)
    circ = Circuit(2 * n + 1, tuple(add_gates(a, b, anc)), lines)
    return circ, AdderLayout(n, a, b, (anc,))


def gen_ctrl_adder(n: int) -> tuple[Circuit, AdderLayout]:
    """Controlled V-adder: line 0 is the control, then A, B and one ancilla."""
    if n < 1:
        raise ValueError("adder width must be >= 1")
    ctrl = 0
    a = tuple(range(1, n + 1))
    b = tuple(range(n + 1, 2 * n + 1))
    names = ["ctrl", *_names("a", n), *_names("b", n)]
    if n == 1:
        circ = Circuit(3, (TOFFOLI((ctrl, a[0]), b[0]),), tuple(LineInfo(nm) for nm in names))
        return circ, AdderLayout(1, a, b, (), (ctrl,))
    anc = 2 * n + 1
    lines = tuple(LineInfo(nm) for nm in names) + (LineInfo("c", 0),)
    circ = Circuit(2 * n + 2, tuple(add_gates(a, b, anc, ctrl=ctrl)), lines)
    return circ, AdderLayout(n, a, b, (anc,), (ctrl,))


def _carry_into_blocks(blocks_a, blocks_b, z, q, t, k) -> list[Gate]:
    """XOR the carry into each block ``j >= 1`` onto ``k[j]``; all else restored.

    Block 0 ripples from its carry-in line ``z[0]``; the other blocks use zero
    carry-in lines, so their top A line ends up holding the block generate
    signal and their B lines the bitwise propagate signals.
    """
    nb = len(blocks_a)
    compute: list[Gate] = []
    for j in range(nb - 1):
        compute += maj_chain(blocks_a[j], blocks_b[j], z[j])
    for j in range(1, nb - 1):
        compute.append(mcx(blocks_b[j], q[j]))
    compute.append(CNOT(blocks_a[0][-1], t[1]))
    for j in range(1, nb - 1):
        compute.append(CNOT(blocks_a[j][-1], t[j + 1]))
    for j in range(1, nb - 1):
        compute.append(TOFFOLI((q[j], t[j]), t[j + 1]))
    copy = [CNOT(t[j], k[j]) for j in range(1, nb)]
    return compute + copy + compute[::-1]


def gen_rbca(n: int, b: int) -> tuple[Circuit, AdderLayout]:
    """Ripple-block carry adder: block adders in parallel plus a carry-correction ripple.

    Block carries are computed garbage-free onto per-block lines, every block
    then adds in parallel using its carry line as carry-in, and finally the
    carry lines are cleared by recomputing the borrows of ``S - A``.
    ``b == n`` degenerates to :func:`gen_vadder`.
    """
    if n < 1:
        raise ValueError("adder width must be >= 1")
    if not 1 <= b <= n:
        raise ValueError(f"block size {b} outside [1, {n}]")
    if b == n:
        return gen_vadder(n)
    a = tuple(range(n))
    bb = tuple(range(n, 2 * n))
    starts = list(range(0, n, b))
    nb = len(starts)
    blocks_a = [a[s:s + b] for s in starts]
    blocks_b = [bb[s:s + b] for s in starts]

    nxt = 2 * n
    names = _names("a", n) + _names("b", n)

    def alloc(label: str, idx: Sequence[int]) -> dict[int, int]:
        nonlocal nxt
        out = {}
        for j in idx:
            out[j] = nxt
            names.append(f"{label}{j}")
            nxt += 1
        return out

    z = alloc("z", range(nb - 1))
    q = alloc("q", range(1, nb - 1))
    t = alloc("t", range(1, nb))
    k = alloc("k", range(1, nb))

    cr = _carry_into_blocks(blocks_a, blocks_b, z, q, t, k)
    gates: list[Gate] = list(cr)
    for j in range(nb):
        cin = z[0] if j == 0 else k[j]
        gates += add_gates(blocks_a[j], blocks_b[j], cin)
    # clear k: borrow of S - A at each block boundary is the complement of C_j
    flip_in = [NOT(x) for x in a] + [NOT(z[0])]
    gates += flip_in + cr + flip_in + [NOT(k[j]) for j in range(1, nb)]

    width = nxt
    lines = tuple(LineInfo(nm, 0 if i >= 2 * n else None) for i, nm in enumerate(names))
    circ = Circuit(width, tuple(gates), lines)
    return circ, AdderLayout(n, a, bb, tuple(range(2 * n, width)))


def gen_constmul(n: int, k: int, sign: int) -> tuple[Circuit, MulLayout]:
    """In-place ``(A, R) -> A*M + R`` for ``M = 2^k + sign`` and ``0 <= R < M``.

    R sits on the low ``m`` lines and A above it; the product occupies all
    ``n + m`` lines. The circuit undoes long division by M one quotient bit at
    a time, least significant first: for the window of ``m + 1`` lines
    starting at bit ``i`` (top line = quotient bit ``a_i``), subtract
    ``2^m - M`` from the low part when the top line is set, then toggle the
    top line when the low part reaches M. Both are reversible updates, so the
    circuit needs no ancilla and is a bijection on every pattern.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if k < 0:
        raise ValueError("k must be >= 0")
    M = (1 << k) + sign
    if M < 2:
        raise ValueError(f"multiplier 2^{k}{'+' if sign > 0 else '-'}1 = {M} is not supported (need M >= 2)")
    m = k if sign < 0 else k + 1
    r = tuple(range(m))
    a = tuple(range(m, m + n))
    gates: list[Gate] = []
    for i in range(n):
        low = list(range(i, i + m))
        top = i + m
        if sign < 0:
            # delta = 1
            gates += decrement_gates(low, [top])
            # low >= 2^m - 1 iff all ones
            gates.append(mcx(low, top))
        else:
            # delta = 2^k - 1: subtract 2^k (flip bit k of the m = k+1 bit low part), add 1
            gates.append(CNOT(top, low[k]))
            gates += increment_gates(low, [top])
            # low >= 2^k + 1 iff bit k set and some lower bit set
            lower = low[:k]
            gates.append(CNOT(low[k], top))
            gates += [NOT(x) for x in lower]
            gates.append(mcx([low[k], *lower], top))
            gates += [NOT(x) for x in lower]
    names = _names("r", m) + _names("a", n)
    circ = Circuit(n + m, tuple(gates), tuple(LineInfo(nm) for nm in names))
    return circ, MulLayout(n, k, sign, m, a, r)


def gen_alu(n: int) -> tuple[Circuit, AluLayout]:
    """XOR / ADD / SUB unit: each operation is a block controlled by its one-hot line.

    Lines: ``c_xor, c_add, c_sub``, then A, B, and one carry ancilla (n >= 2).
    The blocks run in sequence; with all controls 0 the circuit is the identity.
    """
    if n < 1:
        raise ValueError("ALU width must be >= 1")
    cx, cadd, csub = 0, 1, 2
    a = tuple(range(3, 3 + n))
    b = tuple(range(3 + n, 3 + 2 * n))
    anc = 3 + 2 * n if n >= 2 else None
    gates: list[Gate] = [TOFFOLI((cx, ai), bi) for ai, bi in zip(a, b)]
    gates += add_gates(a, b, anc, ctrl=cadd)
    gates += add_gates(a, b, anc, ctrl=csub)[::-1]
    names = ["c_xor", "c_add", "c_sub", *_names("a", n), *_names("b", n)]
    lines = [LineInfo(nm) for nm in names]
    if anc is not None:
        lines.append(LineInfo("c", 0))
    circ = Circuit(len(lines), tuple(gates), tuple(lines))
    return circ, AluLayout(n, (cx, cadd, csub), a, b, (anc,) if anc is not None else ())


def feynman_full_adder() -> Circuit:
    """Feynman's four-gate full adder.

    Lines ``a, b, cin, 0``: outputs ``a``, ``a^b`` (garbage), sum, carry.
    """
    gates = (TOFFOLI((0, 1), 3), CNOT(0, 1), TOFFOLI((1, 2), 3), CNOT(1, 2))
    lines = (LineInfo("a"), LineInfo("b", garbage_out=True), LineInfo("cin"), LineInfo("cout", 0, result_out=True))
    return Circuit(4, gates, lines)


def optimal_block_size(n: int) -> int:
    return max(1, math.isqrt(n - 1) + 1) if n > 1 else 1
