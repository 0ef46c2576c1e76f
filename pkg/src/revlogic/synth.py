"""Truth-table synthesis into controlled-not cascades, and peephole optimization."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, check_valid, mcx
from .simulator import Permutation

MAX_SYNTH_LINES = 6


def _as_table(p) -> list[int]:
    table = p.table if isinstance(p, Permutation) else p
    return [int(x) for x in table]


def synth_from_permutation(p: Permutation | Sequence[int]) -> Circuit:
    """Transformation-based synthesis.

    Walks the patterns in ascending order and appends output-side gates that
    send the current image of ``i`` back to ``i`` without touching smaller
    patterns; the reversed gate list realises ``p``. Each output line ends up
    as an exclusive-or sum of products of the inputs.
    """
    table = _as_table(p)
    size = len(table)
    n = size.bit_length() - 1
    if size < 1 or 1 << n != size:
        raise ValueError(f"table size {size} is not a power of two")
    if n > MAX_SYNTH_LINES:
        raise ValueError(f"synthesis is limited to {MAX_SYNTH_LINES} lines, got {n}")
    if sorted(table) != list(range(size)):
        raise ValueError("table is not a bijection")

    f = list(table)
    gates: list[Gate] = []

    def push(ctrl_mask: int, target: int):
        gates.append(mcx([b for b in range(n) if ctrl_mask >> b & 1], target))
        bit = 1 << target
        for x in range(size):
            if f[x] & ctrl_mask == ctrl_mask:
                f[x] ^= bit

    for i in range(size):
        j = f[i]
        if j == i:
            continue
        # raise missing ones first (controls on the ones of the current image)
        for b in range(n):
            if i >> b & 1 and not j >> b & 1:
                push(j, b)
                j |= 1 << b
        for b in range(n):
            if j >> b & 1 and not i >> b & 1:
                push(i, b)
                j &= ~(1 << b)
    return Circuit(n, tuple(reversed(gates)))


def commute(g: Gate, h: Gate) -> bool:
    """Sound sufficient commutation test for two gates."""
    if not (g.support & h.support):
        return True
    if g.is_controlled_not and h.is_controlled_not:
        # each target outside the other's controls (covers equal targets)
        return g.targets[0] not in h.controls and h.targets[0] not in g.controls
    return g == h


def _cancel_pass(gates: Sequence[Gate]) -> list[Gate]:
    out: list[Gate] = []
    for g in gates:
        for k in range(len(out) - 1, -1, -1):
            h = out[k]
            if h == g:
                del out[k]
                break
            if not commute(g, h):
                out.append(g)
                break
        else:
            out.append(g)
    return out


def optimize(circuit: Circuit, passes: int = 16) -> Circuit:
    """Cancel pairs of identical gates that can be brought together by commuting.

    Left-greedy: each gate looks back past commuting gates for an identical
    partner. Passes repeat until nothing changes or the budget runs out, so
    the gate count never grows and the permutation is unchanged.
    """
    check_valid(circuit)
    gates = list(circuit.gates)
    for _ in range(max(passes, 0)):
        nxt = _cancel_pass(gates)
        if len(nxt) == len(gates):
            break
        gates = nxt
    return circuit.with_gates(gates)


def parse_truth_table(text: str) -> Permutation:
    """Two-column decimal table (``index image`` or ``index -> image``), ``#`` comments."""
    pairs: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].replace("->", " ").strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two columns")
        try:
            i, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer entry") from None
        if i in pairs:
            raise ValueError(f"line {lineno}: duplicate index {i}")
        pairs[i] = v
    size = len(pairs)
    if sorted(pairs) != list(range(size)):
        raise ValueError("indices must cover 0..N-1")
    return Permutation(np.array([pairs[i] for i in range(size)], dtype=np.int64))


def format_truth_table(p: Permutation) -> str:
    return "".join(f"{i} -> {int(v)}\n" for i, v in enumerate(p.table))
