"""Bit-exact evaluation and verification of circuits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .circuit import CNOT, Circuit, CircuitError, Gate, LineInfo, check_valid, invert

W_MAX = 20
DEFAULT_SAMPLES = 100_000
DEFAULT_SEED = 0x5EED


@dataclass(frozen=True)
class BitState:
    bits: tuple[bool, ...]

    def __init__(self, bits: Iterable[bool | int]):
        object.__setattr__(self, "bits", tuple(bool(b) for b in bits))

    @property
    def width(self) -> int:
        return len(self.bits)

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitState":
        return cls((value >> i) & 1 for i in range(width))

    def to_int(self) -> int:
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


@dataclass(frozen=True)
class Permutation:
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def size(self) -> int:
        return len(self.table)

    @property
    def nbits(self) -> int:
        return int(self.size).bit_length() - 1

    @classmethod
    def identity(cls, nbits: int) -> "Permutation":
        return cls(np.arange(1 << nbits))

    def is_bijection(self) -> bool:
        t = self.table
        return bool(t.min(initial=0) >= 0 and t.max(initial=-1) < self.size and len(np.unique(t)) == self.size)

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.table)
        inv[self.table] = np.arange(self.size)
        return Permutation(inv)

    def then(self, other: "Permutation") -> "Permutation":
        """Apply ``self`` first, then ``other``."""
        return Permutation(other.table[self.table])

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.table, np.arange(self.size)))

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash(self.table.tobytes())

    def __getitem__(self, i):
        return self.table[i]


@dataclass(frozen=True)
class GarbageReport:
    ok: bool
    counterexample: tuple[int, int, bool] | None = None
    violations: int = 0
    exhaustive: bool = True
    checked: int = 0


def apply_gate(gate: Gate, state: BitState) -> BitState:
    if any(ln >= state.width for ln in gate.support):
        raise CircuitError(f"gate {gate!r} exceeds state width {state.width}")
    bits = list(state.bits)
    if all(bits[c] for c in gate.controls):
        if gate.is_controlled_not:
            t = gate.targets[0]
            bits[t] = not bits[t]
        else:
            a, b = gate.targets
            bits[a], bits[b] = bits[b], bits[a]
    return BitState(bits)


def run(circuit: Circuit, state: BitState, direction: str = "forward") -> BitState:
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")
    if state.width != circuit.width:
        raise CircuitError(f"state width {state.width} != circuit width {circuit.width}")
    gates = circuit.gates if direction == "forward" else reversed(circuit.gates)
    for g in gates:
        state = apply_gate(g, state)
    return state


def run_patterns(circuit: Circuit, patterns, backward: bool = False) -> np.ndarray:
    """Vectorised :func:`run` on pattern indices, width <= 64."""
    return kernels.run_packed(circuit, np.asarray(patterns, dtype=np.uint64), backward)


def permutation(circuit: Circuit) -> Permutation:
    if circuit.width > W_MAX:
        raise CircuitError(f"width {circuit.width} exceeds table limit {W_MAX}")
    out = run_patterns(circuit, np.arange(1 << circuit.width, dtype=np.uint64))
    return Permutation(out.astype(np.int64))


def check_bijective(circuit: Circuit) -> bool:
    return permutation(circuit).is_bijection()


# -- bus-level batch evaluation -------------------------------------------

class SampleBatch:
    """Bit-sliced batch of samples with integer views on line buses."""

    def __init__(self, rows: np.ndarray, nsamples: int):
        self.rows = rows
        self.nsamples = nsamples

    @classmethod
    def from_buses(cls, width: int, nsamples: int, buses: Sequence[tuple[Sequence[int], np.ndarray]] = (),
                   constants: dict[int, int] | None = None) -> "SampleBatch":
        bits = np.zeros((width, nsamples), dtype=bool)
        for line, val in (constants or {}).items():
            bits[line] = bool(val)
        for lines, values in buses:
            values = np.asarray(values, dtype=np.uint64)
            for k, line in enumerate(lines):
                bits[line] = ((values >> np.uint64(k)) & np.uint64(1)).astype(bool)
        return cls(kernels.pack_bits(bits), nsamples)

    def bits(self) -> np.ndarray:
        return kernels.unpack_bits(self.rows, self.nsamples)

    def line(self, i: int) -> np.ndarray:
        return kernels.unpack_bits(self.rows[i:i + 1], self.nsamples)[0]

    def bus(self, lines: Sequence[int]) -> np.ndarray:
        if len(lines) > 64:
            raise ValueError("bus wider than 64 lines")
        bits = kernels.unpack_bits(self.rows[list(lines)], self.nsamples) if len(lines) else np.zeros((0, self.nsamples), bool)
        out = np.zeros(self.nsamples, dtype=np.uint64)
        for k in range(len(lines)):
            out |= bits[k].astype(np.uint64) << np.uint64(k)
        return out


def simulate(circuit: Circuit, batch: SampleBatch, backward: bool = False) -> SampleBatch:
    return SampleBatch(kernels.run_sliced(circuit, batch.rows, backward), batch.nsamples)


def run_buses(circuit: Circuit, buses: Sequence[tuple[Sequence[int], np.ndarray]], backward: bool = False,
              nsamples: int | None = None) -> SampleBatch:
    """Drive buses with integer arrays; lines not listed start at their constant (or 0)."""
    if nsamples is None:
        nsamples = len(buses[0][1]) if buses else 1
    constants = {i: ln.constant_in for i, ln in enumerate(circuit.lines) if ln.constant_in is not None}
    batch = SampleBatch.from_buses(circuit.width, nsamples, buses, constants)
    return simulate(circuit, batch, backward)


def _free_input_batch(circuit: Circuit, free: list[int], samples: int, seed: int):
    constants = {i: ln.constant_in for i, ln in enumerate(circuit.lines) if ln.constant_in is not None}
    if len(free) <= W_MAX:
        nsamp = 1 << len(free)
        idx = np.arange(nsamp, dtype=np.uint64)
        return SampleBatch.from_buses(circuit.width, nsamp, [(free, idx)], constants), True
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(len(free), samples), dtype=np.uint8).astype(bool)
    full = np.zeros((circuit.width, samples), dtype=bool)
    full[free] = bits
    for line, val in constants.items():
        full[line] = bool(val)
    return SampleBatch(kernels.pack_bits(full), samples), False


def check_garbage_free(circuit: Circuit, domain: Callable[[np.ndarray], np.ndarray] | None = None,
                       samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> GarbageReport:
    """Check that every ancilla is restored and no output is flagged garbage.

    Constant lines flagged ``result_out`` are result outputs and exempt from
    the restoration check.

    Inputs range over all assignments of the non-constant lines (exhaustive up
    to ``W_MAX`` free lines, seeded sampling beyond). ``domain`` may restrict
    them further: it receives the input bit matrix ``bool[width, samples]``
    and returns a mask of valid samples.
    """
    check_valid(circuit)
    free = [i for i, ln in enumerate(circuit.lines) if ln.constant_in is None]
    batch, exhaustive = _free_input_batch(circuit, free, samples, seed)
    in_bits = batch.bits()
    valid = np.ones(batch.nsamples, dtype=bool) if domain is None else np.asarray(domain(in_bits), dtype=bool)
    out_bits = simulate(circuit, batch).bits()

    def pattern(col: int) -> int:
        return int(sum(int(in_bits[i, col]) << i for i in range(circuit.width)))

    first = None
    violations = 0
    for line in circuit.restored_lines:
        bad = valid & (out_bits[line] != bool(circuit.lines[line].constant_in))
        nbad = int(bad.sum())
        if nbad and first is None:
            col = int(np.argmax(bad))
            first = (pattern(col), line, bool(out_bits[line, col]))
        violations += nbad
    for line in circuit.garbage_lines:
        # a declared garbage output is itself a violation of garbage-freedom
        cols = np.flatnonzero(valid)
        if cols.size:
            violations += 1
            if first is None:
                col = int(cols[0])
                first = (pattern(col), line, bool(out_bits[line, col]))
    return GarbageReport(first is None, first, violations, exhaustive, int(valid.sum()))


def bennett_embed(circuit: Circuit, result_lines: Sequence[int]) -> Circuit:
    """Compute, copy the chosen result lines onto fresh zero lines, uncompute."""
    check_valid(circuit)
    for r in result_lines:
        if not 0 <= r < circuit.width:
            raise CircuitError(f"result line {r} outside width {circuit.width}")
    if len(set(result_lines)) != len(result_lines):
        raise CircuitError("duplicate result line")
    w = circuit.width
    copies = [CNOT(r, w + k) for k, r in enumerate(result_lines)]
    gates = circuit.gates + tuple(copies) + invert(circuit).gates
    lines = circuit.lines + tuple(LineInfo(f"copy{k}", 0, result_out=True) for k in range(len(result_lines)))
    return Circuit(w + len(result_lines), gates, lines)


def random_circuit(rng: np.random.Generator, width: int, ngates: int, kinds: Sequence[str] | None = None) -> Circuit:
    """Random valid circuit, handy for property tests and fuzzing."""
    from .circuit import FREDKIN, NOT, SWAP, TOFFOLI

    if kinds is None:
        kinds = ["NOT", "CNOT", "TOFFOLI", "SWAP", "FREDKIN"]
    kinds = [k for k in kinds if {"NOT": 1, "CNOT": 2, "TOFFOLI": 3, "SWAP": 2, "FREDKIN": 3}[k] <= width]
    gates = []
    for _ in range(ngates):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "NOT":
            gates.append(NOT(int(rng.integers(width))))
        elif kind == "CNOT":
            c, t = rng.choice(width, 2, replace=False)
            gates.append(CNOT(int(c), int(t)))
        elif kind == "SWAP":
            a, b = rng.choice(width, 2, replace=False)
            gates.append(SWAP(int(a), int(b)))
        elif kind == "TOFFOLI":
            k = int(rng.integers(3, width + 1))
            lines = [int(x) for x in rng.choice(width, k, replace=False)]
            gates.append(TOFFOLI(lines[:-1], lines[-1]))
        else:
            k = int(rng.integers(3, width + 1))
            lines = [int(x) for x in rng.choice(width, k, replace=False)]
            gates.append(FREDKIN(lines[:-2], lines[-2], lines[-1]))
    return Circuit(width, tuple(gates))
