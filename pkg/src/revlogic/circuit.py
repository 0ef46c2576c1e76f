"""Gate-level IR for reversible circuits.

Lines are indexed from 0. When lines form a numeric bus, line 0 of the bus is
the least significant bit and a state's pattern index is ``sum(bit_i << i)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence


class GateKind(str, Enum):
    NOT = "NOT"
    CNOT = "CNOT"
    TOFFOLI = "TOFFOLI"
    FREDKIN = "FREDKIN"
    SWAP = "SWAP"


CONTROLLED_NOT_KINDS = frozenset({GateKind.NOT, GateKind.CNOT, GateKind.TOFFOLI})
SWAP_KINDS = frozenset({GateKind.SWAP, GateKind.FREDKIN})


class CircuitError(ValueError):
    """Raised for structurally invalid circuits or mismatched compositions."""


@dataclass(frozen=True, order=True)
class Gate:
    kind: GateKind
    controls: tuple[int, ...]
    targets: tuple[int, ...]

    def __init__(self, kind: GateKind | str, controls: Iterable[int] = (), targets: Iterable[int] = ()):
        object.__setattr__(self, "kind", GateKind(kind))
        # controls are a set semantically; store sorted for structural equality
        object.__setattr__(self, "controls", tuple(sorted(controls)))
        object.__setattr__(self, "targets", tuple(targets))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.controls) | frozenset(self.targets)

    @property
    def is_controlled_not(self) -> bool:
        return self.kind in CONTROLLED_NOT_KINDS

    def shifted(self, offset: int) -> "Gate":
        return Gate(self.kind, (c + offset for c in self.controls), (t + offset for t in self.targets))

    def remapped(self, mapping: Sequence[int]) -> "Gate":
        return Gate(self.kind, (mapping[c] for c in self.controls), (mapping[t] for t in self.targets))

    def __repr__(self) -> str:
        ctl = ",".join(map(str, self.controls))
        tgt = ",".join(map(str, self.targets))
        if not self.controls:
            return f"{self.kind.value}({tgt})"
        return f"{self.kind.value}({{{ctl}}};{tgt})"


def NOT(t: int) -> Gate:
    return Gate(GateKind.NOT, (), (t,))


def CNOT(c: int, t: int) -> Gate:
    return Gate(GateKind.CNOT, (c,), (t,))


def TOFFOLI(controls: Iterable[int], t: int) -> Gate:
    return Gate(GateKind.TOFFOLI, controls, (t,))


def SWAP(t1: int, t2: int) -> Gate:
    return Gate(GateKind.SWAP, (), (t1, t2))


def FREDKIN(controls: Iterable[int], t1: int, t2: int) -> Gate:
    return Gate(GateKind.FREDKIN, controls, (t1, t2))


def mcx(controls: Iterable[int], target: int) -> Gate:
    """Controlled-not with any number of controls, picking the matching kind."""
    controls = tuple(controls)
    if not controls:
        return NOT(target)
    if len(controls) == 1:
        return CNOT(controls[0], target)
    return TOFFOLI(controls, target)


def cswap(controls: Iterable[int], t1: int, t2: int) -> Gate:
    controls = tuple(controls)
    if not controls:
        return SWAP(t1, t2)
    return FREDKIN(controls, t1, t2)


@dataclass(frozen=True)
class LineInfo:
    name: str
    constant_in: int | None = None
    garbage_out: bool = False
    # a constant input whose output carries a result (e.g. a Bennett copy
    # line) rather than an ancilla that must be restored
    result_out: bool = False


def default_line_name(i: int) -> str:
    return chr(ord("a") + i) if i < 26 else f"x{i}"


@dataclass(frozen=True)
class Circuit:
    """Immutable fixed-width gate netlist.

    ``lines`` carries per-line metadata; annotations never change simulation,
    they only tell the verifiers which inputs are constants and which outputs
    are allowed to be garbage.
    """

    width: int
    gates: tuple[Gate, ...] = ()
    lines: tuple[LineInfo, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.lines:
            object.__setattr__(self, "lines", tuple(LineInfo(default_line_name(i)) for i in range(self.width)))
        else:
            object.__setattr__(self, "lines", tuple(self.lines))
        if len(self.lines) != self.width:
            raise CircuitError(f"{len(self.lines)} line records for width {self.width}")

    @classmethod
    def from_gates(cls, width: int, gates: Iterable[Gate], **annotations) -> "Circuit":
        names = annotations.pop("names", None)
        constants = annotations.pop("constants", None) or {}
        garbage = set(annotations.pop("garbage", None) or ())
        if annotations:
            raise TypeError(f"unknown annotations {sorted(annotations)}")
        lines = []
        for i in range(width):
            name = names[i] if names is not None else default_line_name(i)
            lines.append(LineInfo(name, constants.get(i), i in garbage))
        return cls(width, tuple(gates), tuple(lines))

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def ancilla_lines(self) -> list[int]:
        return [i for i, ln in enumerate(self.lines) if ln.constant_in is not None]

    @property
    def restored_lines(self) -> list[int]:
        """Constant lines that a garbage-free run must return to their constant."""
        return [i for i, ln in enumerate(self.lines) if ln.constant_in is not None and not ln.result_out]

    @property
    def garbage_lines(self) -> list[int]:
        return [i for i, ln in enumerate(self.lines) if ln.garbage_out]

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return replace(self, gates=tuple(gates))


@dataclass(frozen=True)
class CircuitStats:
    gate_count: int
    width: int
    ancilla_count: int
    garbage_count: int
    depth: int


_ARITY_RULES = {
    GateKind.NOT: (0, 0, 1),
    GateKind.CNOT: (1, 1, 1),
    GateKind.TOFFOLI: (2, None, 1),
    GateKind.SWAP: (0, 0, 2),
    GateKind.FREDKIN: (1, None, 2),
}


def validate_gate(gate: Gate, width: int | None = None, index: int = 0) -> list[str]:
    diags = []
    lo, hi, ntargets = _ARITY_RULES[gate.kind]
    nc = len(gate.controls)
    if nc < lo or (hi is not None and nc > hi) or len(gate.targets) != ntargets:
        diags.append(f"arity: {gate.kind.value} with {nc} controls and {len(gate.targets)} targets at gate {index}")
    if len(set(gate.controls)) != nc or len(set(gate.targets)) != len(gate.targets):
        diags.append(f"duplicate line at gate {index}")
    if set(gate.controls) & set(gate.targets):
        diags.append(f"control/target overlap at gate {index}")
    for line in gate.support:
        if line < 0 or (width is not None and line >= width):
            diags.append(f"line {line} out of range at gate {index}")
    return diags


def validate(circuit: Circuit) -> list[str]:
    """Return diagnostics for every broken invariant; empty means valid."""
    diags: list[str] = []
    if circuit.width < 0:
        diags.append("negative width")
    for i, ln in enumerate(circuit.lines):
        if ln.constant_in not in (None, 0, 1):
            diags.append(f"constant on line {i} must be 0 or 1")
        if ln.result_out and ln.constant_in is None:
            diags.append(f"result flag on line {i} without a constant input")
    for i, g in enumerate(circuit.gates):
        diags.extend(validate_gate(g, circuit.width, i))
    return diags


def check_valid(circuit: Circuit) -> None:
    diags = validate(circuit)
    if diags:
        raise CircuitError("; ".join(diags))


def invert(circuit: Circuit) -> Circuit:
    """Reverse the gate order. Every primitive here is self-inverse.

    Line annotations are kept: a constant line of a garbage-free circuit is
    both an input constant and a restored output, so it reads the same in
    either direction.
    """
    check_valid(circuit)
    return circuit.with_gates(reversed(circuit.gates))


def concat(c1: Circuit, c2: Circuit) -> Circuit:
    if c1.width != c2.width:
        raise CircuitError(f"width mismatch: {c1.width} vs {c2.width}")
    return c1.with_gates(c1.gates + c2.gates)


def unique_names(names: Sequence[str]) -> list[str]:
    """Keep names that are already unique; rename later repeats to ``name_i``."""
    taken = set()
    out = []
    for i, nm in enumerate(names):
        cand = nm
        while cand in taken:
            cand = f"{nm}_{i}" if cand == nm else cand + "_"
        taken.add(cand)
        out.append(cand)
    return out


def parallel(c1: Circuit, c2: Circuit) -> Circuit:
    off = c1.width
    gates = c1.gates + tuple(g.shifted(off) for g in c2.gates)
    lines = c1.lines + c2.lines
    names = unique_names([ln.name for ln in lines])
    lines = tuple(replace(ln, name=nm) for ln, nm in zip(lines, names))
    return Circuit(c1.width + c2.width, gates, lines)


def gate_layers(circuit: Circuit) -> list[int]:
    """Greedy left-to-right layer index (0-based) of each gate."""
    last = [-1] * circuit.width
    layers = []
    for g in circuit.gates:
        layer = max((last[ln] for ln in g.support), default=-1) + 1
        for ln in g.support:
            last[ln] = layer
        layers.append(layer)
    return layers


def depth(circuit: Circuit) -> int:
    layers = gate_layers(circuit)
    return max(layers) + 1 if layers else 0


def stats(circuit: Circuit) -> CircuitStats:
    return CircuitStats(
        gate_count=len(circuit.gates),
        width=circuit.width,
        ancilla_count=len(circuit.ancilla_lines),
        garbage_count=len(circuit.garbage_lines),
        depth=depth(circuit),
    )
