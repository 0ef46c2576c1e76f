"""Integer linear transforms as sequences of reversible lifting steps.

Buses are ``n``-bit two's complement words; every step updates a single bus
from another one, so it stays bijective whatever the multiplying constant.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .arith import add_gates, increment_gates
from .circuit import CNOT, NOT, SWAP, Circuit, Gate, LineInfo


@dataclass(frozen=True)
class AddShift:
    """``x[dst] += sign * (x[src] << shift)`` modulo ``2^n``."""
    dst: int
    src: int
    shift: int = 0
    sign: int = 1


@dataclass(frozen=True)
class AddShiftDown:
    """``x[dst] += sign * floor(x[src] / 2^shift)`` with ``x[src]`` read as signed."""
    dst: int
    src: int
    shift: int = 0
    sign: int = 1


@dataclass(frozen=True)
class SwapBus:
    i: int
    j: int


@dataclass(frozen=True)
class NegateBus:
    i: int


LiftStep = Union[AddShift, AddShiftDown, SwapBus, NegateBus]


@dataclass(frozen=True)
class TransformSpec:
    buses: int
    n: int
    steps: tuple[LiftStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        errs = spec_errors(self)
        if errs:
            raise ValueError("; ".join(errs))


def spec_errors(spec: TransformSpec) -> list[str]:
    errs = []
    if spec.buses < 1 or spec.n < 1:
        errs.append("need at least one bus of at least one bit")
    for idx, st in enumerate(spec.steps):
        used = [getattr(st, f) for f in ("dst", "src", "i", "j") if hasattr(st, f)]
        if any(not 0 <= b < spec.buses for b in used):
            errs.append(f"step {idx}: bus index out of range")
        if isinstance(st, (AddShift, AddShiftDown)):
            if st.dst == st.src:
                errs.append(f"step {idx}: dst == src")
            if st.shift < 0:
                errs.append(f"step {idx}: negative shift")
            if st.sign not in (1, -1):
                errs.append(f"step {idx}: sign must be +1 or -1")
        if isinstance(st, SwapBus) and st.i == st.j:
            errs.append(f"step {idx}: swap of a bus with itself")
    return errs


@dataclass(frozen=True)
class LiftLayout:
    n: int
    bus_lines: tuple[tuple[int, ...], ...]
    carry_line: int | None
    pad_lines: tuple[int, ...]


def _layout(m: int, n: int, steps: Sequence[LiftStep]) -> LiftLayout:
    buses = tuple(tuple(range(j * n, (j + 1) * n)) for j in range(m))
    nxt = m * n
    carry = None
    if any(isinstance(s, (AddShift, AddShiftDown)) for s in steps) and n >= 2:
        carry = nxt
        nxt += 1
    npad = max((min(s.shift, n) for s in steps if isinstance(s, AddShiftDown)), default=0)
    return LiftLayout(n, buses, carry, tuple(range(nxt, nxt + npad)))


def _step_gates(step: LiftStep, lay: LiftLayout) -> list[Gate]:
    n = lay.n
    B = lay.bus_lines
    if isinstance(step, SwapBus):
        return [SWAP(x, y) for x, y in zip(B[step.i], B[step.j])]
    if isinstance(step, NegateBus):
        x = B[step.i]
        return [NOT(b) for b in x] + increment_gates(x)
    if isinstance(step, AddShift):
        if step.shift >= n:
            return []
        src = B[step.src][: n - step.shift]
        dst = B[step.dst][step.shift:]
        gates = add_gates(src, dst, lay.carry_line if len(src) > 1 else None)
        return gates if step.sign > 0 else gates[::-1]
    if isinstance(step, AddShiftDown):
        s = min(step.shift, n)
        xs = B[step.src]
        pads = lay.pad_lines[:s]
        fanout = [CNOT(xs[-1], p) for p in pads]
        src = list(xs[s:]) + list(pads)
        gates = add_gates(src, B[step.dst], lay.carry_line if n > 1 else None)
        if step.sign < 0:
            gates = gates[::-1]
        return fanout + gates + fanout[::-1]
    raise TypeError(f"unknown lifting step {step!r}")


def _circuit(spec: TransformSpec, steps: Sequence[LiftStep]) -> tuple[Circuit, LiftLayout]:
    lay = _layout(spec.buses, spec.n, spec.steps)
    gates: list[Gate] = []
    for st in steps:
        gates += _step_gates(st, lay)
    names = [f"x{j}_{i}" for j in range(spec.buses) for i in range(spec.n)]
    lines = [LineInfo(nm) for nm in names]
    if lay.carry_line is not None:
        lines.append(LineInfo("c", 0))
    lines += [LineInfo(f"pad{i}", 0) for i in range(len(lay.pad_lines))]
    return Circuit(len(lines), tuple(gates), tuple(lines)), lay


def gen_lift_step(step: LiftStep, n: int, m: int) -> Circuit:
    spec = TransformSpec(m, n, (step,))
    return _circuit(spec, spec.steps)[0]


def gen_transform(spec: TransformSpec) -> Circuit:
    """Concatenate the step circuits on a shared layout (one carry, shared padding)."""
    return _circuit(spec, spec.steps)[0]


def lift_layout(spec: TransformSpec) -> LiftLayout:
    return _layout(spec.buses, spec.n, spec.steps)


# -- integer reference -----------------------------------------------------

def _signed(x, n):
    x = np.asarray(x, dtype=np.int64)
    return np.where(x >= 1 << (n - 1), x - (1 << n), x)


def apply_steps(spec: TransformSpec, values: Sequence, inverse: bool = False) -> list[np.ndarray]:
    """Run the steps on integer bus values (arrays of unsigned words)."""
    n = spec.n
    mask = (1 << n) - 1
    x = [np.asarray(v, dtype=np.int64) & mask for v in values]
    steps = reversed(spec.steps) if inverse else spec.steps
    for st in steps:
        sgn = -1 if inverse else 1
        if isinstance(st, SwapBus):
            x[st.i], x[st.j] = x[st.j], x[st.i]
        elif isinstance(st, NegateBus):
            x[st.i] = (-x[st.i]) & mask
        elif isinstance(st, AddShift):
            x[st.dst] = (x[st.dst] + sgn * st.sign * (x[st.src] << min(st.shift, 63))) & mask
        elif isinstance(st, AddShiftDown):
            x[st.dst] = (x[st.dst] + sgn * st.sign * (_signed(x[st.src], n) >> min(st.shift, 63))) & mask
    return x


# -- text format -----------------------------------------------------------

def _parse_sign(tok: str, lineno: int) -> int:
    if tok in ("+", "+1", "1"):
        return 1
    if tok in ("-", "-1"):
        return -1
    raise ValueError(f"line {lineno}: bad sign {tok!r}")


def parse_spec(text: str) -> TransformSpec:
    """Parse ``buses M bits N`` followed by one step per line."""
    header = None
    steps: list[LiftStep] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        op = tok[0].lower()
        try:
            if header is None:
                if len(tok) != 4 or op != "buses" or tok[2].lower() != "bits":
                    raise ValueError(f"line {lineno}: expected header 'buses M bits N'")
                header = (int(tok[1]), int(tok[3]))
            elif op in ("addshift", "addshiftdown"):
                if len(tok) != 5:
                    raise ValueError(f"line {lineno}: {op} takes dst src shift sign")
                cls = AddShift if op == "addshift" else AddShiftDown
                steps.append(cls(int(tok[1]), int(tok[2]), int(tok[3]), _parse_sign(tok[4], lineno)))
            elif op == "swap" and len(tok) == 3:
                steps.append(SwapBus(int(tok[1]), int(tok[2])))
            elif op == "neg" and len(tok) == 2:
                steps.append(NegateBus(int(tok[1])))
            else:
                raise ValueError(f"line {lineno}: unknown step {line!r}")
        except ValueError as exc:
            if str(exc).startswith("line"):
                raise
            raise ValueError(f"line {lineno}: {exc}") from None
    if header is None:
        raise ValueError("missing 'buses M bits N' header")
    return TransformSpec(header[0], header[1], tuple(steps))


def format_spec(spec: TransformSpec) -> str:
    out = [f"buses {spec.buses} bits {spec.n}"]
    for st in spec.steps:
        if isinstance(st, SwapBus):
            out.append(f"swap {st.i} {st.j}")
        elif isinstance(st, NegateBus):
            out.append(f"neg {st.i}")
        else:
            op = "addshift" if isinstance(st, AddShift) else "addshiftdown"
            out.append(f"{op} {st.dst} {st.src} {st.shift} {'+' if st.sign > 0 else '-'}")
    return "\n".join(out) + "\n"


S_TRANSFORM = (AddShift(1, 0, 0, -1), AddShiftDown(0, 1, 1, 1))


def s_transform(n: int) -> TransformSpec:
    """Integer Haar (S) transform: ``d = b - a``, ``s = a + floor(d / 2)``."""
    return TransformSpec(2, n, S_TRANSFORM)
