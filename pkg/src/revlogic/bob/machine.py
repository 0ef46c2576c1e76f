"""Emulator for the reversible two-address machine.

The program counter is never written by an instruction. Every step executes
the instruction at ``pc`` (its inverse when running backwards), which may
only touch registers, memory, the branch register ``br`` and the direction
``dir``; then ``pc`` advances by ``dir * br``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .isa import (
    BRANCH_OPS,
    NREGS,
    WORD_MASK,
    Instruction,
    Op,
    decode,
    inverse_instruction,
)

MEM_WORDS = 4096


class Trap(RuntimeError):
    def __init__(self, reason: str, state: "MachineState"):
        super().__init__(f"{reason} at pc={state.pc}")
        self.reason = reason
        self.state = state


@dataclass(frozen=True, eq=False)
class MachineState:
    pc: int = 0
    br: int = 1
    dir: int = 1
    regs: tuple[int, ...] = (0,) * NREGS
    mem: np.ndarray = field(default_factory=lambda: np.zeros(MEM_WORDS, dtype=np.uint16))
    steps: int = 0
    halted: bool = False

    def __post_init__(self):
        mem = np.asarray(self.mem, dtype=np.uint16)
        if mem.shape != (MEM_WORDS,):
            raise ValueError(f"memory must hold {MEM_WORDS} words")
        if mem.flags.writeable:
            mem = mem.copy()
            mem.setflags(write=False)
        object.__setattr__(self, "mem", mem)
        regs = tuple(int(r) & WORD_MASK for r in self.regs)
        if len(regs) != NREGS:
            raise ValueError(f"need {NREGS} registers")
        object.__setattr__(self, "regs", regs)
        if self.dir not in (1, -1):
            raise ValueError("dir must be +1 or -1")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MachineState):
            return NotImplemented
        return (self.machine_view() == other.machine_view()) and bool(np.array_equal(self.mem, other.mem))

    def machine_view(self) -> tuple:
        """Everything but memory and the step counter."""
        return (self.pc, self.br, self.dir, self.regs, self.halted)

    __hash__ = None

    def with_regs(self, **assign: int) -> "MachineState":
        regs = list(self.regs)
        for name, val in assign.items():
            regs[int(name.lstrip("rR"))] = val
        return dataclasses.replace(self, regs=tuple(regs))


def load(image: Sequence[int] | np.ndarray, regs: Sequence[int] | None = None, pc: int = 0) -> MachineState:
    image = np.asarray(image, dtype=np.int64)
    if len(image) > MEM_WORDS:
        raise ValueError(f"image of {len(image)} words exceeds memory")
    mem = np.zeros(MEM_WORDS, dtype=np.uint16)
    mem[: len(image)] = image & WORD_MASK
    return MachineState(pc=pc, regs=tuple(regs) if regs is not None else (0,) * NREGS, mem=mem)


def effective_instruction(s: MachineState) -> Instruction | None:
    ins = decode(int(s.mem[s.pc]))
    if ins is None or s.dir > 0:
        return ins
    return inverse_instruction(ins)


def step(s: MachineState) -> MachineState:
    """One machine step; raises :class:`Trap` instead of entering a bad state."""
    if s.halted:
        raise Trap("halted", s)
    if not 0 <= s.pc < MEM_WORDS:
        raise Trap("pc out of range", s)
    ins = effective_instruction(s)
    if ins is None:
        raise Trap("illegal instruction", s)
    op = ins.op
    if op is Op.HALT:
        return dataclasses.replace(s, halted=True, steps=s.steps + 1)

    regs = list(s.regs)
    mem = s.mem
    br, dirn = s.br, s.dir
    rd, rs = ins.rd, ins.rs
    if op is Op.ADD:
        regs[rd] = (regs[rd] + regs[rs]) & WORD_MASK
    elif op is Op.SUB:
        regs[rd] = (regs[rd] - regs[rs]) & WORD_MASK
    elif op is Op.XOR:
        regs[rd] ^= regs[rs]
    elif op is Op.ADDI:
        regs[rd] = (regs[rd] + ins.imm) & WORD_MASK
    elif op is Op.XORI:
        regs[rd] ^= ins.imm & WORD_MASK
    elif op is Op.NEG:
        regs[rd] = -regs[rd] & WORD_MASK
    elif op is Op.SWAPR:
        regs[rd], regs[rs] = regs[rs], regs[rd]
    elif op is Op.EXCH:
        addr = regs[rs] % MEM_WORDS
        # rewriting the instruction being executed would make the step
        # impossible to undo, since the inverse could no longer be decoded
        if addr == s.pc:
            raise Trap("self-overwrite", s)
        mem = mem.copy()
        regs[rd], mem[addr] = int(mem[addr]), regs[rd]
        mem.setflags(write=False)
    elif op is Op.BRA:
        br += ins.imm
    elif op is Op.BEQ:
        if regs[rd] == regs[rs]:
            br += ins.imm
    elif op is Op.BNE:
        if regs[rd] != regs[rs]:
            br += ins.imm
    elif op is Op.FLIP:
        dirn = -dirn

    if br == 0:
        raise Trap("stuck", s)
    # an out-of-range pc traps on the next fetch; undoing a run that began at
    # address 0 must be able to finish on pc = -1 before flipping back
    pc = s.pc + dirn * br
    return MachineState(pc, br, dirn, tuple(regs), mem, s.steps + 1, False)


def flip(s: MachineState) -> MachineState:
    """Turn the machine around so that subsequent steps retrace the past.

    This is the same move a FLIP instruction makes: the direction is negated
    and the program counter steps back by ``br`` onto the instruction that
    executed last. ``step(flip(step(s))) == flip(s)`` and ``flip`` is an
    involution, so ``flip``, N steps, ``flip`` undoes N steps.
    """
    if s.halted:
        raise Trap("halted", s)
    return dataclasses.replace(s, pc=s.pc - s.dir * s.br, dir=-s.dir)


def run(s: MachineState, max_steps: int, check_pairing: bool = False) -> tuple[MachineState, str]:
    """Step until HALT, a trap, or the budget; returns the last good state and why it stopped.

    With ``check_pairing`` a step that starts a non-branch instruction with
    ``br != 1`` traps as ``"unpaired branch"``.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    for _ in range(max_steps):
        if check_pairing and s.br != 1 and 0 <= s.pc < MEM_WORDS:
            ins = decode(int(s.mem[s.pc]))
            if ins is not None and ins.op not in BRANCH_OPS:
                return s, "trap: unpaired branch"
        try:
            s = step(s)
        except Trap as t:
            return s, f"trap: {t.reason}"
        if s.halted:
            return s, "halt"
    return s, "budget"


def run_backward(s: MachineState, nsteps: int) -> MachineState:
    """Undo ``nsteps`` steps of a forward run ending in ``s``.

    A final HALT only froze the machine, so undoing it just thaws the state.
    """
    if s.halted:
        if nsteps < 1:
            raise ValueError("a halted state took at least one step")
        s = dataclasses.replace(s, halted=False, steps=s.steps - 1)
        nsteps -= 1
    back, reason = run(flip(s), nsteps)
    if reason != "budget":
        raise Trap(f"reverse run stopped early ({reason})", back)
    return flip(back)
