"""Instruction set of the reversible machine and its 16-bit word encoding.

Layout, most significant nibble first::

    op(4) rd(3) rs(3) ------(6)          ADD SUB XOR SWAPR EXCH
    op(4) rd(3) -(1) imm8                ADDI XORI
    op(4) rd(3) ---------(9)             NEG
    op(4) ----(4) off8                   BRA
    op(4) rd(3) rs(3) off6               BEQ BNE
    op(4) ------------(12)               HALT FLIP

Immediates and offsets are two's complement and symmetric (the most
negative code is rejected) so that every instruction's inverse encodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache


class Op(IntEnum):
    HALT = 0
    ADD = 1
    SUB = 2
    XOR = 3
    ADDI = 4
    XORI = 5
    NEG = 6
    SWAPR = 7
    EXCH = 8
    BRA = 9
    BEQ = 10
    BNE = 11
    FLIP = 12


NREGS = 8
IMM_MAX = 127
COND_OFF_MAX = 31
WORD_MASK = 0xFFFF

RR_OPS = {Op.ADD, Op.SUB, Op.XOR, Op.SWAPR, Op.EXCH}
RI_OPS = {Op.ADDI, Op.XORI}
COND_OPS = {Op.BEQ, Op.BNE}
BRANCH_OPS = {Op.BRA, Op.BEQ, Op.BNE}
NULLARY_OPS = {Op.HALT, Op.FLIP}


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    op: Op
    rd: int = 0
    rs: int = 0
    imm: int = 0  # immediate or branch offset

    def __post_init__(self):
        errs = instruction_errors(self)
        if errs:
            raise EncodingError(f"{self.op.name}: {errs[0]}")

    def __str__(self) -> str:
        name = self.op.name.lower()
        if self.op in RR_OPS:
            return f"{name} r{self.rd} r{self.rs}"
        if self.op in RI_OPS:
            return f"{name} r{self.rd} {self.imm}"
        if self.op is Op.NEG:
            return f"{name} r{self.rd}"
        if self.op is Op.BRA:
            return f"{name} {self.imm}"
        if self.op in COND_OPS:
            return f"{name} r{self.rd} r{self.rs} {self.imm}"
        return name

    @property
    def is_branch(self) -> bool:
        return self.op in BRANCH_OPS


def instruction_errors(ins: Instruction) -> list[str]:
    errs = []
    uses_rd = ins.op not in NULLARY_OPS and ins.op is not Op.BRA
    uses_rs = ins.op in RR_OPS or ins.op in COND_OPS
    for name, val, used in (("rd", ins.rd, uses_rd), ("rs", ins.rs, uses_rs)):
        if used and not 0 <= val < NREGS:
            errs.append(f"register {name}={val} out of range 0..{NREGS - 1}")
        if not used and val != 0:
            errs.append(f"unused operand {name}={val}")
    if ins.op in RR_OPS and ins.rd == ins.rs:
        errs.append("the two registers must differ")
    if ins.op in RI_OPS or ins.op is Op.BRA:
        if not -IMM_MAX <= ins.imm <= IMM_MAX:
            errs.append(f"immediate {ins.imm} outside -{IMM_MAX}..{IMM_MAX}")
    elif ins.op in COND_OPS:
        if not -COND_OFF_MAX <= ins.imm <= COND_OFF_MAX:
            errs.append(f"offset {ins.imm} outside -{COND_OFF_MAX}..{COND_OFF_MAX}")
    elif ins.imm != 0:
        errs.append("unexpected immediate")
    return errs


def inverse_instruction(ins: Instruction) -> Instruction:
    if ins.op is Op.ADD:
        return Instruction(Op.SUB, ins.rd, ins.rs)
    if ins.op is Op.SUB:
        return Instruction(Op.ADD, ins.rd, ins.rs)
    if ins.op is Op.ADDI or ins.is_branch:
        return Instruction(ins.op, ins.rd, ins.rs, -ins.imm)
    return ins


def _field(value: int, bits: int) -> int:
    return value & ((1 << bits) - 1)


def _signed(value: int, bits: int) -> int:
    return value - (1 << bits) if value >> (bits - 1) & 1 else value


def encode(ins: Instruction) -> int:
    w = int(ins.op) << 12
    if ins.op in RR_OPS:
        w |= ins.rd << 9 | ins.rs << 6
    elif ins.op in RI_OPS:
        w |= ins.rd << 9 | _field(ins.imm, 8)
    elif ins.op is Op.NEG:
        w |= ins.rd << 9
    elif ins.op is Op.BRA:
        w |= _field(ins.imm, 8)
    elif ins.op in COND_OPS:
        w |= ins.rd << 9 | ins.rs << 6 | _field(ins.imm, 6)
    return w


@lru_cache(maxsize=1 << 16)
def decode(word: int) -> Instruction | None:
    """Instruction for a canonical encoding, ``None`` for anything else."""
    word &= WORD_MASK
    try:
        op = Op(word >> 12)
    except ValueError:
        return None
    rd, rs = word >> 9 & 7, word >> 6 & 7
    try:
        if op in RR_OPS:
            ins = Instruction(op, rd, rs)
        elif op in RI_OPS:
            ins = Instruction(op, rd, 0, _signed(word & 0xFF, 8))
        elif op is Op.NEG:
            ins = Instruction(op, rd)
        elif op is Op.BRA:
            ins = Instruction(op, 0, 0, _signed(word & 0xFF, 8))
        elif op in COND_OPS:
            ins = Instruction(op, rd, rs, _signed(word & 0x3F, 6))
        else:
            ins = Instruction(op)
    except EncodingError:
        return None
    return ins if encode(ins) == word else None
