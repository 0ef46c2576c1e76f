"""Two-pass assembler, disassembler and flat binary images.

Operands are registers ``r0``..``r7`` and integers. A label used as an
immediate is its address. As a branch offset, ``LABEL`` is the offset that
jumps onto ``LABEL``, and ``~LABEL`` is the offset that cancels the one
taken by the branch at ``LABEL``, i.e. the landing half of a branch pair.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Sequence

import numpy as np

from .isa import (
    COND_OPS,
    NULLARY_OPS,
    RI_OPS,
    RR_OPS,
    EncodingError,
    Instruction,
    Op,
    WORD_MASK,
    decode,
    encode,
)
from .machine import MEM_WORDS


class AsmError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


_LABEL_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*:")
_REG_RE = re.compile(r"^[rR]([0-9]+)$")


def _strip(line: str) -> str:
    return line.split(";", 1)[0].strip()


def _split(line: str) -> tuple[list[str], str]:
    labels = []
    while True:
        m = _LABEL_RE.match(line)
        if not m:
            return labels, line
        labels.append(m.group(1).lower())
        line = line[m.end():].strip()


def _reg(tok: str, lineno: int) -> int:
    m = _REG_RE.match(tok)
    if not m or int(m.group(1)) > 7:
        raise AsmError(f"expected a register r0..r7, got {tok!r}", lineno)
    return int(m.group(1))


def _value(tok: str, labels: dict[str, int], lineno: int, pc: int | None = None) -> int:
    try:
        return int(tok, 0)
    except ValueError:
        pass
    neg = tok.startswith("-")
    name = tok[1:] if neg else tok
    pair = name.startswith("~")
    name = name[1:].lower() if pair else name.lower()
    if name not in labels:
        raise AsmError(f"undefined label {name!r}", lineno)
    if pc is None:
        val = labels[name]
    else:
        val = labels[name] - pc + 1 if pair else labels[name] - pc - 1
    return -val if neg else val


def _arity(op: Op) -> int:
    if op in RR_OPS or op in RI_OPS:
        return 2
    if op in COND_OPS:
        return 3
    if op in NULLARY_OPS:
        return 0
    return 1


def _instruction(mnemonic: str, args: list[str], labels, pc: int, lineno: int) -> Instruction:
    try:
        op = Op[mnemonic.upper()]
    except KeyError:
        raise AsmError(f"unknown mnemonic {mnemonic!r}", lineno) from None
    if len(args) != _arity(op):
        raise AsmError(f"{op.name.lower()} takes {_arity(op)} operand(s), got {len(args)}", lineno)
    try:
        if op in RR_OPS:
            return Instruction(op, _reg(args[0], lineno), _reg(args[1], lineno))
        if op in RI_OPS:
            return Instruction(op, _reg(args[0], lineno), 0, _value(args[1], labels, lineno))
        if op is Op.NEG:
            return Instruction(op, _reg(args[0], lineno))
        if op is Op.BRA:
            return Instruction(op, 0, 0, _value(args[0], labels, lineno, pc))
        if op in COND_OPS:
            return Instruction(op, _reg(args[0], lineno), _reg(args[1], lineno),
                               _value(args[2], labels, lineno, pc))
        return Instruction(op)
    except EncodingError as exc:
        raise AsmError(str(exc), lineno) from None


def assemble(source: str) -> np.ndarray:
    """Assemble to an array of 16-bit words starting at address 0."""
    lines = []
    labels: dict[str, int] = {}
    addr = 0
    for lineno, raw in enumerate(source.splitlines(), start=1):
        names, body = _split(_strip(raw))
        for nm in names:
            if nm in labels:
                raise AsmError(f"duplicate label {nm!r}", lineno)
            labels[nm] = addr
        if body:
            lines.append((lineno, addr, body))
            addr += 1
    if addr > MEM_WORDS:
        raise AsmError(f"program of {addr} words exceeds memory")
    words = np.zeros(addr, dtype=np.uint16)
    for lineno, pc, body in lines:
        tok = body.replace(",", " ").split()
        if tok[0].lower() == ".word":
            if len(tok) != 2:
                raise AsmError(".word takes one value", lineno)
            val = _value(tok[1], labels, lineno)
            if not -0x8000 <= val <= WORD_MASK:
                raise AsmError(f"word {val} does not fit 16 bits", lineno)
            words[pc] = val & WORD_MASK
        else:
            words[pc] = encode(_instruction(tok[0], tok[1:], labels, pc, lineno))
    return words


def disassemble(image: Sequence[int] | np.ndarray) -> str:
    """Canonical text, one line per word; words that are not instructions become ``.word``."""
    out = []
    for w in np.asarray(image, dtype=np.int64):
        ins = decode(int(w))
        out.append(str(ins) if ins is not None else f".word {int(w) & WORD_MASK}")
    return "".join(line + "\n" for line in out)


def save_image(path: str | Path, words: Sequence[int] | np.ndarray) -> None:
    Path(path).write_bytes(np.asarray(words, dtype="<u2").tobytes())


def load_image(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) % 2:
        raise ValueError(f"{path}: image has an odd number of bytes")
    if len(data) // 2 > MEM_WORDS:
        raise ValueError(f"{path}: image exceeds {MEM_WORDS} words")
    return np.frombuffer(data, dtype="<u2").astype(np.uint16)
