"""Reversible two-address machine: instruction set, emulator and assembler."""
from importlib import resources

from .asm import AsmError, assemble, disassemble, load_image, save_image
from .isa import EncodingError, Instruction, Op, decode, encode, inverse_instruction
from .machine import MEM_WORDS, MachineState, Trap, flip, load, run, run_backward, step

PROGRAMS = ("triangle", "fib", "memswap")


def program_source(name: str) -> str:
    """Source text of a bundled example program."""
    if name not in PROGRAMS:
        raise KeyError(f"no bundled program {name!r}")
    return resources.files(__package__).joinpath("programs", f"{name}.s").read_text()


__all__ = [
    "AsmError", "EncodingError", "Instruction", "MEM_WORDS", "MachineState", "Op", "PROGRAMS", "Trap",
    "assemble", "decode", "disassemble", "encode", "flip", "inverse_instruction", "load", "load_image",
    "program_source", "run", "run_backward", "save_image", "step",
]
