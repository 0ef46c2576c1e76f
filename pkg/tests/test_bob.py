import dataclasses

import numpy as np
import pytest

from revlogic.bob import (
    MEM_WORDS,
    PROGRAMS,
    AsmError,
    EncodingError,
    Instruction,
    MachineState,
    Op,
    Trap,
    assemble,
    decode,
    disassemble,
    encode,
    flip,
    inverse_instruction,
    load,
    load_image,
    program_source,
    run,
    run_backward,
    save_image,
    step,
)
from revlogic.bob.isa import BRANCH_OPS, COND_OFF_MAX, IMM_MAX, RI_OPS, RR_OPS


def random_instruction(rng) -> Instruction:
    op = Op(int(rng.integers(len(Op))))
    if op in RR_OPS:
        rd, rs = (int(x) for x in rng.choice(8, 2, replace=False))
        return Instruction(op, rd, rs)
    if op in RI_OPS:
        return Instruction(op, int(rng.integers(8)), 0, int(rng.integers(-IMM_MAX, IMM_MAX + 1)))
    if op is Op.NEG:
        return Instruction(op, int(rng.integers(8)))
    if op is Op.BRA:
        return Instruction(op, 0, 0, int(rng.integers(-IMM_MAX, IMM_MAX + 1)))
    if op in (Op.BEQ, Op.BNE):
        rd, rs = (int(x) for x in rng.integers(0, 8, 2))
        return Instruction(op, rd, rs, int(rng.integers(-COND_OFF_MAX, COND_OFF_MAX + 1)))
    return Instruction(op)


def all_instructions():
    for w in range(1 << 16):
        ins = decode(w)
        if ins is not None:
            yield ins


# -- instruction set ----------------------------------------------------------

def test_inverse_examples():
    assert inverse_instruction(Instruction(Op.ADD, 1, 2)) == Instruction(Op.SUB, 1, 2)
    assert inverse_instruction(Instruction(Op.BRA, 0, 0, 5)) == Instruction(Op.BRA, 0, 0, -5)
    assert inverse_instruction(Instruction(Op.ADDI, 3, 0, -7)) == Instruction(Op.ADDI, 3, 0, 7)
    assert inverse_instruction(Instruction(Op.BNE, 1, 2, 4)) == Instruction(Op.BNE, 1, 2, -4)
    for op in (Op.XOR, Op.SWAPR, Op.EXCH):
        assert inverse_instruction(Instruction(op, 1, 2)) == Instruction(op, 1, 2)
    for ins in (Instruction(Op.XORI, 1, 0, 9), Instruction(Op.NEG, 4), Instruction(Op.FLIP), Instruction(Op.HALT)):
        assert inverse_instruction(ins) == ins


def test_inverse_is_an_involution_and_encodable():
    for ins in all_instructions():
        inv = inverse_instruction(ins)
        assert inverse_instruction(inv) == ins
        assert decode(encode(inv)) == inv


def test_encoding_round_trip_is_exact():
    count = 0
    for w in range(1 << 16):
        ins = decode(w)
        if ins is not None:
            assert encode(ins) == w
            count += 1
    assert count > 10000


@pytest.mark.parametrize("args", [
    (Op.ADD, 1, 1), (Op.EXCH, 2, 2), (Op.ADDI, 1, 0, 128), (Op.BRA, 0, 0, -128),
    (Op.BEQ, 1, 2, 32), (Op.NEG, 8), (Op.HALT, 1), (Op.FLIP, 0, 0, 1),
])
def test_invalid_instructions(args):
    with pytest.raises(EncodingError):
        Instruction(*args)


def test_halt_is_word_zero():
    assert encode(Instruction(Op.HALT)) == 0


# -- stepping -----------------------------------------------------------------

def _machine(program: str, **regs) -> MachineState:
    return load(assemble(program)).with_regs(**regs)


def test_add_step():
    s = step(_machine("add r1 r2", r1=3, r2=4))
    assert s.regs[1] == 7 and s.pc == 1 and s.steps == 1


def test_data_effects():
    s = _machine("sub r1 r2\nxor r3 r1\naddi r4 -3\nxori r5 -1\nneg r6\nswapr r6 r7\n",
                 r1=3, r2=5, r3=6, r6=2, r7=9)
    s, _ = run(s, 6)
    assert s.regs[1:] == (0xFFFE, 5, 6 ^ 0xFFFE, 0xFFFD, 0xFFFF, 9, 0xFFFE)


def test_exch_swaps_with_memory():
    s = _machine("exch r1 r2\nhalt\n.word 77", r1=5, r2=2 + MEM_WORDS)
    s = step(s)
    assert s.regs[1] == 77 and int(s.mem[2]) == 5


def test_exch_refuses_to_overwrite_itself():
    with pytest.raises(Trap, match="self-overwrite"):
        step(_machine("exch r1 r2", r2=0))


def test_flip_turns_around():
    s = _machine("addi r1 1\naddi r1 1\nflip\n")
    s, _ = run(s, 3)
    assert s.dir == -1 and s.pc == 1 and s.regs[1] == 2
    s = step(s)
    assert s.regs[1] == 1 and s.pc == 0


def test_branch_pair():
    src = """
        addi r1 1
    a:  bra b
        addi r1 100      ; skipped
        addi r1 100      ; skipped
    b:  bra ~a
        addi r1 10
        halt
    """
    s0 = _machine(src)
    s = step(step(s0))
    assert s.pc == 4 and s.br == 3
    s = step(s)
    assert s.pc == 5 and s.br == 1
    s, reason = run(s0, 100, check_pairing=True)
    assert reason == "halt" and s.regs[1] == 11
    assert run_backward(s, s.steps) == s0


def test_traps():
    with pytest.raises(Trap, match="stuck"):
        step(_machine("bra -1"))
    with pytest.raises(Trap, match="illegal"):
        step(load([0xF000]))
    s = _machine("addi r1 1")
    s = dataclasses.replace(s, pc=-1)
    with pytest.raises(Trap, match="pc out of range"):
        step(s)
    halted = step(_machine("halt"))
    with pytest.raises(Trap, match="halted"):
        step(halted)
    with pytest.raises(Trap, match="halted"):
        flip(halted)


def test_halt_takes_one_step():
    s, reason = run(_machine("halt"), 10)
    assert reason == "halt" and s.steps == 1 and s.halted and s.pc == 0


def test_run_reports_budget_and_traps():
    s, reason = run(_machine("bra 0\nbra 0"), 0)
    assert reason == "budget" and s.steps == 0
    # runs off the end of memory
    s = dataclasses.replace(_machine("addi r1 1"), pc=MEM_WORDS - 1, mem=np.zeros(MEM_WORDS, np.uint16) + 0x4201)
    s, reason = run(s, 5)
    assert reason == "trap: pc out of range" and s.steps == 1


def test_pairing_check_catches_unpaired_branch():
    s, reason = run(_machine("bra 1\naddi r1 1\naddi r1 1\nhalt"), 10, check_pairing=True)
    assert reason == "trap: unpaired branch"


def _random_state(rng, program_words=64):
    mem = np.zeros(MEM_WORDS, dtype=np.uint16)
    mem[:program_words] = [encode(random_instruction(rng)) for _ in range(program_words)]
    # data words elsewhere
    mem[program_words:] = rng.integers(0, 1 << 16, MEM_WORDS - program_words)
    regs = tuple(int(x) for x in rng.integers(0, 1 << 16, 8))
    br = int(rng.integers(-5, 6)) or 1
    return MachineState(int(rng.integers(0, program_words)), br, int(rng.choice([1, -1])), regs, mem)


def test_step_reversibility_full_opcode_set(rng):
    seen = set()
    for _ in range(3000):
        s = _random_state(rng)
        try:
            s1 = step(s)
        except Trap:
            continue
        if s1.halted:
            continue
        seen.add(decode(int(s.mem[s.pc])).op)
        assert step(flip(s1)) == flip(s)
        assert flip(flip(s1)) == s1
    assert seen == set(Op) - {Op.HALT}


def test_pc_moves_only_by_dir_times_br(rng):
    for _ in range(2000):
        s = _random_state(rng)
        try:
            s1 = step(s)
        except Trap:
            continue
        if not s1.halted:
            assert s1.pc - s.pc == s1.dir * s1.br


def test_data_ops_are_injective(rng):
    for op in (Op.ADD, Op.SUB, Op.XOR, Op.ADDI, Op.XORI, Op.NEG, Op.SWAPR, Op.EXCH):
        for _ in range(30):
            ins = random_instruction(rng)
            while ins.op is not op:
                ins = random_instruction(rng)
            mem = np.zeros(MEM_WORDS, dtype=np.uint16)
            mem[0] = encode(ins)
            mem[1:] = rng.integers(0, 1 << 16, MEM_WORDS - 1)
            outs = set()
            states = []
            for _ in range(40):
                regs = tuple(int(x) for x in rng.integers(0, 1 << 16, 8))
                mem2 = mem.copy()
                mem2[1 + int(rng.integers(MEM_WORDS - 1))] = int(rng.integers(1 << 16))
                states.append(MachineState(0, 1, 1, regs, mem2))
            ins_seen = set()
            for st in states:
                try:
                    s1 = step(st)
                except Trap:
                    continue
                ins_seen.add((st.regs, st.mem.tobytes()))
                outs.add((s1.regs, s1.mem.tobytes()))
                inv = step(flip(s1))
                assert (inv.regs, inv.mem.tobytes()) == (st.regs, st.mem.tobytes())
            assert len(outs) == len(ins_seen)


# -- assembler ----------------------------------------------------------------

def test_assemble_halt():
    assert list(assemble("halt")) == [encode(Instruction(Op.HALT))]


def test_add_round_trip():
    assert disassemble(assemble("add r1 r2")) == "add r1 r2\n"


def test_disassembly_is_canonical(rng):
    for name in PROGRAMS:
        words = assemble(program_source(name))
        text = disassemble(words)
        assert np.array_equal(assemble(text), words)
        assert disassemble(assemble(text)) == text
    words = rng.integers(0, 1 << 16, 500).astype(np.uint16)
    assert np.array_equal(assemble(disassemble(words)), words)


def test_assembler_syntax():
    words = assemble("""
    ; comment line
    Start: ADDI R1, 5        ; upper-case is fine
    loop:  bne r1 r0 loop
    .word -1
    .word 0x10
    """)
    assert list(words[2:]) == [0xFFFF, 0x10]
    assert decode(int(words[1])) == Instruction(Op.BNE, 1, 0, -1)


@pytest.mark.parametrize("src, msg", [
    ("frob r1", "unknown mnemonic"),
    ("a: halt\na: halt", "duplicate label"),
    ("addi r1 200", "outside"),
    ("beq r1 r2 40", "outside"),
    ("add r1 r9", "register"),
    ("add r1", "operand"),
    ("bra nowhere", "undefined label"),
    (".word 70000", "16 bits"),
])
def test_assembler_errors(src, msg):
    with pytest.raises(AsmError, match=msg):
        assemble(src)


def test_image_files(tmp_path):
    words = assemble(program_source("triangle"))
    save_image(tmp_path / "t.bin", words)
    raw = (tmp_path / "t.bin").read_bytes()
    assert len(raw) == 2 * len(words) and raw[0] | raw[1] << 8 == int(words[0])
    assert np.array_equal(load_image(tmp_path / "t.bin"), words)
    (tmp_path / "odd.bin").write_bytes(b"\x00")
    with pytest.raises(ValueError):
        load_image(tmp_path / "odd.bin")


# -- shipped programs -------------------------------------------------------

@pytest.mark.parametrize("n", range(0, 21))
def test_triangle(n):
    s, reason = run(load(assemble(program_source("triangle")), regs=[0, 0, n, 0, 0, 0, 0, 0]), 10_000,
                    check_pairing=True)
    assert reason == "halt" and s.regs[1] == n * (n + 1) // 2 and s.regs[2] == 0


@pytest.mark.parametrize("n, fib", [(0, 0), (1, 1), (2, 1), (7, 13), (20, 6765)])
def test_fib(n, fib):
    s, reason = run(load(assemble(program_source("fib")), regs=[0, 0, 1, n, 0, 0, 0, 0]), 10_000,
                    check_pairing=True)
    assert reason == "halt" and s.regs[1] == fib


def test_memswap():
    words = assemble(program_source("memswap"))
    s, reason = run(load(words), 100, check_pairing=True)
    assert reason == "halt"
    assert list(s.mem[9:11]) == [0xFFFB, 1234] and s.regs == (0,) * 8


@pytest.mark.parametrize("name", PROGRAMS)
def test_programs_run_back_to_start(name, rng):
    words = assemble(program_source(name))
    for _ in range(100):
        s0 = load(words, regs=[int(x) for x in rng.integers(0, 40, 8)])
        s, _ = run(s0, int(rng.integers(1, 300)))
        assert run_backward(s, s.steps) == s0
