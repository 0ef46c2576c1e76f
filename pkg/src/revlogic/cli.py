"""Command-line frontend: ``revlogic <command> ...``.

Exit status is 0 on success, 1 when the input is rejected (message on
stderr) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import arith, hdl, lifting, synth
from .bob import asm as bob_asm
from .bob import machine as bob_machine
from .circuit import Circuit, CircuitError, check_valid, invert, stats
from .realfmt import RealFormatError, load_real, write_real
from .simulator import W_MAX, BitState, check_garbage_free, permutation, run


class CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None


def _load_circuit(path: str) -> Circuit:
    try:
        return load_real(path)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None
    except (RealFormatError, CircuitError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _emit_circuit(circ: Circuit, out: str | None) -> None:
    text = write_real(circ)
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- commands --------------------------------------------------------------

def cmd_gen(args) -> None:
    n = args.bits
    sign = 1 if args.sign == "+" else -1
    if args.kind == "vadder":
        circ, _ = arith.gen_vadder(n)
    elif args.kind == "rbca":
        block = args.block if args.block is not None else arith.optimal_block_size(n)
        circ, _ = arith.gen_rbca(n, block)
    elif args.kind == "constmul":
        circ, _ = arith.gen_constmul(n, args.k, sign)
    else:
        circ, _ = arith.gen_alu(n)
    _emit_circuit(circ, args.output)


def _parse_bits(groups: Sequence[str], circ: Circuit) -> BitState:
    bits = []
    for g in groups:
        if not g or set(g) - {"0", "1"}:
            raise CliError(f"input {g!r} is not a bit string")
        bits += [c == "1" for c in g]
    if len(bits) > circ.width:
        raise CliError(f"{len(bits)} input bits for a circuit of width {circ.width}")
    # unlisted lines take their declared constant
    for ln in circ.lines[len(bits):]:
        bits.append(bool(ln.constant_in or 0))
    return BitState(bits)


def _group(state: BitState, groups: Sequence[str]) -> str:
    s = str(state)
    out, pos = [], 0
    for g in groups:
        out.append(s[pos:pos + len(g)])
        pos += len(g)
    if pos < len(s):
        out.append(s[pos:])
    return " ".join(out)


def cmd_sim(args) -> None:
    circ = _load_circuit(args.file)
    state = _parse_bits(args.input, circ)
    result = run(circ, state, "backward" if args.backward else "forward")
    print(_group(result, args.input))


def _table_circuit(path: str) -> Circuit:
    circ = _load_circuit(path)
    if circ.width > W_MAX:
        raise CliError(f"{path}: width {circ.width} is too large for a full table (max {W_MAX})")
    return circ


def cmd_truth(args) -> None:
    sys.stdout.write(synth.format_truth_table(permutation(_table_circuit(args.file))))


def cmd_check(args) -> int:
    circ = _load_circuit(args.file)
    check_valid(circ)
    if circ.width <= W_MAX:
        bij = permutation(circ).is_bijection()
        msg = f"bijective: {'yes' if bij else 'no'}"
    else:
        # every valid gate is a bijection, so a valid circuit is one too
        bij = True
        msg = "bijective: yes"
    ok = bij
    if args.garbage:
        rep = check_garbage_free(circ, samples=args.samples, seed=args.seed)
        msg += f", garbage-free: {'yes' if rep.ok else 'no'}"
        if not rep.exhaustive:
            msg += f" ({rep.checked} sampled inputs)"
        if not rep.ok:
            pattern, line, val = rep.counterexample
            msg += f" (input {BitState.from_int(pattern, circ.width)}: line {circ.lines[line].name} = {int(val)})"
        ok = ok and rep.ok
    print(msg)
    return 0 if ok else 1


def cmd_invert(args) -> None:
    _emit_circuit(invert(_load_circuit(args.file)), args.output)


def cmd_opt(args) -> None:
    _emit_circuit(synth.optimize(_load_circuit(args.file), passes=args.passes), args.output)


def cmd_synth(args) -> None:
    try:
        circ = synth.synth_from_permutation(synth.parse_truth_table(_read(args.table)))
    except ValueError as exc:
        raise CliError(f"{args.table}: {exc}") from None
    if args.optimize:
        circ = synth.optimize(circ)
    _emit_circuit(circ, args.output)


def _load_program(path: str) -> hdl.Program:
    try:
        return hdl.parse(_read(path))
    except hdl.HdlError as exc:
        raise CliError(f"{path}: {exc}") from None


def cmd_hdl_build(args) -> None:
    prog = _load_program(args.file)
    try:
        circ = hdl.elaborate_program(prog)
    except hdl.HdlError as exc:
        raise CliError(f"{args.file}: {exc}") from None
    _emit_circuit(circ, args.output)


def cmd_hdl_rewrite(args) -> None:
    prog = _load_program(args.file)
    try:
        defs = tuple((name, hdl.rewrite(e, args.passes, prog)) for name, e in prog.definitions)
    except hdl.HdlError as exc:
        raise CliError(f"{args.file}: {exc}") from None
    sys.stdout.write(hdl.pretty_print(hdl.Program(defs, prog.main)))


def cmd_lift_build(args) -> None:
    try:
        spec = lifting.parse_spec(_read(args.spec))
    except ValueError as exc:
        raise CliError(f"{args.spec}: {exc}") from None
    circ = lifting.gen_transform(spec)
    if args.inverse:
        circ = invert(circ)
    _emit_circuit(circ, args.output)


def cmd_bob_asm(args) -> None:
    try:
        words = bob_asm.assemble(_read(args.file))
    except bob_asm.AsmError as exc:
        raise CliError(f"{args.file}: {exc}") from None
    bob_asm.save_image(args.output, words)


def cmd_bob_disasm(args) -> None:
    sys.stdout.write(bob_asm.disassemble(_load_image(args.file)))


def _load_image(path: str) -> np.ndarray:
    try:
        return bob_asm.load_image(path)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None


def _parse_reg(text: str) -> tuple[int, int]:
    name, sep, val = text.partition("=")
    if not sep or not name.lower().startswith("r") or not name[1:].isdigit() or int(name[1:]) > 7:
        raise argparse.ArgumentTypeError(f"expected rN=VALUE with N in 0..7, got {text!r}")
    try:
        return int(name[1:]), int(val, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad register value in {text!r}") from None


def _dump(s: bob_machine.MachineState) -> str:
    regs = " ".join(f"r{i}={v}" for i, v in enumerate(s.regs))
    return f"pc={s.pc} br={s.br} dir={s.dir:+d} steps={s.steps}\n{regs}"


def cmd_bob_run(args) -> int:
    regs = [0] * 8
    for idx, val in args.reg or ():
        regs[idx] = val
    s0 = bob_machine.load(_load_image(args.file), regs=regs)
    s, reason = bob_machine.run(s0, args.steps)
    print(f"stopped: {reason} after {s.steps} steps")
    if args.dump:
        print(_dump(s))
    else:
        print(" ".join(f"r{i}={v}" for i, v in enumerate(s.regs)))
    if args.backward:
        back = bob_machine.run_backward(s, s.steps)
        print(f"reversed to start: {'yes' if back == s0 else 'no'}")
        if args.dump:
            print(_dump(back))
        return 0 if back == s0 else 1
    return 0 if reason in ("halt", "budget") else 1


def cmd_stats(args) -> None:
    st = stats(_load_circuit(args.file))
    for field in ("width", "gate_count", "depth", "ancilla_count", "garbage_count"):
        print(f"{field}: {getattr(st, field)}")


# -- parser ----------------------------------------------------------------

def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revlogic", description="Reversible logic toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an arithmetic circuit")
    g.add_argument("kind", choices=["vadder", "rbca", "constmul", "alu"])
    g.add_argument("--bits", type=_positive, default=4)
    g.add_argument("--block", type=_positive, help="rbca block size (default: ceil(sqrt(bits)))")
    g.add_argument("--k", type=_nonneg, default=2, help="constmul: M = 2^k +/- 1")
    g.add_argument("--sign", choices=["+", "-"], default="+")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sim", help="simulate one input pattern")
    s.add_argument("file")
    s.add_argument("--input", nargs="+", required=True, metavar="BITS",
                   help="bit strings in line order, LSB first; missing lines take their constant")
    s.add_argument("--backward", action="store_true")
    s.set_defaults(func=cmd_sim)

    t = sub.add_parser("truth", help="print the permutation table")
    t.add_argument("file")
    t.set_defaults(func=cmd_truth)

    c = sub.add_parser("check", help="check bijectivity and (optionally) garbage-freedom")
    c.add_argument("file")
    c.add_argument("--garbage", action="store_true")
    c.add_argument("--samples", type=_positive, default=100_000)
    c.add_argument("--seed", type=int, default=0x5EED)
    c.set_defaults(func=cmd_check)

    inv = sub.add_parser("invert", help="write the inverse circuit")
    inv.add_argument("file")
    inv.add_argument("-o", "--output")
    inv.set_defaults(func=cmd_invert)

    o = sub.add_parser("opt", help="cancel redundant gate pairs")
    o.add_argument("file")
    o.add_argument("-o", "--output")
    o.add_argument("--passes", type=_positive, default=16)
    o.set_defaults(func=cmd_opt)

    sy = sub.add_parser("synth", help="synthesize a circuit from a truth table")
    sy.add_argument("table")
    sy.add_argument("-o", "--output")
    sy.add_argument("--optimize", action="store_true")
    sy.set_defaults(func=cmd_synth)

    h = sub.add_parser("hdl", help="combinator language tools")
    hs = h.add_subparsers(dest="hdl_command", required=True)
    hb = hs.add_parser("build", help="elaborate main to a circuit")
    hb.add_argument("file")
    hb.add_argument("-o", "--output")
    hb.set_defaults(func=cmd_hdl_build)
    hr = hs.add_parser("rewrite", help="simplify every definition")
    hr.add_argument("file")
    hr.add_argument("--passes", type=_positive, default=16)
    hr.set_defaults(func=cmd_hdl_rewrite)

    lf = sub.add_parser("lift", help="lifting-step transforms")
    ls = lf.add_subparsers(dest="lift_command", required=True)
    lb = ls.add_parser("build", help="build the circuit of a step list")
    lb.add_argument("spec")
    lb.add_argument("-o", "--output")
    lb.add_argument("--inverse", action="store_true")
    lb.set_defaults(func=cmd_lift_build)

    b = sub.add_parser("bob", help="reversible machine tools")
    bs = b.add_subparsers(dest="bob_command", required=True)
    ba = bs.add_parser("asm", help="assemble to a binary image")
    ba.add_argument("file")
    ba.add_argument("-o", "--output", required=True)
    ba.set_defaults(func=cmd_bob_asm)
    bd = bs.add_parser("disasm", help="print an image as assembly")
    bd.add_argument("file")
    bd.set_defaults(func=cmd_bob_disasm)
    br = bs.add_parser("run", help="run an image")
    br.add_argument("file")
    br.add_argument("--steps", type=_nonneg, default=100_000)
    br.add_argument("--reg", type=_parse_reg, action="append", metavar="rN=V")
    br.add_argument("--backward", action="store_true", help="afterwards, run back to the start")
    br.add_argument("--dump", action="store_true")
    br.set_defaults(func=cmd_bob_run)

    st = sub.add_parser("stats", help="gate count, depth and line counts")
    st.add_argument("file")
    st.set_defaults(func=cmd_stats)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args) or 0
    except (CliError, ValueError, OSError, bob_machine.Trap) as exc:
        print(f"revlogic: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
