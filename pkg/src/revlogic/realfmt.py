"""RevLib-style ``.real`` netlist reader and writer.

Only the five gate kinds of :mod:`revlogic.circuit` are supported:
``t<k>`` is a controlled-not with ``k-1`` controls and ``f<k>`` a
controlled-swap with ``k-2`` controls. Besides ``.constants`` and
``.garbage`` the writer emits ``.results`` for constant lines whose output
is a result rather than a restored ancilla.
"""
from __future__ import annotations

import re

from .circuit import Circuit, Gate, LineInfo, check_valid, cswap, mcx, unique_names

_IGNORED_DIRECTIVES = {".model", ".inputs", ".outputs", ".inputbus", ".outputbus", ".define", ".enddefine"}


class RealFormatError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


def write_real(circuit: Circuit) -> str:
    check_valid(circuit)
    names = unique_names([ln.name for ln in circuit.lines])
    out = [".version 2.0", f".numvars {circuit.width}", ".variables " + " ".join(names)]
    if any(ln.constant_in is not None for ln in circuit.lines):
        out.append(".constants " + "".join("-" if ln.constant_in is None else str(ln.constant_in) for ln in circuit.lines))
    if any(ln.garbage_out for ln in circuit.lines):
        out.append(".garbage " + "".join("1" if ln.garbage_out else "-" for ln in circuit.lines))
    if any(ln.result_out for ln in circuit.lines):
        out.append(".results " + "".join("1" if ln.result_out else "-" for ln in circuit.lines))
    out.append(".begin")
    for g in circuit.gates:
        ops = [names[c] for c in g.controls] + [names[t] for t in g.targets]
        prefix = "t" if g.is_controlled_not else "f"
        out.append(f"{prefix}{len(ops)} " + " ".join(ops))
    out.append(".end")
    return "\n".join(out) + "\n"


_GATE_RE = re.compile(r"^([tf])(\d+)$")


def read_real(text: str) -> Circuit:
    numvars: int | None = None
    names: list[str] | None = None
    constants: str | None = None
    garbage: str | None = None
    results: str | None = None
    gates: list[Gate] = []
    in_body = False
    ended = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise RealFormatError("content after .end", lineno)
        head, *rest = line.split()
        key = head.lower()
        if key.startswith("."):
            if key == ".version":
                continue
            if key == ".numvars":
                if len(rest) != 1 or not rest[0].isdigit():
                    raise RealFormatError("malformed .numvars", lineno)
                numvars = int(rest[0])
            elif key == ".variables":
                names = rest
                if len(set(names)) != len(names):
                    raise RealFormatError("duplicate variable name", lineno)
            elif key == ".constants":
                constants = "".join(rest)
                if set(constants) - set("-01"):
                    raise RealFormatError("bad .constants character", lineno)
            elif key == ".garbage":
                garbage = "".join(rest)
                if set(garbage) - set("-1"):
                    raise RealFormatError("bad .garbage character", lineno)
            elif key == ".results":
                results = "".join(rest)
                if set(results) - set("-1"):
                    raise RealFormatError("bad .results character", lineno)
            elif key == ".begin":
                if names is None:
                    raise RealFormatError(".begin before .variables", lineno)
                in_body = True
            elif key == ".end":
                in_body = False
                ended = True
            elif key in _IGNORED_DIRECTIVES:
                continue
            else:
                raise RealFormatError(f"unknown directive {head}", lineno)
            continue

        if not in_body:
            raise RealFormatError("gate outside .begin/.end", lineno)
        m = _GATE_RE.match(key)
        if not m:
            raise RealFormatError(f"unknown gate mnemonic {head!r}", lineno)
        family, k = m.group(1), int(m.group(2))
        if len(rest) != k:
            raise RealFormatError(f"{head} expects {k} operands, got {len(rest)}", lineno)
        if len(set(rest)) != len(rest):
            raise RealFormatError("duplicate line in gate", lineno)
        index = {n: i for i, n in enumerate(names)}
        try:
            ops = [index[n] for n in rest]
        except KeyError as exc:
            raise RealFormatError(f"undeclared variable {exc.args[0]!r}", lineno) from None
        if family == "t":
            if k < 1:
                raise RealFormatError("t0 is not a gate", lineno)
            gates.append(mcx(ops[:-1], ops[-1]))
        else:
            if k < 2:
                raise RealFormatError(f"{head} needs two targets", lineno)
            gates.append(cswap(ops[:-2], ops[-2], ops[-1]))

    if names is None:
        raise RealFormatError("missing .variables")
    if not ended:
        raise RealFormatError("missing .end")
    width = len(names)
    if numvars is not None and numvars != width:
        raise RealFormatError(f".numvars {numvars} but {width} variables")
    for label, ann in ((".constants", constants), (".garbage", garbage), (".results", results)):
        if ann is not None and len(ann) != width:
            raise RealFormatError(f"{label} has {len(ann)} entries for {width} lines")
    lines = tuple(
        LineInfo(
            names[i],
            None if constants is None or constants[i] == "-" else int(constants[i]),
            garbage is not None and garbage[i] == "1",
            results is not None and results[i] == "1",
        )
        for i in range(width)
    )
    return Circuit(width, tuple(gates), lines)


def load_real(path) -> Circuit:
    with open(path, encoding="utf-8") as f:
        return read_real(f.read())


def save_real(circuit: Circuit, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_real(circuit))
