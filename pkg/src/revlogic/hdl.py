"""Point-free combinator language for reversible circuits.

Grammar (``;`` binds tighter than ``||``, both left-associative)::

    program ::= (NAME "=" expr)*
    expr    ::= term ("||" term)*
    term    ::= atom (";" atom)*
    atom    ::= "id" INT | "not" | "cnot" | "swap" | "toffoli" INT
              | "fredkin" INT | "perm" "[" INT ("," INT)* "]"
              | "inv" "(" expr ")" | "(" expr ")" | NAME

``#`` starts a comment. The program's entry point is the definition ``main``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .circuit import CNOT, NOT, SWAP, Circuit, concat, cswap, invert, mcx, parallel


class HdlError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


class WidthError(HdlError):
    pass


# -- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Prim:
    kind: str  # id, not, cnot, swap, toffoli, fredkin
    size: int = 0

    def __post_init__(self):
        if self.kind not in _PRIM_WIDTH:
            raise HdlError(f"unknown primitive {self.kind!r}")
        lo = {"id": 1, "toffoli": 3, "fredkin": 3}.get(self.kind)
        if lo is not None and self.size < lo:
            raise HdlError(f"{self.kind} needs size >= {lo}, got {self.size}")


@dataclass(frozen=True)
class Serial:
    first: "Expr"
    second: "Expr"


@dataclass(frozen=True)
class Parallel:
    top: "Expr"
    bottom: "Expr"


@dataclass(frozen=True)
class Inverse:
    body: "Expr"


@dataclass(frozen=True)
class Perm:
    """Wire ``i`` of the input leaves on output position ``order[i]``."""
    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        if not self.order or sorted(self.order) != list(range(len(self.order))):
            raise HdlError(f"perm {list(self.order)} is not a permutation of 0..{len(self.order) - 1}")


@dataclass(frozen=True)
class Ref:
    name: str


Expr = Union[Prim, Serial, Parallel, Inverse, Perm, Ref]

_PRIM_WIDTH = {"id": None, "not": 1, "cnot": 2, "swap": 2, "toffoli": None, "fredkin": None}
_SIZED = {"id", "toffoli", "fredkin"}


def ID(n: int) -> Prim:
    return Prim("id", n)


@dataclass(frozen=True)
class Program:
    definitions: tuple[tuple[str, Expr], ...]
    main: str = "main"

    def lookup(self, name: str) -> Expr:
        for n, e in self.definitions:
            if n == name:
                return e
        raise HdlError(f"unresolved reference {name!r}")

    @property
    def main_expr(self) -> Expr:
        return self.lookup(self.main)


# -- lexer / parser --------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(#[^\n]*)|(\|\||[;=()\[\],])|(-?\d+)|([A-Za-z_][A-Za-z0-9_']*))")
_KEYWORDS = {"id", "not", "cnot", "swap", "toffoli", "fredkin", "perm", "inv"}


@dataclass
class _Tok:
    kind: str  # sym, int, name, eof
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    line_starts = [0] + [m.end() for m in re.finditer("\n", src)]

    def locate(p: int) -> tuple[int, int]:
        ln = max(i for i, s in enumerate(line_starts) if s <= p)
        return ln + 1, p - line_starts[ln] + 1

    while True:
        m = _TOKEN_RE.match(src, pos)
        if not m or m.end() == pos:
            rest = src[pos:]
            if rest.strip() == "":
                break
            off = pos + len(rest) - len(rest.lstrip())
            raise HdlError(f"unexpected character {src[off]!r}", *locate(off))
        pos = m.end()
        if m.group(1):
            continue
        for kind, grp in (("sym", 2), ("int", 3), ("name", 4)):
            if m.group(grp) is not None:
                toks.append(_Tok(kind, m.group(grp), *locate(m.start(grp))))
                break
    end = locate(len(src))
    toks.append(_Tok("eof", "", *end))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str) -> HdlError:
        t = self.cur
        return HdlError(f"{msg}, found {t.text or 'end of input'!r}", t.line, t.col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        t = self.cur
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            raise self.error(f"expected {text or kind}")
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.cur.kind == "sym" and self.cur.text == text

    def program(self) -> list[tuple[str, Expr, _Tok]]:
        defs = []
        while self.cur.kind != "eof":
            name = self.take(kind="name")
            if name.text in _KEYWORDS:
                raise HdlError(f"keyword {name.text!r} cannot be defined", name.line, name.col)
            self.take("=")
            defs.append((name.text, self.expr(), name))
        return defs

    def expr(self) -> Expr:
        e = self.term()
        while self.at("||"):
            self.take("||")
            e = Parallel(e, self.term())
        return e

    def term(self) -> Expr:
        e = self.atom()
        while self.at(";"):
            self.take(";")
            e = Serial(e, self.atom())
        return e

    def integer(self) -> int:
        return int(self.take(kind="int").text)

    def atom(self) -> Expr:
        t = self.cur
        if self.at("("):
            self.take("(")
            e = self.expr()
            self.take(")")
            return e
        if t.kind != "name":
            raise self.error("expected an expression")
        self.i += 1
        try:
            if t.text in ("not", "cnot", "swap"):
                return Prim(t.text)
            if t.text in _SIZED:
                return Prim(t.text, self.integer())
        except HdlError as exc:
            if exc.line is None:
                raise HdlError(str(exc), t.line, t.col) from None
            raise
        if t.text == "perm":
            self.take("[")
            order = [self.integer()]
            while self.at(","):
                self.take(",")
                order.append(self.integer())
            self.take("]")
            try:
                return Perm(tuple(order))
            except HdlError as exc:
                raise HdlError(str(exc), t.line, t.col) from None
        if t.text == "inv":
            self.take("(")
            e = self.expr()
            self.take(")")
            return Inverse(e)
        return Ref(t.text)


def _refs(e: Expr) -> Iterator[str]:
    if isinstance(e, Ref):
        yield e.name
    elif isinstance(e, (Serial, Parallel)):
        yield from _refs(e.first if isinstance(e, Serial) else e.top)
        yield from _refs(e.second if isinstance(e, Serial) else e.bottom)
    elif isinstance(e, Inverse):
        yield from _refs(e.body)


def parse(source: str, main: str = "main") -> Program:
    raw = _Parser(source).program()
    seen: dict[str, _Tok] = {}
    for name, _, tok in raw:
        if name in seen:
            raise HdlError(f"duplicate definition {name!r}", tok.line, tok.col)
        seen[name] = tok
    defs = {name: e for name, e, _ in raw}
    for name, e, tok in raw:
        for r in _refs(e):
            if r not in defs:
                raise HdlError(f"unresolved reference {r!r} in {name!r}", tok.line, tok.col)
    # definitions may not refer to themselves, directly or otherwise
    state: dict[str, int] = {}

    def visit(n: str, trail: list[str]):
        if state.get(n) == 2:
            return
        if state.get(n) == 1:
            cyc = " -> ".join(trail[trail.index(n):] + [n])
            tok = seen[n]
            raise HdlError(f"cyclic definition {cyc}", tok.line, tok.col)
        state[n] = 1
        for r in _refs(defs[n]):
            visit(r, trail + [n])
        state[n] = 2

    for n in defs:
        visit(n, [])
    if main not in defs:
        raise HdlError(f"no definition for {main!r}")
    return Program(tuple((n, e) for n, e, _ in raw), main)


# -- pretty printer --------------------------------------------------------

def pretty(e: Expr) -> str:
    return _pp(e, 0)


def _pp(e: Expr, prec: int) -> str:
    # prec: 0 = any, 1 = inside ||, 2 = inside ;
    if isinstance(e, Prim):
        return f"{e.kind} {e.size}" if e.kind in _SIZED else e.kind
    if isinstance(e, Perm):
        return "perm [" + ", ".join(map(str, e.order)) + "]"
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Inverse):
        return f"inv({_pp(e.body, 0)})"
    if isinstance(e, Parallel):
        s = f"{_pp(e.top, 1)} || {_pp(e.bottom, 2)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(e, Serial):
        s = f"{_pp(e.first, 2)} ; {_pp(e.second, 3)}"
        return f"({s})" if prec >= 3 else s
    raise TypeError(e)


def pretty_print(p: Program) -> str:
    return "".join(f"{name} = {pretty(e)}\n" for name, e in p.definitions)


# -- typing / elaboration --------------------------------------------------

def prim_width(p: Prim) -> int:
    w = _PRIM_WIDTH[p.kind]
    return p.size if w is None else w


def infer_width(e: Expr, env: Program | None = None) -> int:
    if isinstance(e, Prim):
        return prim_width(e)
    if isinstance(e, Perm):
        return len(e.order)
    if isinstance(e, Inverse):
        return infer_width(e.body, env)
    if isinstance(e, Parallel):
        return infer_width(e.top, env) + infer_width(e.bottom, env)
    if isinstance(e, Serial):
        w1, w2 = infer_width(e.first, env), infer_width(e.second, env)
        if w1 != w2:
            raise WidthError(f"width mismatch in serial composition: {w1} vs {w2}")
        return w1
    if isinstance(e, Ref):
        if env is None:
            raise HdlError(f"unresolved reference {e.name!r}")
        return infer_width(env.lookup(e.name), env)
    raise TypeError(e)


def perm_swaps(order) -> list[tuple[int, int]]:
    """SWAPs realising ``out[order[i]] = in[i]``, one cycle at a time."""
    n = len(order)
    # current[pos] = original wire sitting at pos
    cur = list(range(n))
    where = list(range(n))
    swaps = []
    for wire in range(n):
        dest = order[wire]
        pos = where[wire]
        if pos != dest:
            other = cur[dest]
            swaps.append((min(pos, dest), max(pos, dest)))
            cur[pos], cur[dest] = other, wire
            where[other], where[wire] = pos, dest
    return swaps


def _prim_circuit(p: Prim) -> Circuit:
    w = prim_width(p)
    if p.kind == "id":
        gates = ()
    elif p.kind == "not":
        gates = (NOT(0),)
    elif p.kind == "cnot":
        gates = (CNOT(0, 1),)
    elif p.kind == "swap":
        gates = (SWAP(0, 1),)
    elif p.kind == "toffoli":
        gates = (mcx(range(w - 1), w - 1),)
    else:
        gates = (cswap(range(w - 2), w - 2, w - 1),)
    return Circuit(w, gates)


def elaborate(e: Expr, env: Program | None = None) -> Circuit:
    infer_width(e, env)
    return _elab(e, env, {})


def _elab(e: Expr, env, memo) -> Circuit:
    if isinstance(e, Prim):
        return _prim_circuit(e)
    if isinstance(e, Perm):
        return Circuit(len(e.order), tuple(SWAP(a, b) for a, b in perm_swaps(e.order)))
    if isinstance(e, Serial):
        return concat(_elab(e.first, env, memo), _elab(e.second, env, memo))
    if isinstance(e, Parallel):
        return parallel(_elab(e.top, env, memo), _elab(e.bottom, env, memo))
    if isinstance(e, Inverse):
        return invert(_elab(e.body, env, memo))
    if isinstance(e, Ref):
        if e.name not in memo:
            memo[e.name] = _elab(env.lookup(e.name), env, memo)
        return memo[e.name]
    raise TypeError(e)


def elaborate_program(p: Program) -> Circuit:
    return elaborate(p.main_expr, p)


# -- algebra ---------------------------------------------------------------

def _perm_inverse(order) -> tuple[int, ...]:
    inv = [0] * len(order)
    for i, o in enumerate(order):
        inv[o] = i
    return tuple(inv)


def invert_expr(e: Expr, env: Program | None = None) -> Expr:
    """Push inversion to the leaves; the result contains no ``Inverse`` node.

    References are inlined when ``env`` is given; without it an inverted
    reference is the one place an ``Inverse`` node survives.
    """
    if isinstance(e, Prim):
        return e
    if isinstance(e, Perm):
        return Perm(_perm_inverse(e.order))
    if isinstance(e, Serial):
        return Serial(invert_expr(e.second, env), invert_expr(e.first, env))
    if isinstance(e, Parallel):
        return Parallel(invert_expr(e.top, env), invert_expr(e.bottom, env))
    if isinstance(e, Inverse):
        return _strip_inverse(e.body, env)
    if isinstance(e, Ref):
        if env is None:
            return Inverse(e)
        return invert_expr(env.lookup(e.name), env)
    raise TypeError(e)


def _strip_inverse(e: Expr, env) -> Expr:
    """Normal form of ``e`` itself with every ``Inverse`` node pushed down."""
    if isinstance(e, Inverse):
        return invert_expr(e.body, env)
    if isinstance(e, Serial):
        return Serial(_strip_inverse(e.first, env), _strip_inverse(e.second, env))
    if isinstance(e, Parallel):
        return Parallel(_strip_inverse(e.top, env), _strip_inverse(e.bottom, env))
    if isinstance(e, Ref) and env is not None:
        return _strip_inverse(env.lookup(e.name), env)
    return e


def _is_id(e: Expr) -> bool:
    return isinstance(e, Prim) and e.kind == "id"


def _serial_list(e: Expr) -> list[Expr]:
    if isinstance(e, Serial):
        return _serial_list(e.first) + _serial_list(e.second)
    return [e]


def _rebuild_serial(items: list[Expr], width: int) -> Expr:
    if not items:
        return ID(width)
    out = items[0]
    for it in items[1:]:
        out = Serial(out, it)
    return out


def _step(e: Expr, env) -> Expr:
    if isinstance(e, Inverse):
        body = _step(e.body, env)
        if isinstance(body, Inverse):
            return body.body
        if isinstance(body, (Prim, Perm)):
            return invert_expr(body)
        return Inverse(body)
    if isinstance(e, Perm):
        if list(e.order) == list(range(len(e.order))):
            return ID(len(e.order))
        return e
    if isinstance(e, Parallel):
        top, bottom = _step(e.top, env), _step(e.bottom, env)
        if _is_id(top) and _is_id(bottom):
            return ID(top.size + bottom.size)
        return Parallel(top, bottom)
    if isinstance(e, Serial):
        width = infer_width(e, env)
        items: list[Expr] = []
        for x in _serial_list(e):
            items += _serial_list(_open_inverse(_step(x, env)))
        out: list[Expr] = []
        for it in items:
            if _is_id(it):
                continue
            if out:
                prev = out[-1]
                if isinstance(prev, Perm) and isinstance(it, Perm):
                    merged = _step(Perm(tuple(it.order[i] for i in prev.order)), env)
                    out.pop()
                    if not _is_id(merged):
                        out.append(merged)
                    continue
                if _cancels(prev, it, env):
                    out.pop()
                    continue
            out.append(it)
        return _rebuild_serial(out, width)
    return e


def _inverse_atom(e: Expr) -> Expr:
    if isinstance(e, Inverse):
        return e.body
    if isinstance(e, (Prim, Perm)):
        return invert_expr(e)
    return Inverse(e)


def _open_inverse(e: Expr) -> Expr:
    """``inv(a ; b)`` as ``inv b ; inv a`` so chains can cancel item by item."""
    if isinstance(e, Inverse) and isinstance(e.body, Serial):
        items = [_inverse_atom(x) for x in reversed(_serial_list(e.body))]
        return _rebuild_serial(items, 0)
    return e


def _cancels(a: Expr, b: Expr, env) -> bool:
    if b == Inverse(a) or a == Inverse(b):
        return True
    try:
        return _strip_inverse(b, env) == invert_expr(a, env)
    except HdlError:
        return False


def rewrite(e: Expr, max_passes: int = 16, env: Program | None = None) -> Expr:
    """Simplify with the group laws until a fixed point or the pass budget.

    Rules: ``e ; inv e -> id``, identities vanish from serial chains,
    ``id m || id n -> id (m+n)``, identity perms become ``id``, adjacent
    perms fuse, and double inverses disappear.
    """
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")
    for _ in range(max_passes):
        nxt = _step(e, env)
        if nxt == e:
            break
        e = nxt
    return e


# -- random expressions for fuzzing ---------------------------------------

def random_expr(rng: np.random.Generator, width: int, depth: int = 4) -> Expr:
    """Random well-typed expression of the given width."""
    choice = rng.integers(6) if depth > 0 else 0
    if choice == 0 or width == 1 and choice in (3,):
        return _random_leaf(rng, width)
    if choice == 1:
        return Serial(random_expr(rng, width, depth - 1), random_expr(rng, width, depth - 1))
    if choice == 2 and width >= 2:
        k = int(rng.integers(1, width))
        return Parallel(random_expr(rng, k, depth - 1), random_expr(rng, width - k, depth - 1))
    if choice == 3:
        return Perm(tuple(int(x) for x in rng.permutation(width)))
    if choice == 4:
        return Inverse(random_expr(rng, width, depth - 1))
    body = random_expr(rng, width, depth - 1)
    # occasionally produce a cancelling pair to exercise the rewriter
    return Serial(body, Inverse(body)) if rng.integers(2) else Serial(body, invert_expr(body))


def _random_leaf(rng, width: int) -> Expr:
    opts = ["id"] + (["not"] if width == 1 else []) + (["cnot", "swap"] if width == 2 else [])
    if width >= 3:
        opts += ["toffoli", "fredkin"]
    kind = opts[rng.integers(len(opts))]
    if kind in _SIZED:
        return Prim(kind, width)
    if width == 1 or kind in ("cnot", "swap"):
        return Prim(kind)
    return ID(width)
