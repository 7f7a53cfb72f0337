"""Abstract syntax, concrete grammar and substitution for SCI.

The language covers the base calculus (naturals, commands, assignable
variables, affine lambda terms, block allocation) together with the two
extensions ``random`` and ``mkvar``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union


# --------------------------------------------------------------------------
# types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow:
    domain: "Type"
    codomain: "Type"

    def __str__(self) -> str:
        dom = str(self.domain)
        if isinstance(self.domain, Arrow):
            dom = f"({dom})"
        return f"{dom} -o {self.codomain}"


Type = Union[Base, Arrow]

NAT = Base("nat")
COMM = Base("comm")
VAR = Base("var")

BASE_TYPES = (NAT, COMM, VAR)


def type_order(a: Type) -> int:
    if isinstance(a, Base):
        return 0
    return max(type_order(a.domain) + 1, type_order(a.codomain))


def arrow_args(a: Type) -> tuple[list[Type], Type]:
    """Split ``A1 -o ... -o Ak -o B`` into ``([A1..Ak], B)`` with B base."""
    args = []
    while isinstance(a, Arrow):
        args.append(a.domain)
        a = a.codomain
    return args, a


# --------------------------------------------------------------------------
# terms
# --------------------------------------------------------------------------

class Term:
    """Base class of all term nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True, repr=False)
class NumLit(Term):
    n: int

    def __repr__(self):
        return f"NumLit({self.n})"


@dataclass(frozen=True, repr=False)
class ArithOp(Term):
    op: str
    left: Term
    right: Optional[Term] = None

    def __repr__(self):
        if self.right is None:
            return f"ArithOp({self.op!r}, {self.left!r})"
        return f"ArithOp({self.op!r}, {self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Skip(Term):
    def __repr__(self):
        return "Skip()"


@dataclass(frozen=True, repr=False)
class Seq(Term):
    first: Term
    rest: Term

    def __repr__(self):
        return f"Seq({self.first!r}, {self.rest!r})"


@dataclass(frozen=True, repr=False)
class Assign(Term):
    target: Term
    value: Term

    def __repr__(self):
        return f"Assign({self.target!r}, {self.value!r})"


@dataclass(frozen=True, repr=False)
class Deref(Term):
    body: Term

    def __repr__(self):
        return f"Deref({self.body!r})"


@dataclass(frozen=True, repr=False)
class While(Term):
    guard: Term
    body: Term

    def __repr__(self):
        return f"While({self.guard!r}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class IfZero(Term):
    guard: Term
    then: Term
    orelse: Term

    def __repr__(self):
        return f"IfZero({self.guard!r}, {self.then!r}, {self.orelse!r})"


@dataclass(frozen=True, repr=False)
class Ident(Term):
    name: str

    def __repr__(self):
        return f"Ident({self.name!r})"


@dataclass(frozen=True, repr=False)
class Lambda(Term):
    name: str
    annot: Type
    body: Term

    def __repr__(self):
        return f"Lambda({self.name!r}, {self.annot}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class App(Term):
    fn: Term
    arg: Term

    def __repr__(self):
        return f"App({self.fn!r}, {self.arg!r})"


@dataclass(frozen=True, repr=False)
class New(Term):
    name: str
    body: Term

    def __repr__(self):
        return f"New({self.name!r}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class Mkvar(Term):
    writer: Term
    reader: Term

    def __repr__(self):
        return f"Mkvar({self.writer!r}, {self.reader!r})"


@dataclass(frozen=True, repr=False)
class Random(Term):
    def __repr__(self):
        return "Random()"


@dataclass(frozen=True, repr=False)
class Hole(Term):
    """The hole of a program context; never part of a well-typed program."""

    def __repr__(self):
        return "Hole()"


BINARY_OPS = ("+", "-", "*", "/", "%", "=", "<", "pair")
UNARY_OPS = ("fst", "snd", "even")

SKIP = Skip()
RANDOM = Random()
HOLE = Hole()
OMEGA = While(NumLit(0), SKIP)


def diverge() -> Term:
    return OMEGA


def seq(*terms: Term) -> Term:
    """Right-nested sequential composition of one or more terms."""
    if not terms:
        return SKIP
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Seq(t, out)
    return out


def apply_arith(op: str, a: int, b: int = 0) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return max(a - b, 0)
    if op == "*":
        return a * b
    if op == "/":
        return a // b if b else 0
    if op == "%":
        return a % b if b else 0
    if op == "=":
        return int(a == b)
    if op == "<":
        return int(a < b)
    if op == "pair":
        return (a + b) * (a + b + 1) // 2 + b
    if op in ("fst", "snd"):
        from .universal import decode_pair

        m, n = decode_pair(a)
        return m if op == "fst" else n
    if op == "even":
        return int(a % 2 == 0)
    raise ValueError(f"unknown operator {op!r}")


# --------------------------------------------------------------------------
# free variables, substitution, alpha-equivalence
# --------------------------------------------------------------------------

def children(m: Term) -> Iterator[Term]:
    if isinstance(m, ArithOp):
        yield m.left
        if m.right is not None:
            yield m.right
    elif isinstance(m, Seq):
        yield m.first
        yield m.rest
    elif isinstance(m, Assign):
        yield m.target
        yield m.value
    elif isinstance(m, Deref):
        yield m.body
    elif isinstance(m, While):
        yield m.guard
        yield m.body
    elif isinstance(m, IfZero):
        yield m.guard
        yield m.then
        yield m.orelse
    elif isinstance(m, (Lambda, New)):
        yield m.body
    elif isinstance(m, App):
        yield m.fn
        yield m.arg
    elif isinstance(m, Mkvar):
        yield m.writer
        yield m.reader


def free_vars(m: Term) -> frozenset[str]:
    if isinstance(m, Ident):
        return frozenset((m.name,))
    if isinstance(m, (Lambda, New)):
        return free_vars(m.body) - {m.name}
    out: frozenset[str] = frozenset()
    for c in children(m):
        out |= free_vars(c)
    return out


def all_names(m: Term) -> set[str]:
    names = set()
    if isinstance(m, Ident):
        names.add(m.name)
    if isinstance(m, (Lambda, New)):
        names.add(m.name)
    for c in children(m):
        names |= all_names(c)
    return names


def contains(m: Term, kind: type) -> bool:
    if isinstance(m, kind):
        return True
    return any(contains(c, kind) for c in children(m))


_counter = itertools.count()


def fresh_name(base: str, avoid) -> str:
    stem = re.sub(r"_\d+$", "", base) or "v"
    while True:
        cand = f"{stem}_{next(_counter)}"
        if cand not in avoid:
            return cand


def map_children(m: Term, f) -> Term:
    """Rebuild ``m`` with ``f`` applied to each immediate subterm."""
    if isinstance(m, ArithOp):
        return ArithOp(m.op, f(m.left), None if m.right is None else f(m.right))
    if isinstance(m, Seq):
        return Seq(f(m.first), f(m.rest))
    if isinstance(m, Assign):
        return Assign(f(m.target), f(m.value))
    if isinstance(m, Deref):
        return Deref(f(m.body))
    if isinstance(m, While):
        return While(f(m.guard), f(m.body))
    if isinstance(m, IfZero):
        return IfZero(f(m.guard), f(m.then), f(m.orelse))
    if isinstance(m, Lambda):
        return Lambda(m.name, m.annot, f(m.body))
    if isinstance(m, New):
        return New(m.name, f(m.body))
    if isinstance(m, App):
        return App(f(m.fn), f(m.arg))
    if isinstance(m, Mkvar):
        return Mkvar(f(m.writer), f(m.reader))
    return m


def _rebind(m: Term, name: str, body: Term) -> Term:
    if isinstance(m, Lambda):
        return Lambda(name, m.annot, body)
    return New(name, body)


def substitute(m: Term, x: str, n: Term) -> Term:
    """Capture-avoiding substitution ``m[n/x]``."""
    fv_n = free_vars(n)

    def go(t: Term) -> Term:
        if isinstance(t, Ident):
            return n if t.name == x else t
        if isinstance(t, (Lambda, New)):
            if t.name == x:
                return t
            if x not in free_vars(t.body):
                return t
            if t.name in fv_n:
                new = fresh_name(t.name, fv_n | all_names(t.body) | {x})
                body = substitute(t.body, t.name, Ident(new))
                return _rebind(t, new, go(body))
            return _rebind(t, t.name, go(t.body))
        return map_children(t, go)

    return go(m)


def plug(context: Term, m: Term) -> Term:
    """Fill every hole of ``context`` with ``m``; binders may capture."""
    if isinstance(context, Hole):
        return m
    return map_children(context, lambda c: plug(c, m))


def alpha_eq(m: Term, n: Term) -> bool:
    """True iff ``m`` and ``n`` differ only in the names of bound identifiers."""
    return _alpha(m, n, {}, {})


def _alpha(m: Term, n: Term, env_m: dict, env_n: dict) -> bool:
    if type(m) is not type(n):
        return False
    if isinstance(m, Ident):
        bm, bn = env_m.get(m.name), env_n.get(n.name)
        if bm is None and bn is None:
            return m.name == n.name
        return bm == bn
    if isinstance(m, (Lambda, New)):
        if isinstance(m, Lambda) and m.annot != n.annot:
            return False
        depth = len(env_m) + len(env_n)
        em = dict(env_m)
        en = dict(env_n)
        em[m.name] = depth
        en[n.name] = depth
        return _alpha(m.body, n.body, em, en)
    if isinstance(m, NumLit):
        return m.n == n.n
    if isinstance(m, ArithOp):
        if m.op != n.op or (m.right is None) != (n.right is None):
            return False
    cm, cn = list(children(m)), list(children(n))
    return len(cm) == len(cn) and all(_alpha(a, b, env_m, env_n) for a, b in zip(cm, cn))


def rename_bound(m: Term, avoid=()) -> Term:
    """Give every binder in ``m`` a name distinct from all others and from ``avoid``."""
    used = set(avoid) | all_names(m)

    def go(t: Term) -> Term:
        if isinstance(t, (Lambda, New)):
            new = fresh_name(t.name, used)
            used.add(new)
            body = substitute(t.body, t.name, Ident(new))
            return _rebind(t, new, go(body))
        return map_children(t, go)

    return go(m)


# --------------------------------------------------------------------------
# pretty printer
# --------------------------------------------------------------------------

# precedence levels: 0 seq and binders (their bodies reach rightwards),
# 1 control, 2 assign, 3 compare, 4 additive, 5 multiplicative,
# 6 application, 7 prefix, 8 atom
_BIN_PREC = {"=": 3, "<": 3, "+": 4, "-": 4, "*": 5, "/": 5, "%": 5}


def pretty(m: Term) -> str:
    return _pp(m, 0)


def _paren(s: str, inner: int, outer: int) -> str:
    return f"({s})" if inner < outer else s


def _pp(m: Term, ctx: int) -> str:
    if isinstance(m, NumLit):
        return str(m.n)
    if isinstance(m, Skip):
        return "skip"
    if isinstance(m, Random):
        return "random"
    if isinstance(m, Hole):
        return "[-]"
    if isinstance(m, Ident):
        return m.name
    if isinstance(m, Seq):
        return _paren(f"{_pp(m.first, 1)}; {_pp(m.rest, 0)}", 0, ctx)
    if isinstance(m, Assign):
        return _paren(f"{_pp(m.target, 3)} := {_pp(m.value, 3)}", 2, ctx)
    if isinstance(m, Deref):
        return f"!{_pp(m.body, 7)}"
    if m == OMEGA:
        return "diverge"
    if isinstance(m, While):
        s = f"while {_pp(m.guard, 0)} do {_pp(m.body, 2)}"
        return _paren(s, 1, ctx)
    if isinstance(m, IfZero):
        s = f"ifzero {_pp(m.guard, 0)} then {_pp(m.then, 2)} else {_pp(m.orelse, 2)}"
        return _paren(s, 1, ctx)
    if isinstance(m, Lambda):
        return _paren(f"lambda {m.name}:{m.annot}. {_pp(m.body, 0)}", 0, ctx)
    if isinstance(m, New):
        return _paren(f"new {m.name} in {_pp(m.body, 0)}", 0, ctx)
    if isinstance(m, App):
        return _paren(f"{_pp(m.fn, 6)} {_pp(m.arg, 7)}", 6, ctx)
    if isinstance(m, Mkvar):
        return f"mkvar({_pp(m.writer, 0)}, {_pp(m.reader, 0)})"
    if isinstance(m, ArithOp):
        if m.op in UNARY_OPS:
            return f"{m.op}({_pp(m.left, 0)})"
        if m.op == "pair":
            return f"pair({_pp(m.left, 0)}, {_pp(m.right, 0)})"
        p = _BIN_PREC[m.op]
        # comparisons are non-associative, so both operands go one level up
        left_ctx = p + 1 if p == 3 else p
        return _paren(f"{_pp(m.left, left_ctx)} {m.op} {_pp(m.right, p + 1)}", p, ctx)
    raise TypeError(f"not a term: {m!r}")


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column


KEYWORDS = {
    "skip", "random", "diverge", "lambda", "new", "in", "while", "do",
    "ifzero", "then", "else", "mkvar", "pair", "fst", "snd", "even",
    "nat", "comm", "var",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>:=|-o|\[-\]|[;!()+\-*/%=<:.,\\])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        mt = _TOKEN_RE.match(text, pos)
        if mt is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = mt.lastgroup
        chunk = mt.group()
        if kind != "ws":
            if kind == "name" and chunk in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = mt.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str):
        t = self.tok
        found = t.text or "end of input"
        raise ParseError(f"{msg}, found {found!r}", t.line, t.column)

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "sym") and t.text in texts

    def eat(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self) -> str:
        if self.tok.kind != "name":
            self.error("expected identifier")
        t = self.tok
        self.i += 1
        return t.text

    # types ---------------------------------------------------------------
    def type_(self) -> Type:
        left = self.type_atom()
        if self.at("-o"):
            self.i += 1
            return Arrow(left, self.type_())
        return left

    def type_atom(self) -> Type:
        if self.at("nat", "comm", "var"):
            return Base(self.eat(self.tok.text).text)
        if self.at("("):
            self.i += 1
            a = self.type_()
            self.eat(")")
            return a
        self.error("expected type")

    # terms ---------------------------------------------------------------
    def term(self) -> Term:
        first = self.control()
        if self.at(";"):
            self.i += 1
            return Seq(first, self.term())
        return first

    def control(self) -> Term:
        if self.at("lambda", "\\"):
            self.i += 1
            x = self.name()
            self.eat(":")
            a = self.type_()
            self.eat(".")
            return Lambda(x, a, self.term())
        if self.at("new"):
            self.i += 1
            x = self.name()
            self.eat("in")
            return New(x, self.term())
        if self.at("while"):
            self.i += 1
            g = self.term()
            self.eat("do")
            return While(g, self.assign())
        if self.at("ifzero"):
            self.i += 1
            g = self.term()
            self.eat("then")
            a = self.assign()
            self.eat("else")
            return IfZero(g, a, self.assign())
        return self.assign()

    def assign(self) -> Term:
        if self.at("lambda", "\\", "new", "while", "ifzero"):
            return self.control()
        target = self.compare()
        if self.at(":="):
            self.i += 1
            return Assign(target, self.compare())
        return target

    def compare(self) -> Term:
        left = self.additive()
        if self.at("=", "<"):
            op = self.eat(self.tok.text).text
            return ArithOp(op, left, self.additive())
        return left

    def additive(self) -> Term:
        left = self.multiplicative()
        while self.at("+", "-"):
            op = self.eat(self.tok.text).text
            left = ArithOp(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> Term:
        left = self.application()
        while self.at("*", "/", "%"):
            op = self.eat(self.tok.text).text
            left = ArithOp(op, left, self.application())
        return left

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("num", "name"):
            return True
        return self.at("(", "!", "skip", "random", "diverge", "mkvar", "pair",
                       "fst", "snd", "even", "[-]")

    def application(self) -> Term:
        fn = self.prefix()
        while self._starts_atom() or self.at("lambda", "\\", "new", "while", "ifzero"):
            if self.at("lambda", "\\", "new", "while", "ifzero"):
                fn = App(fn, self.control())
                break
            fn = App(fn, self.prefix())
        return fn

    def prefix(self) -> Term:
        if self.at("!"):
            self.i += 1
            return Deref(self.prefix())
        return self.atom()

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return NumLit(int(t.text))
        if t.kind == "name":
            self.i += 1
            return Ident(t.text)
        if self.at("skip"):
            self.i += 1
            return SKIP
        if self.at("random"):
            self.i += 1
            return RANDOM
        if self.at("diverge"):
            self.i += 1
            return OMEGA
        if self.at("[-]"):
            self.i += 1
            return HOLE
        if self.at("("):
            self.i += 1
            m = self.term()
            self.eat(")")
            return m
        if self.at("mkvar", "pair"):
            kw = self.eat(t.text).text
            self.eat("(")
            a = self.term()
            self.eat(",")
            b = self.term()
            self.eat(")")
            return Mkvar(a, b) if kw == "mkvar" else ArithOp("pair", a, b)
        if self.at("fst", "snd", "even"):
            op = self.eat(t.text).text
            self.eat("(")
            a = self.term()
            self.eat(")")
            return ArithOp(op, a)
        self.error("expected term")


def parse(text: str) -> Term:
    p = _Parser(text)
    m = p.term()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return m


def parse_type(text: str) -> Type:
    p = _Parser(text)
    a = p.type_()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return a


def parse_context(text: str) -> list[tuple[str, Type]]:
    """Parse ``x:var, f:comm -o comm`` into a context list."""
    text = text.strip()
    if not text:
        return []
    p = _Parser(text)
    ctx = []
    while True:
        x = p.name()
        p.eat(":")
        ctx.append((x, p.type_()))
        if p.at(","):
            p.i += 1
            continue
        break
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    names = [x for x, _ in ctx]
    if len(set(names)) != len(names):
        raise ParseError("duplicate identifier in context", 1, 1)
    return ctx
