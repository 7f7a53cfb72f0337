"""Events, traces, bounds, state transitions, coherence and read-write orders.

Events are small named tuples so they hash quickly; each carries a tag so
that ``NatVal(1)`` and ``Read(1)`` never compare equal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Mapping, NamedTuple, Optional, Sequence, Union

from .syntax import Arrow, Base, COMM, NAT, VAR, Type


class NatVal(NamedTuple):
    n: int
    tag: str = "n"


class StarEv(NamedTuple):
    tag: str = "*"


class Read(NamedTuple):
    n: int
    tag: str = "r"


class Write(NamedTuple):
    n: int
    tag: str = "w"


class FunEv(NamedTuple):
    args: tuple
    out: "Event"
    tag: str = "f"


Star = StarEv()

Event = Union[NatVal, StarEv, Read, Write, FunEv]
Trace = tuple  # tuple of Event


@dataclass(frozen=True)
class Bounds:
    """Enumeration limits that finitize denotations and evaluation."""

    max_nat: int = 2
    max_trace: int = 3
    max_arg_len: int = 2
    max_unfold: int = 2
    fuel: int = 10000

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"bound {k} must be a nonnegative integer, got {v!r}")

    def to_json(self) -> dict:
        return {
            "maxNat": self.max_nat,
            "maxTraceLen": self.max_trace,
            "maxArgLen": self.max_arg_len,
            "maxWhileUnfold": self.max_unfold,
            "fuel": self.fuel,
        }

    def replace(self, **kw) -> "Bounds":
        d = asdict(self)
        d.update(kw)
        return Bounds(**d)


# --------------------------------------------------------------------------
# alphabets
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _alphabet(a: Type, max_nat: int, max_arg: int) -> tuple:
    if a == NAT:
        return tuple(NatVal(n) for n in range(max_nat + 1))
    if a == COMM:
        return (Star,)
    if a == VAR:
        return tuple(Read(n) for n in range(max_nat + 1)) + tuple(
            Write(n) for n in range(max_nat + 1))
    if isinstance(a, Arrow):
        args = _traces(a.domain, max_arg, max_nat, max_arg)
        outs = _alphabet(a.codomain, max_nat, max_arg)
        return tuple(FunEv(s, b) for s in args for b in outs)
    raise TypeError(f"not a type: {a!r}")


@lru_cache(maxsize=None)
def _traces(a: Type, max_len: int, max_nat: int, max_arg: int) -> tuple:
    alpha = _alphabet(a, max_nat, max_arg)
    out = []
    for k in range(max_len + 1):
        out.extend(itertools.product(alpha, repeat=k))
    return tuple(out)


def alphabet(a: Type, bounds: Bounds) -> tuple:
    """The bounded alphabet of ``a``, in a fixed order."""
    return _alphabet(a, bounds.max_nat, bounds.max_arg_len)


def traces(a: Type, bounds: Bounds, max_len: Optional[int] = None) -> tuple:
    """All traces over ``alphabet(a)`` of length at most ``max_len``."""
    if max_len is None:
        max_len = bounds.max_trace
    return _traces(a, max_len, bounds.max_nat, bounds.max_arg_len)


def event_type_ok(a: Type, e) -> bool:
    """Membership of ``e`` in the unbounded alphabet of ``a``."""
    if a == NAT:
        return isinstance(e, NatVal)
    if a == COMM:
        return isinstance(e, StarEv)
    if a == VAR:
        return isinstance(e, (Read, Write))
    return (isinstance(e, FunEv)
            and all(event_type_ok(a.domain, x) for x in e.args)
            and event_type_ok(a.codomain, e.out))


def max_value(e) -> int:
    """Largest natural mentioned anywhere inside ``e``."""
    if isinstance(e, FunEv):
        return max([max_value(e.out)] + [max_value(x) for x in e.args])
    if isinstance(e, StarEv):
        return 0
    return e.n


# --------------------------------------------------------------------------
# state transitions
# --------------------------------------------------------------------------

def strans(n: int, s: Sequence) -> Optional[int]:
    """The final cell value after ``s`` starting from ``n``, or None if stuck."""
    for e in s:
        if isinstance(e, Read):
            if e.n != n:
                return None
        elif isinstance(e, Write):
            n = e.n
        else:
            raise TypeError(f"not a var event: {e!r}")
    return n


def is_cell_trace(s: Sequence) -> bool:
    return strans(0, s) is not None


def strans_store(sigma: Mapping, tup, sigma2: Mapping) -> bool:
    """Componentwise transition check; ``tup`` is keyed by name or aligned with ``sigma``."""
    if set(sigma) != set(sigma2):
        return False
    if not isinstance(tup, Mapping):
        tup = dict(zip(sigma, tup))
    for x, n in sigma.items():
        if strans(n, tup.get(x, ())) != sigma2[x]:
            return False
    return True


def strans_store_result(sigma: Mapping, tup: Mapping) -> Optional[dict]:
    """The unique ``sigma2`` with ``sigma -tup-> sigma2``, or None."""
    out = {}
    for x, n in sigma.items():
        m = strans(n, tup.get(x, ()))
        if m is None:
            return None
        out[x] = m
    return out


# --------------------------------------------------------------------------
# coherence
# --------------------------------------------------------------------------

def coherent_event(a: Type, e1, e2) -> bool:
    if a == NAT:
        return e1 == e2
    if a == COMM:
        return True
    if a == VAR:
        if isinstance(e1, Read) and isinstance(e2, Read):
            return e1.n == e2.n
        return True
    s_coh = coherent(a.domain, e1.args, e2.args)
    if s_coh and not coherent_event(a.codomain, e1.out, e2.out):
        return False
    if s_coh and e1.out == e2.out and e1.args != e2.args:
        return False
    return True


def coherent(a: Type, s: Sequence, t: Sequence) -> bool:
    """Object-space coherence of two traces over the alphabet of ``a``."""
    for x, y in zip(s, t):
        if x != y:
            return coherent_event(a, x, y)
    return True


# --------------------------------------------------------------------------
# read-write orders
# --------------------------------------------------------------------------

def leq_event(a: Type, e1, e2, positive: bool) -> bool:
    if a == VAR:
        if e1 == e2:
            return True
        return (positive and isinstance(e1, Read) and isinstance(e2, Write)
                and e1.n == e2.n)
    if isinstance(a, Base):
        return e1 == e2
    return (_leq_seq(a.domain, e1.args, e2.args, not positive)
            and leq_event(a.codomain, e1.out, e2.out, positive))


def _leq_seq(a: Type, s, t, positive: bool) -> bool:
    return len(s) == len(t) and all(leq_event(a, x, y, positive) for x, y in zip(s, t))


def leq_plus(a: Type, s: Sequence, t: Sequence) -> bool:
    return _leq_seq(a, tuple(s), tuple(t), True)


def leq_minus(a: Type, s: Sequence, t: Sequence) -> bool:
    return _leq_seq(a, tuple(s), tuple(t), False)


# --------------------------------------------------------------------------
# rendering and parsing
# --------------------------------------------------------------------------

def render_event(e) -> str:
    if isinstance(e, NatVal):
        return str(e.n)
    if isinstance(e, StarEv):
        return "*"
    if isinstance(e, Read):
        return f"R({e.n})"
    if isinstance(e, Write):
        return f"W({e.n})"
    if isinstance(e, FunEv):
        return f"({render_trace(e.args)}, {render_event(e.out)})"
    raise TypeError(f"not an event: {e!r}")


def render_trace(s: Sequence) -> str:
    return " ".join(render_event(e) for e in s)


def event_key(e):
    """Sort key ordering events canonically (numbers numerically)."""
    if isinstance(e, FunEv):
        return (4, len(e.args), tuple(event_key(x) for x in e.args), event_key(e.out))
    if isinstance(e, StarEv):
        return (0,)
    if isinstance(e, NatVal):
        return (1, e.n)
    if isinstance(e, Read):
        return (2, e.n)
    return (3, e.n)


def trace_key(s: Sequence):
    return (len(s), tuple(event_key(e) for e in s))


class TraceSyntaxError(ValueError):
    pass


def parse_trace(text: str) -> tuple:
    """Parse a space-separated trace literal such as ``R(1) W(2)`` or ``(* *, *)``."""
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def number() -> int:
        nonlocal pos
        start = pos
        while pos < len(text) and text[pos].isdigit():
            pos += 1
        if start == pos:
            raise TraceSyntaxError(f"expected a number at offset {start}")
        return int(text[start:pos])

    def expect(ch: str):
        nonlocal pos
        skip_ws()
        if not text.startswith(ch, pos):
            raise TraceSyntaxError(f"expected {ch!r} at offset {pos}")
        pos += len(ch)

    def event():
        nonlocal pos
        skip_ws()
        if pos >= len(text):
            raise TraceSyntaxError("unexpected end of trace")
        c = text[pos]
        if c == "*":
            pos += 1
            return Star
        if c.isdigit():
            return NatVal(number())
        if c in "RW" and text.startswith("(", pos + 1):
            pos += 2
            skip_ws()
            n = number()
            expect(")")
            return Read(n) if c == "R" else Write(n)
        if c == "(":
            pos += 1
            args = seq(",")
            expect(",")
            out = event()
            expect(")")
            return FunEv(args, out)
        raise TraceSyntaxError(f"unexpected {c!r} at offset {pos}")

    def seq(stop: str) -> tuple:
        out = []
        while True:
            skip_ws()
            if pos >= len(text) or text[pos] in stop:
                return tuple(out)
            out.append(event())

    result = seq(")")
    skip_ws()
    if pos != len(text):
        raise TraceSyntaxError(f"trailing input at offset {pos}")
    return result


def parse_event(text: str):
    s = parse_trace(text)
    if len(s) != 1:
        raise TraceSyntaxError("expected exactly one event")
    return s[0]
