"""Natural-number codes, definable retractions and definability terms.

``in_term``/``out_term`` exhibit every type as a retract of ``nat`` using
``random`` and ``mkvar``.  ``test_term``/``produce_term`` build the pure
terms that recognise or generate a given trace up to the read-write orders.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import isqrt
from typing import Optional, Sequence

from .events import (
    Bounds, FunEv, NatVal, Read, Write, alphabet, event_type_ok,
)
from .operational import PreconditionError, Store
from .syntax import (
    App, Arrow, ArithOp, Assign, Base, COMM, Deref, Ident, IfZero, Lambda,
    Mkvar, NAT, New, NumLit, OMEGA, RANDOM, SKIP, Seq, Term, Type, VAR, While,
    arrow_args, seq, substitute,
)


# --------------------------------------------------------------------------
# codes
# --------------------------------------------------------------------------

def code_pair(m: int, n: int) -> int:
    """Cantor pairing."""
    return (m + n) * (m + n + 1) // 2 + n


def decode_pair(k: int) -> tuple:
    w = (isqrt(8 * k + 1) - 1) // 2
    n = k - w * (w + 1) // 2
    return w - n, n


def code_seq(xs: Sequence[int]) -> int:
    """``<length, fold>`` where the fold pairs each new element onto the code so far."""
    acc = 0
    for a in xs:
        acc = code_pair(acc, a)
    return code_pair(len(xs), acc)


def _decode_seq(k: int) -> Optional[list]:
    length, acc = decode_pair(k)
    out = []
    for _ in range(length):
        acc, a = decode_pair(acc)
        out.append(a)
    if acc != 0:
        return None
    out.reverse()
    return out


def decode_seq(k: int) -> list:
    """Inverse of ``code_seq``; values outside its image decode to ``[]``."""
    r = _decode_seq(k)
    return [] if r is None else r


def is_seq_code(k: int) -> bool:
    r = _decode_seq(k)
    return r is not None and code_seq(r) == k


def event_code(a: Type, e) -> int:
    if a == NAT:
        return e.n
    if a == COMM:
        return 0
    if a == VAR:
        return 2 * e.n + (1 if isinstance(e, Write) else 0)
    return code_pair(code_seq([event_code(a.domain, x) for x in e.args]),
                     event_code(a.codomain, e.out))


def decode_event(a: Type, k: int):
    if a == NAT:
        return NatVal(k)
    if a == COMM:
        from .events import Star

        return Star
    if a == VAR:
        return Write(k // 2) if k % 2 else Read(k // 2)
    s, b = decode_pair(k)
    return FunEv(tuple(decode_event(a.domain, c) for c in decode_seq(s)),
                 decode_event(a.codomain, b))


def subtypes(a: Type) -> list:
    out = [a]
    if isinstance(a, Arrow):
        out += subtypes(a.domain) + subtypes(a.codomain)
    return out


def code_universe(a: Type, bounds: Bounds) -> set:
    """Codes of every bounded event at every subtype of ``a``."""
    codes = set()
    for t in subtypes(a):
        codes |= {event_code(t, e) for e in alphabet(t, bounds)}
    return codes


# --------------------------------------------------------------------------
# names
# --------------------------------------------------------------------------

class Names:
    """Hands out identifiers, preferring the requested one when it is free."""

    def __init__(self, taken=()):
        self.taken = set(taken)
        self.counter = itertools.count(1)

    def take(self, pref: str) -> str:
        name = pref
        while name in self.taken:
            name = f"{pref}{next(self.counter)}"
        self.taken.add(name)
        return name


def _i(name):
    return Ident(name)


def _num(n):
    return NumLit(n)


def _op(op, a, b=None):
    return ArithOp(op, a, b)


def _deref(name):
    return Deref(Ident(name))


def _news(names, body):
    for x in reversed(list(names)):
        body = New(x, body)
    return body


# --------------------------------------------------------------------------
# retractions
# --------------------------------------------------------------------------

def in_term(a: Type, x: str = "x", names: Optional[Names] = None) -> Term:
    """``x:a |- in_a : nat``."""
    names = names or Names({x})
    names.taken.add(x)
    if a == NAT:
        return _i(x)
    if a == COMM:
        return Seq(_i(x), _num(0))
    if a == VAR:
        r = names.take("r")
        write_branch = New(r, seq(
            Assign(_i(r), RANDOM),
            Assign(_i(x), _deref(r)),
            _op("+", _op("*", _num(2), _deref(r)), _num(1))))
        return IfZero(RANDOM, _op("*", _num(2), _deref(x)), write_branch)
    if a == Arrow(NAT, NAT):
        return _in_nat_nat(_i(x), names)
    n = names.take("n")
    xb = names.take("xb")
    inner = in_term(a.codomain, xb, names)
    inner = substitute(inner, xb, App(_i(x), out_term(a.domain, n, names)))
    return _in_nat_nat(Lambda(n, NAT, inner), names)


def _in_nat_nat(f: Term, names: Names) -> Term:
    s, xv, r = names.take("s"), names.take("v"), names.take("r")
    probe = New(r, seq(
        Assign(_i(r), RANDOM),
        Assign(_i(s), _op("pair", _op("+", _op("fst", _deref(s)), _num(1)),
                          _op("pair", _op("snd", _deref(s)), _deref(r)))),
        _deref(r)))
    return New(s, New(xv, seq(
        Assign(_i(xv), App(f, probe)),
        _op("pair", _deref(s), _deref(xv)))))


def out_term(a: Type, y: str = "y", names: Optional[Names] = None) -> Term:
    """``y:nat |- out_a : a``."""
    names = names or Names({y})
    names.taken.add(y)
    if a == NAT:
        return _i(y)
    if a == COMM:
        return IfZero(_i(y), SKIP, OMEGA)
    if a == VAR:
        k, z = names.take("k"), names.take("z")
        writer = Lambda(k, NAT, IfZero(
            _op("=", _i(y), _op("+", _op("*", _num(2), _i(k)), _num(1))), OMEGA, SKIP))
        reader = New(z, seq(
            Assign(_i(z), _i(y)),
            IfZero(_op("even", _deref(z)), Seq(OMEGA, _num(0)), _op("/", _deref(z), _num(2)))))
        return Mkvar(writer, reader)
    if a == Arrow(NAT, NAT):
        return _out_nat_nat(y, names)
    arg = names.take("a")
    yb = names.take("yb")
    inner = out_term(a.codomain, yb, names)
    call = App(_out_nat_nat(y, names), in_term(a.domain, arg, names))
    return Lambda(arg, a.domain, substitute(inner, yb, call))


def _out_nat_nat(y: str, names: Names) -> Term:
    z = names.take("z")
    p, l, r, i = (names.take(v) for v in ("p", "l", "q", "i"))
    length = _op("fst", _op("fst", _deref(p)))
    reverse = While(_op("=", _deref(i), _num(0)), seq(
        Assign(_i(r), _op("pair", _op("snd", _deref(l)), _deref(r))),
        Assign(_i(l), _op("fst", _deref(l))),
        Assign(_i(i), _op("-", _deref(i), _num(1)))))
    compare = While(_op("=", _deref(i), _num(0)), IfZero(
        _op("=", _i(z), _op("fst", _deref(r))),
        OMEGA,
        seq(Assign(_i(r), _op("snd", _deref(r))),
            Assign(_i(i), _op("-", _deref(i), _num(1))))))
    body = seq(
        Assign(_i(p), _i(y)),
        Assign(_i(l), _op("snd", _op("fst", _deref(p)))),
        Assign(_i(i), length),
        reverse,
        Assign(_i(i), length),
        compare,
        _op("snd", _deref(p)))
    return Lambda(z, NAT, _news((p, l, r, i), body))


def retraction_composite(a: Type) -> Term:
    """``x:a |- out_a[in_a/y] : a``."""
    names = Names({"x", "y"})
    return substitute(out_term(a, "y", names), "y", in_term(a, "x", names))


def retraction_bounds_ok(bounds: Bounds) -> bool:
    return bounds.max_unfold >= bounds.max_arg_len


def retraction_check(a: Type, bounds: Bounds) -> dict:
    """Compare ``in ; out`` with the identity on the bounded alphabet of ``a``."""
    from .denotational import denote

    if not retraction_bounds_ok(bounds):
        raise PreconditionError("max_unfold must be at least max_arg_len")
    comp = denote([("x", a)], retraction_composite(a), a, bounds,
                  value_limit=None, random_extra=code_universe(a, bounds),
                  reduce_redexes=True)
    alpha = set(alphabet(a, bounds))
    got = {}
    extra = []
    for el in comp.elems:
        (s,) = el.inputs
        if len(s) == 1 and s[0] == el.out:
            got[el.out] = True
        else:
            extra.append(el)
    missing = sorted(alpha - set(got), key=repr)
    return {"type": str(a), "checked": len(alpha), "missing": missing,
            "extra": extra, "ok": not missing and not extra}


# --------------------------------------------------------------------------
# test and produce
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProduceSpec:
    ctx: tuple
    term: Term
    init: Store
    final: Store


def check_term(sigma) -> Term:
    """Diverge unless every variable holds the value ``sigma`` gives it."""
    out = SKIP
    for x in sorted(sigma, reverse=True):
        out = IfZero(_op("=", _deref(x), _num(sigma[x])), OMEGA, out)
    return out


def set_term(sigma) -> Term:
    return seq(*[Assign(_i(x), _num(sigma[x])) for x in sorted(sigma)]) if sigma else SKIP


def _validate(a: Type, act, bounds: Optional[Bounds]):
    for e in act:
        if not event_type_ok(a, e):
            raise PreconditionError(f"event {e!r} does not belong to {a}")
    if bounds is not None:
        if len(act) > bounds.max_trace:
            raise PreconditionError("trace longer than max_trace")
        alpha = set(alphabet(a, bounds))
        if any(e not in alpha for e in act):
            raise PreconditionError("trace exceeds the bounds")


def test_term(a: Type, act, x: str = "x", bounds: Optional[Bounds] = None,
              names: Optional[Names] = None) -> Term:
    """``x:a |- test(act) : comm`` of pure SCI."""
    act = tuple(act)
    _validate(a, act, bounds)
    names = names or Names({x})
    names.taken.add(x)
    if not act:
        return SKIP
    return seq(*[_test_one(a, e, x, names) for e in act])


def _test_one(a: Type, e, x: str, names: Names) -> Term:
    if a == COMM:
        return _i(x)
    if a == NAT:
        return IfZero(_op("=", _i(x), _num(e.n)), OMEGA, SKIP)
    if a == VAR:
        if isinstance(e, Write):
            return Assign(_i(x), _num(e.n))
        return IfZero(_op("=", _deref(x), _num(e.n)), OMEGA, SKIP)
    spec = _produce(a.domain, e.args, names)
    z = names.take("w")
    observe = App(Lambda(z, a.codomain, test_term(a.codomain, (e.out,), z, names=names)),
                  App(_i(x), spec.term))
    body = seq(set_term(spec.init), observe, check_term(spec.final))
    return _news([v for v, _ in spec.ctx], body)


def produce_term(a: Type, act, bounds: Optional[Bounds] = None,
                 names: Optional[Names] = None) -> ProduceSpec:
    """Context, term and stores generating ``act`` up to the positive order."""
    act = tuple(act)
    _validate(a, act, bounds)
    return _produce(a, act, names or Names())


def _base_diverge(b: Type, names: Names, ctx: list) -> Term:
    if b == COMM:
        return OMEGA
    if b == NAT:
        return Seq(OMEGA, _num(0))
    v = names.take("v")
    ctx.append(v)
    return Seq(OMEGA, _i(v))


def _produce(a: Type, act: tuple, names: Names) -> ProduceSpec:
    if len(act) == 1:
        return _produce_one(a, act[0], names)
    args, base = arrow_args(a)
    if not act:
        extra: list = []
        body = _base_diverge(base, names, extra)
        for t in reversed(args):
            body = Lambda(names.take("u"), t, body)
        zero = Store({v: 0 for v in extra})
        return ProduceSpec(tuple((v, VAR) for v in extra), body, zero, zero)
    specs = [_produce_one(a, e, names) for e in act]
    c = names.take("c")
    ys = [names.take("u") for _ in args]
    shared = sorted({v for sp in specs for v, _ in sp.ctx})

    def full(sigma):
        return {v: sigma.get(v, 0) for v in shared}

    def applied(sp):
        t = sp.term
        for y in ys:
            t = App(t, _i(y))
        return t

    extra = []
    chain = _base_diverge(base, names, extra)
    for i in range(len(specs), 0, -1):
        sp = specs[i - 1]
        if i == 1:
            branch = applied(sp)
        else:
            branch = seq(check_term(full(specs[i - 2].final)),
                         set_term(full(sp.init)), applied(sp))
        chain = IfZero(_op("=", _deref(c), _num(i)), chain, branch)
    body = Seq(Assign(_i(c), _op("+", _deref(c), _num(1))), chain)
    for y, t in reversed(list(zip(ys, args))):
        body = Lambda(y, t, body)
    all_vars = shared + extra + [c]
    init = full(specs[0].init)
    final = full(specs[-1].final)
    init.update({v: 0 for v in extra})
    final.update({v: 0 for v in extra})
    init[c] = 0
    final[c] = len(specs)
    return ProduceSpec(tuple((v, VAR) for v in all_vars), body, Store(init), Store(final))


def _produce_one(a: Type, e, names: Names) -> ProduceSpec:
    if isinstance(a, Base):
        if a == VAR:
            x = names.take("x")
        y = names.take("y")
        bump = Assign(_i(y), _op("+", _deref(y), _num(1)))
        if a == COMM:
            return ProduceSpec(((y, VAR),), bump, Store({y: 0}), Store({y: 1}))
        if a == NAT:
            return ProduceSpec(((y, VAR),), Seq(bump, _num(e.n)), Store({y: 0}), Store({y: 1}))
        start = e.n + 1 if isinstance(e, Write) else e.n
        return ProduceSpec(((x, VAR), (y, VAR)), Seq(bump, _i(x)),
                           Store({x: start, y: 0}), Store({x: e.n, y: 1}))
    xa = names.take("p")
    check_arg = test_term(a.domain, e.args, xa, names=names)
    pb = _produce(a.codomain, (e.out,), names)
    rest_args, _ = arrow_args(a.codomain)
    if not rest_args:
        body = Seq(check_arg, pb.term)
    else:
        zs = [names.take("u") for _ in rest_args]
        t = pb.term
        for z in zs:
            t = App(t, _i(z))
        body = Seq(check_arg, t)
        for z, ty in reversed(list(zip(zs, rest_args))):
            body = Lambda(z, ty, body)
    return ProduceSpec(pb.ctx, Lambda(xa, a.domain, body), pb.init, pb.final)
