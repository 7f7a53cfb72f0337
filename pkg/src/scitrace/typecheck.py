"""Affine type inference.

Instead of splitting the context at every application, ``infer`` returns the
set of context identifiers a term actually uses; an application is legal
only when function and argument use disjoint sets.  Weakening and exchange
are then admissible without any extra rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .syntax import (
    App, Arrow, ArithOp, Assign, COMM, Deref, Hole, Ident, IfZero, Lambda,
    Mkvar, NAT, New, NumLit, Random, Seq, Skip, Term, Type, VAR, While,
)

SEQ_RESULT_TYPES = (COMM, NAT, VAR)
NEW_BODY_TYPES = (COMM, NAT)


class TypeCheckError(Exception):
    def __init__(self, reason: str, term: Term = None):
        where = f" in {term}" if term is not None else ""
        super().__init__(reason + where)
        self.reason = reason
        self.term = term


@dataclass(frozen=True)
class Typing:
    type: Type
    used: frozenset


def _as_dict(ctx) -> dict:
    if isinstance(ctx, Mapping):
        return dict(ctx)
    d = {}
    for x, a in ctx:
        if x in d:
            raise TypeCheckError(f"identifier {x} occurs twice in the context")
        d[x] = a
    return d


def infer(ctx: Union[Mapping, Iterable], m: Term) -> Typing:
    """Type of ``m`` under ``ctx`` together with the identifiers it uses."""
    return _infer(_as_dict(ctx), m)


def type_of(ctx, m: Term) -> Type:
    return infer(ctx, m).type


def check(ctx, m: Term, expected: Type) -> Typing:
    t = infer(ctx, m)
    if t.type != expected:
        raise TypeCheckError(f"expected {expected}, found {t.type}", m)
    return t


def _expect(env, m, want) -> frozenset:
    t = _infer(env, m)
    if t.type != want:
        raise TypeCheckError(f"expected {want}, found {t.type}", m)
    return t.used


def _infer(env: dict, m: Term) -> Typing:
    if isinstance(m, NumLit):
        if m.n < 0:
            raise TypeCheckError("negative literal", m)
        return Typing(NAT, frozenset())
    if isinstance(m, Random):
        return Typing(NAT, frozenset())
    if isinstance(m, Skip):
        return Typing(COMM, frozenset())
    if isinstance(m, ArithOp):
        used = _expect(env, m.left, NAT)
        if m.right is not None:
            used |= _expect(env, m.right, NAT)
        return Typing(NAT, used)
    if isinstance(m, Seq):
        used = _expect(env, m.first, COMM)
        t = _infer(env, m.rest)
        if t.type not in SEQ_RESULT_TYPES:
            raise TypeCheckError(f"sequence cannot end at type {t.type}", m)
        return Typing(t.type, used | t.used)
    if isinstance(m, Assign):
        used = _expect(env, m.target, VAR) | _expect(env, m.value, NAT)
        return Typing(COMM, used)
    if isinstance(m, Deref):
        return Typing(NAT, _expect(env, m.body, VAR))
    if isinstance(m, While):
        used = _expect(env, m.guard, NAT) | _expect(env, m.body, COMM)
        return Typing(COMM, used)
    if isinstance(m, IfZero):
        used = _expect(env, m.guard, NAT)
        a = _infer(env, m.then)
        b = _infer(env, m.orelse)
        if a.type != b.type:
            raise TypeCheckError(f"branches disagree: {a.type} vs {b.type}", m)
        if a.type not in SEQ_RESULT_TYPES:
            raise TypeCheckError(f"conditional at non-base type {a.type}", m)
        return Typing(a.type, used | a.used | b.used)
    if isinstance(m, Ident):
        if m.name not in env:
            raise TypeCheckError(f"unbound identifier {m.name}", m)
        return Typing(env[m.name], frozenset((m.name,)))
    if isinstance(m, Lambda):
        inner = dict(env)
        inner[m.name] = m.annot
        t = _infer(inner, m.body)
        return Typing(Arrow(m.annot, t.type), t.used - {m.name})
    if isinstance(m, App):
        f = _infer(env, m.fn)
        if not isinstance(f.type, Arrow):
            raise TypeCheckError(f"applying a term of type {f.type}", m)
        a = _infer(env, m.arg)
        if a.type != f.type.domain:
            raise TypeCheckError(
                f"argument has type {a.type}, expected {f.type.domain}", m)
        shared = f.used & a.used
        if shared:
            names = ", ".join(sorted(shared))
            raise TypeCheckError(f"function and argument share {names}", m)
        return Typing(f.type.codomain, f.used | a.used)
    if isinstance(m, New):
        inner = dict(env)
        inner[m.name] = VAR
        t = _infer(inner, m.body)
        if t.type not in NEW_BODY_TYPES:
            raise TypeCheckError(f"block body has type {t.type}", m)
        return Typing(t.type, t.used - {m.name})
    if isinstance(m, Mkvar):
        used = _expect(env, m.writer, Arrow(NAT, COMM)) | _expect(env, m.reader, NAT)
        return Typing(VAR, used)
    if isinstance(m, Hole):
        raise TypeCheckError("a hole has no type", m)
    raise TypeCheckError(f"unknown term {m!r}")


def is_pure_sci(m: Term) -> bool:
    """No mkvar and no random anywhere inside."""
    from .syntax import contains

    return not contains(m, Mkvar) and not contains(m, Random)
