"""Equivalence checking, the goodness harness and coherence checking.

Every verdict here is relative to the bounds it was computed with.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .denotational import Denotation, Elem, denote, elem_key
from .events import (
    Bounds, FunEv, NatVal, Read, Star, Write, coherent_event, leq_minus,
    render_event, strans_store_result,
)
from .operational import PreconditionError, Store, evaluate
from .syntax import (
    App, ArithOp, Assign, Arrow, COMM, Deref, HOLE, Ident, IfZero, Lambda,
    Mkvar, NAT, New, NumLit, OMEGA, Random, SKIP, Seq, Term, VAR, contains,
    seq,
)
from .typecheck import TypeCheckError, infer


# --------------------------------------------------------------------------
# equivalence
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivVerdict:
    equal: bool
    bounds: Bounds
    witness: Optional[Elem] = None
    side: Optional[str] = None

    @property
    def status(self) -> str:
        return "EqualAtBounds" if self.equal else "Differs"

    def swapped(self) -> "EquivVerdict":
        if self.equal:
            return self
        other = "right" if self.side == "left" else "left"
        return EquivVerdict(False, self.bounds, self.witness, other)

    def to_json(self) -> dict:
        out = {"status": self.status, "bounds": self.bounds.to_json()}
        if not self.equal:
            out["witness"] = {
                "inputs": [[render_event(e) for e in s] for s in self.witness.inputs],
                "out": render_event(self.witness.out),
            }
            out["side"] = self.side
        return out

    def text(self) -> str:
        b = self.bounds
        where = (f"maxNat={b.max_nat} maxTrace={b.max_trace} maxArgLen={b.max_arg_len} "
                 f"maxUnfold={b.max_unfold}")
        if self.equal:
            return f"equal at bounds ({where})"
        return f"differs at bounds ({where}): {self.witness.render()} only on the {self.side}"


def compare(dm: Denotation, dn: Denotation) -> EquivVerdict:
    left = dm.elems - dn.elems
    right = dn.elems - dm.elems
    if left:
        return EquivVerdict(False, dm.bounds, min(left, key=elem_key), "left")
    if right:
        return EquivVerdict(False, dm.bounds, min(right, key=elem_key), "right")
    return EquivVerdict(True, dm.bounds)


def equiv(ctx, m: Term, n: Term, bounds: Bounds = Bounds(), **kw) -> EquivVerdict:
    """Compare bounded denotations of two terms of the same type."""
    try:
        a = infer(ctx, m).type
        b = infer(ctx, n).type
    except TypeCheckError as exc:
        raise PreconditionError(f"ill-typed term: {exc}") from exc
    if a != b:
        raise PreconditionError(f"types differ: {a} vs {b}")
    return compare(denote(ctx, m, a, bounds, **kw), denote(ctx, n, a, bounds, **kw))


# --------------------------------------------------------------------------
# goodness
# --------------------------------------------------------------------------

@dataclass
class GoodnessReport:
    ok: bool = True
    stores_checked: int = 0
    mismatches: list = field(default_factory=list)
    unconfirmed: list = field(default_factory=list)

    def text(self) -> str:
        lines = [f"good: {self.ok} ({self.stores_checked} stores)"]
        for kind, info in self.mismatches:
            lines.append(f"  mismatch ({kind}): {info}")
        for info in self.unconfirmed:
            lines.append(f"  unconfirmed: {info}")
        return "\n".join(lines)


def _value_event(v: Term):
    if isinstance(v, NumLit):
        return NatVal(v.n)
    return Star


def _witness_beyond(ctx, m, a, bounds, sigma, final, out, rounds=3, **kw) -> bool:
    """Look for a witness of a run whose trace may not fit the bounds.

    The evaluator does not record accesses, so a run needing a longer trace
    than ``bounds`` allows shows up as unwitnessed.  Retry with max_trace
    doubled a few times and max_nat raised to every value the run mentions.
    """
    names = [x for x, _ in ctx]
    seen = list(sigma.values()) + list(final.values())
    if isinstance(out, NatVal):
        seen.append(out.n)
    b = bounds.replace(max_nat=max([bounds.max_nat] + seen))
    for _ in range(rounds):
        b = b.replace(max_trace=max(1, 2 * b.max_trace))
        for el in denote(ctx, m, a, b, **kw).elems:
            if el.out == out and strans_store_result(sigma, dict(zip(names, el.inputs))) == final:
                return True
    return False


def goodness_check(ctx, m: Term, bounds: Bounds = Bounds(), store_max: Optional[int] = None,
                   **kw) -> GoodnessReport:
    """Both directions of the goodness biconditional over all small stores.

    Var-typed terms are reduced to their dereference and to assignments of
    every value up to ``bounds.max_nat``, as the definition prescribes.
    """
    ctx = list(ctx)
    if any(a != VAR for _, a in ctx):
        raise PreconditionError("goodness needs a context of var identifiers")
    try:
        a = infer(ctx, m).type
    except TypeCheckError as exc:
        raise PreconditionError(f"ill-typed term: {exc}") from exc
    if a == VAR:
        report = goodness_check(ctx, Deref(m), bounds, store_max, **kw)
        for n in range(bounds.max_nat + 1):
            sub = goodness_check(ctx, Assign(m, NumLit(n)), bounds, store_max, **kw)
            report.ok &= sub.ok
            report.stores_checked += sub.stores_checked
            report.mismatches += sub.mismatches
            report.unconfirmed += sub.unconfirmed
        return report
    if a not in (COMM, NAT):
        raise PreconditionError(f"goodness is defined at ground types, not {a}")
    store_max = bounds.max_nat if store_max is None else store_max
    d = denote(ctx, m, a, bounds, **kw)
    names = [x for x, _ in ctx]
    report = GoodnessReport()
    for values in itertools.product(range(store_max + 1), repeat=len(names)):
        sigma = Store(zip(names, values))
        report.stores_checked += 1
        outcome = evaluate(sigma, m, bounds)
        realised = set()
        for el in d.elems:
            final = strans_store_result(sigma, dict(zip(names, el.inputs)))
            if final is not None:
                realised.add((Store(final), el.out))
        operational = {(s, _value_event(v)) for s, v in outcome.results}
        for s, e in operational - realised:
            if _witness_beyond(ctx, m, a, bounds, sigma, s, e, **kw):
                continue
            report.ok = False
            report.mismatches.append(("no witness", (sigma, s, render_event(e))))
        for s, e in realised - operational:
            info = (sigma, s, render_event(e))
            if outcome.exhausted:
                report.unconfirmed.append(info)
            else:
                report.ok = False
                report.mismatches.append(("not realised", info))
    return report


# --------------------------------------------------------------------------
# coherence
# --------------------------------------------------------------------------

def coherence_of(d: Denotation) -> bool:
    """Pairwise coherence of the outputs of a closed-term denotation."""
    outs = sorted({el.out for el in d.elems}, key=repr)
    return all(coherent_event(d.type, e1, e2)
               for e1, e2 in itertools.combinations(outs, 2))


def incoherent_pairs(d: Denotation) -> list:
    outs = sorted({el.out for el in d.elems}, key=repr)
    return [(e1, e2) for e1, e2 in itertools.combinations(outs, 2)
            if not coherent_event(d.type, e1, e2)]


def close_over(ctx, m: Term) -> Term:
    """Abstract the context away, giving a closed term."""
    for x, a in reversed(list(ctx)):
        m = Lambda(x, a, m)
    return m


def coherence_check(m: Term, bounds: Bounds = Bounds(), ctx=()) -> bool:
    """Pairwise coherence of a closed random-free term's bounded denotation.

    Open terms are first closed by abstracting their context.
    """
    if contains(m, Random):
        raise PreconditionError("coherence is only claimed for terms without random")
    closed = close_over(ctx, m)
    return coherence_of(denote([], closed, None, bounds))


# --------------------------------------------------------------------------
# separating contexts
# --------------------------------------------------------------------------

def scripted_variable(events, counter: str) -> Term:
    """A bad variable that accepts exactly the given events, in order.

    The ``i``-th use must match the ``i``-th event; anything else diverges.
    A counter cell keeps track of how many uses have happened.
    """
    k = "k_" + counter
    c = Ident(counter)
    bump = Assign(c, ArithOp("+", Deref(c), NumLit(1)))
    write_chain: Term = OMEGA
    read_chain: Term = Seq(OMEGA, NumLit(0))
    for i, e in reversed(list(enumerate(events))):
        at_step = ArithOp("=", Deref(c), NumLit(i))
        if isinstance(e, Write):
            ok = IfZero(ArithOp("=", Ident(k), NumLit(e.n)), OMEGA, bump)
            write_chain = IfZero(at_step, write_chain, ok)
        elif isinstance(e, Read):
            read_chain = IfZero(at_step, read_chain, Seq(bump, NumLit(e.n)))
    return Mkvar(Lambda(k, NAT, write_chain), read_chain)


def witness_context(ctx, witness: Elem, result_type=COMM) -> Term:
    """A closed context that drives a var-context term through the witness traces.

    The hole is wrapped so that the program converges exactly when the
    plugged term produces the witness output after consuming every scripted
    event.
    """
    if any(a != VAR for _, a in ctx):
        raise PreconditionError("witness contexts are built for var contexts")
    counters = [f"c_{x}" for x, _ in ctx]
    body: Term = HOLE
    if result_type == NAT:
        body = IfZero(ArithOp("=", HOLE, NumLit(witness.out.n)), OMEGA, SKIP)
    fn = body
    for x, _ in reversed(list(ctx)):
        fn = Lambda(x, VAR, fn)
    prog = fn
    for (x, _), cnt, s in zip(ctx, counters, witness.inputs):
        prog = App(prog, scripted_variable(s, cnt))
    checks = [IfZero(ArithOp("=", Deref(Ident(cnt)), NumLit(len(s))), OMEGA, SKIP)
              for cnt, s in zip(counters, witness.inputs)]
    prog = seq(prog, *checks)
    for cnt in reversed(counters):
        prog = New(cnt, prog)
    return prog


def example_var_context(read_value: int = 3) -> Term:
    """The context ``(lambda x:var. [-]) (mkvar (lambda y. diverge) n)``."""
    return App(Lambda("x", VAR, HOLE),
               Mkvar(Lambda("y", NAT, OMEGA), NumLit(read_value)))


def separate(ctx, m: Term, n: Term, verdict: EquivVerdict, bounds: Bounds,
             result_type=COMM):
    """Run both terms in the witness context; returns the two outcomes."""
    from .operational import contextual_test

    c = witness_context(ctx, verdict.witness, result_type)
    return c, contextual_test(c, m, bounds), contextual_test(c, n, bounds)


def closed_event(ctx, witness: Elem):
    """View an element of an open term as an event of its closure."""
    e = witness.out
    for s in reversed(witness.inputs):
        e = FunEv(s, e)
    return e


def closed_type(ctx, a):
    for _, t in reversed(list(ctx)):
        a = Arrow(t, a)
    return a


def pure_witness(ctx, dm: Denotation, dn: Denotation):
    """An element on one side that nothing on the other side lies above.

    The pure test for an element ``a`` converges on every term having some
    ``b`` with ``a <=- b``, so a usable witness must avoid that relation
    with each element of the opposite denotation.  Taking the least element
    below a difference is not enough: below ``([W(3)], *)`` sits
    ``([R(3)], *)``, and the test for that accepts both terms of the pair
    ``x := 3`` and ``ifzero !x = 3 then diverge else skip``.
    Returns ``(witness, side)`` or None when every difference is covered.
    """
    t = closed_type(ctx, dm.type)
    for side, mine, other in (("left", dm, dn), ("right", dn, dm)):
        above = [closed_event(ctx, o) for o in other.elems]
        for w in sorted(mine.elems - other.elems, key=elem_key):
            a = closed_event(ctx, w)
            if not any(leq_minus(t, (a,), (b,)) for b in above):
                return w, side
    return None


def probe_context(ctx, witness: Elem, a) -> Term:
    """A pure context that converges around ``M`` iff ``witness <=- b`` for some ``b`` of ``M``."""
    from .universal import Names, test_term

    t = closed_type(ctx, a)
    names = Names({x for x, _ in ctx})
    f = names.take("f")
    probe = test_term(t, (closed_event(ctx, witness),), f, names=names)
    hole = HOLE
    for x, ty in reversed(list(ctx)):
        hole = Lambda(x, ty, hole)
    return App(Lambda(f, t, probe), hole)


def separate_pure(ctx, m: Term, n: Term, bounds: Bounds):
    """Find and run a mkvar-free separating context, or return None."""
    from .operational import contextual_test

    a = infer(ctx, m).type
    dm, dn = denote(ctx, m, a, bounds), denote(ctx, n, a, bounds)
    found = pure_witness(ctx, dm, dn)
    if found is None:
        return None
    c = probe_context(ctx, found[0], a)
    return c, contextual_test(c, m, bounds), contextual_test(c, n, bounds)
