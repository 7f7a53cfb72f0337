"""Bounded fragments of the trace-set semantics.

The equations are evaluated on demand rather than by enumerating whole sets
bottom-up.  Each call receives a *demand* describing which output events
the caller can use, so an application asks its argument for exactly the
events the function consumed, and a dereference asks for read events only.

Identifiers fall into three kinds:

* context identifiers and lambda-bound identifiers are *visible*: their
  events are drawn from a finite domain and recorded in the result;
* identifiers bound by ``new`` are *cells*: their current contents are
  threaded through evaluation in temporal order, so the cell-trace filter
  is applied as events happen and nothing is recorded.

Threading cell contents is faithful because concatenation in every
equation follows evaluation order, and affinity keeps a cell on one side of
any application.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .events import (
    Bounds, FunEv, NatVal, Read, Star, Write, alphabet, event_key,
    max_value, render_event, render_trace, trace_key,
)
from .operational import PreconditionError
from .syntax import (
    App, ArithOp, Assign, Deref, Hole, Ident, IfZero, Lambda, Mkvar, New,
    NumLit, Random, Seq, Skip, Term, Type, While, apply_arith, free_vars,
    map_children, rename_bound, substitute,
)
from .typecheck import TypeCheckError, infer


class Elem(NamedTuple):
    """One element ``(s1, ..., sn, b)`` of a denotation."""

    inputs: tuple
    out: object

    def render(self) -> str:
        ins = ", ".join("[" + render_trace(s) + "]" for s in self.inputs)
        if ins:
            return f"({ins}, {render_event(self.out)})"
        return render_event(self.out)


def elem_key(e: Elem):
    return (tuple(trace_key(s) for s in e.inputs), event_key(e.out))


@dataclass(frozen=True)
class Denotation:
    ctx: tuple
    type: Type
    elems: frozenset
    bounds: Bounds

    def sorted_elems(self) -> list:
        return sorted(self.elems, key=elem_key)

    def to_json(self) -> dict:
        return {
            "ctx": [[x, str(a)] for x, a in self.ctx],
            "type": str(self.type),
            "bounds": self.bounds.to_json(),
            "elems": [
                {"inputs": [[render_event(e) for e in s] for s in el.inputs],
                 "out": render_event(el.out)}
                for el in self.sorted_elems()
            ],
        }

    def __len__(self):
        return len(self.elems)


# demands -------------------------------------------------------------------

ANY = ("any",)
READS = ("reads",)
STAR_D = ("exact", Star)


def exact(e):
    return ("exact", e)


def fun_of(d):
    return ("fun", d)


def accepts(d, e) -> bool:
    k = d[0]
    if k == "any":
        return True
    if k == "exact":
        return e == d[1]
    if k == "reads":
        return isinstance(e, Read)
    return isinstance(e, FunEv) and accepts(d[1], e.out)


# normalisation ---------------------------------------------------------------

def normalize(m: Term) -> Term:
    """Contract every beta-redex; terminates because SCI is simply typed."""
    m = map_children(m, normalize)
    if isinstance(m, App) and isinstance(m.fn, Lambda):
        return normalize(substitute(m.fn.body, m.fn.name, m.arg))
    return m


# the evaluator ----------------------------------------------------------------

class _Denoter:
    def __init__(self, ctx, bounds: Bounds, domains, random_extra):
        self.bounds = bounds
        self.ctx = ctx
        self.kind: dict = {}
        self.limit: dict = {}
        self.top_domain: dict = {}
        for x, a in ctx:
            self.kind[x] = "top"
            self.limit[x] = bounds.max_trace
            dom = domains.get(x) if domains and x in domains else alphabet(a, bounds)
            dom = tuple(sorted(set(dom), key=event_key))
            self.top_domain[x] = (dom, frozenset(dom))
        self.lam_type: dict = {}
        extra = set(random_extra or ())
        self.random_values = tuple(sorted(set(range(bounds.max_nat + 1)) | extra))
        self.memo: dict = {}
        self.fv: dict = {}
        self.keep: list = []
        self.write_apps: dict = {}

    def classify(self, m: Term):
        if isinstance(m, Lambda):
            self.kind[m.name] = "lam"
            self.limit[m.name] = self.bounds.max_arg_len
            self.lam_type[m.name] = m.annot
        elif isinstance(m, New):
            self.kind[m.name] = "cell"
        from .syntax import children

        for c in children(m):
            self.classify(c)

    # free identifier bookkeeping ------------------------------------------
    def frees(self, t: Term):
        r = self.fv.get(id(t))
        if r is None:
            names = free_vars(t)
            cells = tuple(sorted(x for x in names if self.kind.get(x) == "cell"))
            lams = tuple(sorted(x for x in names if self.kind.get(x) == "lam"))
            r = (cells, lams)
            self.fv[id(t)] = r
            self.keep.append(t)
        return r

    def concat(self, v1: tuple, v2: tuple):
        if not v1:
            return v2
        if not v2:
            return v1
        d = dict(v1)
        for x, s in v2:
            t = d.get(x, ()) + s
            if len(t) > self.limit[x]:
                return None
            d[x] = t
        return tuple(sorted(d.items()))

    # main entry ------------------------------------------------------------
    def sub(self, t: Term, env: dict, st: dict, dem) -> list:
        """Results ``(vis, out, state)`` of ``t``; ``state`` is a fresh full dict."""
        cells, lams = self.frees(t)
        key = (id(t), dem, tuple(env[x][1] for x in lams), tuple(st[c] for c in cells))
        hit = self.memo.get(key)
        if hit is None:
            raw = self.step(t, env, st, dem)
            hit = list({(v, o, tuple(s[c] for c in cells)) for v, o, s in raw})
            self.memo[key] = hit
        if not cells:
            return [(v, o, st) for v, o, _ in hit]
        out = []
        for v, o, vals in hit:
            s2 = dict(st)
            s2.update(zip(cells, vals))
            out.append((v, o, s2))
        return out

    def step(self, t: Term, env: dict, st: dict, dem) -> list:
        if isinstance(t, NumLit):
            e = NatVal(t.n)
            return [((), e, st)] if accepts(dem, e) else []
        if isinstance(t, Skip):
            return [((), Star, st)] if accepts(dem, Star) else []
        if isinstance(t, Random):
            if dem[0] == "exact":
                return [((), dem[1], st)] if isinstance(dem[1], NatVal) else []
            if dem[0] != "any":
                return []
            return [((), NatVal(n), st) for n in self.random_values]
        if isinstance(t, ArithOp):
            return self.arith(t, env, st, dem)
        if isinstance(t, Seq):
            out = []
            for v1, _, s1 in self.sub(t.first, env, st, STAR_D):
                for v2, o, s2 in self.sub(t.rest, env, s1, dem):
                    v = self.concat(v1, v2)
                    if v is not None:
                        out.append((v, o, s2))
            return out
        if isinstance(t, Assign):
            if not accepts(dem, Star):
                return []
            out = []
            for v1, o1, s1 in self.sub(t.value, env, st, ANY):
                for v2, _, s2 in self.sub(t.target, env, s1, exact(Write(o1.n))):
                    v = self.concat(v1, v2)
                    if v is not None:
                        out.append((v, Star, s2))
            return out
        if isinstance(t, Deref):
            if dem[0] == "exact":
                if not isinstance(dem[1], NatVal):
                    return []
                n = dem[1].n
                return [(v, dem[1], s) for v, _, s in self.sub(t.body, env, st, exact(Read(n)))]
            if dem[0] != "any":
                return []
            return [(v, NatVal(o.n), s) for v, o, s in self.sub(t.body, env, st, READS)]
        if isinstance(t, While):
            return self.loop(t, env, st, dem)
        if isinstance(t, IfZero):
            out = []
            for v1, o1, s1 in self.sub(t.guard, env, st, ANY):
                branch = t.then if o1.n == 0 else t.orelse
                for v2, o, s2 in self.sub(branch, env, s1, dem):
                    v = self.concat(v1, v2)
                    if v is not None:
                        out.append((v, o, s2))
            return out
        if isinstance(t, Ident):
            return self.ident(t.name, env, st, dem)
        if isinstance(t, Lambda):
            return self.lam(t, env, st, dem)
        if isinstance(t, App):
            return self.app(t, env, st, dem)
        if isinstance(t, New):
            inner = dict(st)
            inner[t.name] = 0
            out = []
            for v, o, s in self.sub(t.body, env, inner, dem):
                s = dict(s)
                del s[t.name]
                out.append((v, o, s))
            return out
        if isinstance(t, Mkvar):
            return self.mkvar(t, env, st, dem)
        if isinstance(t, Hole):
            raise PreconditionError("cannot denote a term with a hole")
        raise PreconditionError(f"unknown term {t!r}")

    def arith(self, t: ArithOp, env, st, dem) -> list:
        out = []
        for v1, o1, s1 in self.sub(t.left, env, st, ANY):
            if t.right is None:
                e = NatVal(apply_arith(t.op, o1.n))
                if accepts(dem, e):
                    out.append((v1, e, s1))
                continue
            for v2, o2, s2 in self.sub(t.right, env, s1, ANY):
                e = NatVal(apply_arith(t.op, o1.n, o2.n))
                if not accepts(dem, e):
                    continue
                v = self.concat(v1, v2)
                if v is not None:
                    out.append((v, e, s2))
        return out

    def loop(self, t: While, env, st, dem) -> list:
        if not accepts(dem, Star):
            return []
        out = []
        frontier = {((), tuple(sorted(st.items())))}
        for k in range(self.bounds.max_unfold + 1):
            nxt = set()
            for v0, items in frontier:
                s0 = dict(items)
                for vg, og, sg in self.sub(t.guard, env, s0, ANY):
                    v1 = self.concat(v0, vg)
                    if v1 is None:
                        continue
                    if og.n != 0:
                        out.append((v1, Star, sg))
                    elif k < self.bounds.max_unfold:
                        for vb, _, sb in self.sub(t.body, env, sg, STAR_D):
                            v2 = self.concat(v1, vb)
                            if v2 is not None:
                                nxt.add((v2, tuple(sorted(sb.items()))))
            frontier = nxt
        return out

    def ident(self, x: str, env, st, dem) -> list:
        kind = self.kind.get(x)
        if kind == "cell":
            val = st[x]
            if dem[0] == "exact":
                e = dem[1]
                if isinstance(e, Read):
                    return [((), e, st)] if e.n == val else []
                if isinstance(e, Write):
                    s2 = dict(st)
                    s2[x] = e.n
                    return [((), e, s2)]
                return []
            if dem[0] == "fun":
                return []
            out = [((), Read(val), st)]
            if dem[0] == "any":
                for m in range(self.bounds.max_nat + 1):
                    s2 = dict(st)
                    s2[x] = m
                    out.append(((), Write(m), s2))
            return out
        if self.limit.get(x, 0) < 1:
            return []
        if kind == "top":
            dom, domset = self.top_domain[x]
        elif kind == "lam":
            dom, domset = env[x]
        else:
            raise PreconditionError(f"unbound identifier {x}")
        if dem[0] == "exact":
            e = dem[1]
            return [(((x, (e,)),), e, st)] if e in domset else []
        return [(((x, (e,)),), e, st) for e in dom if accepts(dem, e)]

    def lam(self, t: Lambda, env, st, dem) -> list:
        x = t.name
        env2 = dict(env)
        if dem[0] == "exact":
            target = dem[1]
            if not isinstance(target, FunEv) or len(target.args) > self.bounds.max_arg_len:
                return []
            dom = tuple(sorted(set(target.args), key=event_key))
            env2[x] = (dom, frozenset(dom))
            out = []
            for v, o, s in self.sub(t.body, env2, st, exact(target.out)):
                d = dict(v)
                if d.pop(x, ()) == target.args:
                    out.append((tuple(sorted(d.items())), target, s))
            return out
        body_dem = dem[1] if dem[0] == "fun" else ANY
        if dem[0] not in ("fun", "any"):
            return []
        dom = alphabet(t.annot, self.bounds)
        env2[x] = (dom, frozenset(dom))
        out = []
        for v, o, s in self.sub(t.body, env2, st, body_dem):
            d = dict(v)
            args = d.pop(x, ())
            out.append((tuple(sorted(d.items())), FunEv(args, o), s))
        return out

    def app(self, t: App, env, st, dem) -> list:
        out = []
        for v1, o1, s1 in self.sub(t.fn, env, st, fun_of(dem)):
            partial = [(v1, s1)]
            for a in o1.args:
                nxt = {}
                for v, s in partial:
                    for v2, _, s2 in self.sub(t.arg, env, s, exact(a)):
                        c = self.concat(v, v2)
                        if c is not None:
                            nxt[(c, tuple(sorted(s2.items())))] = s2
                partial = [(c, s2) for (c, _), s2 in nxt.items()]
                if not partial:
                    break
            for v, s in partial:
                out.append((v, o1.out, s))
        return out

    def write_app(self, writer: Term, n: int) -> Term:
        key = (id(writer), n)
        app = self.write_apps.get(key)
        if app is None:
            app = App(writer, NumLit(n))
            self.write_apps[key] = app
            self.keep.append(writer)
        return app

    def mkvar(self, t: Mkvar, env, st, dem) -> list:
        out = []
        if dem[0] == "exact":
            e = dem[1]
            if isinstance(e, Write):
                for v, _, s in self.sub(self.write_app(t.writer, e.n), env, st, STAR_D):
                    out.append((v, e, s))
            elif isinstance(e, Read):
                for v, _, s in self.sub(t.reader, env, st, exact(NatVal(e.n))):
                    out.append((v, e, s))
            return out
        if dem[0] == "fun":
            return out
        for v, o, s in self.sub(t.reader, env, st, ANY):
            out.append((v, Read(o.n), s))
        if dem[0] == "any":
            for n in range(self.bounds.max_nat + 1):
                for v, _, s in self.sub(self.write_app(t.writer, n), env, st, STAR_D):
                    out.append((v, Write(n), s))
        return out


def denote(ctx, m: Term, a: Optional[Type] = None, bounds: Bounds = Bounds(), *,
           domains: Optional[dict] = None, random_extra=(),
           value_limit: Optional[int] = -1, reduce_redexes: bool = False,
           check_types: bool = True) -> Denotation:
    """Bounded denotation of ``ctx |- m : a``.

    ``domains`` overrides the event domain of context identifiers,
    ``random_extra`` adds values that an undemanded ``random`` may return,
    and ``value_limit`` drops elements mentioning naturals above it (the
    default is ``bounds.max_nat``; None keeps everything).
    """
    ctx = tuple(ctx.items()) if isinstance(ctx, dict) else tuple(ctx)
    if check_types:
        try:
            t = infer(ctx, m).type
        except TypeCheckError as exc:
            raise PreconditionError(f"ill-typed term: {exc}") from exc
        if a is not None and t != a:
            raise PreconditionError(f"term has type {t}, not {a}")
        a = t
    if value_limit == -1:
        value_limit = bounds.max_nat
    if reduce_redexes:
        m = normalize(m)
    m = rename_bound(m, avoid={x for x, _ in ctx})
    d = _Denoter(ctx, bounds, domains, random_extra)
    d.classify(m)
    names = [x for x, _ in ctx]
    elems = set()
    for vis, out, _ in d.sub(m, {}, {}, ANY):
        if value_limit is not None and max_value(out) > value_limit:
            continue
        v = dict(vis)
        inputs = tuple(v.get(x, ()) for x in names)
        if value_limit is not None and domains and any(
                max_value(e) > value_limit for s in inputs for e in s):
            continue
        elems.add(Elem(inputs, out))
    return Denotation(ctx, a, frozenset(elems), bounds)


def elements(ctx, m: Term, bounds: Bounds = Bounds(), **kw) -> set:
    return set(denote(ctx, m, None, bounds, **kw).elems)
