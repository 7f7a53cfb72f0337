"""Big-step evaluation over stores.

``random`` makes evaluation nondeterministic; every branch is explored with
draws limited to ``0..max_nat``.  Fuel bounds the number of rule
applications on each derivation path so that divergence shows up as an
``exhausted`` flag instead of a hang.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Mapping

from .events import Bounds
from .syntax import (
    App, ArithOp, Assign, Deref, Hole, Ident, IfZero, Lambda, Mkvar, New,
    NumLit, Random, SKIP, Seq, Skip, Term, While, all_names, apply_arith,
    fresh_name, free_vars, plug, substitute,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class PreconditionError(Exception):
    pass


class StuckError(Exception):
    pass


class Store(Mapping):
    """An immutable, hashable map from identifiers to naturals."""

    __slots__ = ("_d", "_hash")

    def __init__(self, items=()):
        self._d = dict(items)
        self._hash = None

    def __getitem__(self, k):
        return self._d[k]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return self._d == dict(other)
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"{k}: {v}" for k, v in sorted(self._d.items()))
        return "{" + inner + "}"

    def set(self, k, v) -> "Store":
        d = dict(self._d)
        d[k] = v
        return Store(d)

    def without(self, k) -> "Store":
        d = dict(self._d)
        d.pop(k, None)
        return Store(d)


def is_value(m: Term) -> bool:
    return isinstance(m, (NumLit, Skip, Ident, Lambda, Mkvar))


@dataclass(frozen=True)
class EvalOutcome:
    results: frozenset
    exhausted: bool

    def values(self) -> set:
        return {v for _, v in self.results}

    def converges(self) -> bool:
        return bool(self.results)


class _Evaluator:
    def __init__(self, bounds: Bounds):
        self.bounds = bounds
        self.exhausted = False

    def run(self, sigma: Store, m: Term, fuel: int) -> list:
        """All ``(store, value, fuel_left)`` reachable from ``sigma, m``."""
        if fuel <= 0:
            self.exhausted = True
            return []
        fuel -= 1
        if is_value(m):
            if isinstance(m, Ident) and m.name not in sigma:
                raise StuckError(f"identifier {m.name} is not in the store")
            return [(sigma, m, fuel)]
        if isinstance(m, Random):
            return [(sigma, NumLit(n), fuel) for n in range(self.bounds.max_nat + 1)]
        if isinstance(m, ArithOp):
            out = []
            for s1, v1, f1 in self.run(sigma, m.left, fuel):
                n1 = self._nat(v1, m)
                if m.right is None:
                    out.append((s1, NumLit(apply_arith(m.op, n1)), f1))
                    continue
                for s2, v2, f2 in self.run(s1, m.right, f1):
                    out.append((s2, NumLit(apply_arith(m.op, n1, self._nat(v2, m))), f2))
            return _dedup(out)
        if isinstance(m, Seq):
            out = []
            for s1, v1, f1 in self.run(sigma, m.first, fuel):
                if not isinstance(v1, Skip):
                    raise StuckError(f"sequence head produced {v1}")
                out.extend(self.run(s1, m.rest, f1))
            return _dedup(out)
        if isinstance(m, Assign):
            out = []
            for s1, v1, f1 in self.run(sigma, m.value, fuel):
                n = self._nat(v1, m)
                for s2, v2, f2 in self.run(s1, m.target, f1):
                    if isinstance(v2, Ident):
                        out.append((s2.set(v2.name, n), SKIP, f2))
                    elif isinstance(v2, Mkvar):
                        out.extend(self.run(s2, App(v2.writer, NumLit(n)), f2))
                    else:
                        raise StuckError(f"assignment to {v2}")
            return _dedup(out)
        if isinstance(m, Deref):
            out = []
            for s1, v1, f1 in self.run(sigma, m.body, fuel):
                if isinstance(v1, Ident):
                    out.append((s1, NumLit(s1[v1.name]), f1))
                elif isinstance(v1, Mkvar):
                    out.extend(self.run(s1, v1.reader, f1))
                else:
                    raise StuckError(f"dereferencing {v1}")
            return _dedup(out)
        if isinstance(m, While):
            return self._while(sigma, m, fuel)
        if isinstance(m, IfZero):
            out = []
            for s1, v1, f1 in self.run(sigma, m.guard, fuel):
                branch = m.then if self._nat(v1, m) == 0 else m.orelse
                out.extend(self.run(s1, branch, f1))
            return _dedup(out)
        if isinstance(m, App):
            out = []
            for s1, v1, f1 in self.run(sigma, m.fn, fuel):
                if not isinstance(v1, Lambda):
                    raise StuckError(f"applying {v1}")
                out.extend(self.run(s1, substitute(v1.body, v1.name, m.arg), f1))
            return _dedup(out)
        if isinstance(m, New):
            x, body = m.name, m.body
            if x in sigma:
                new = fresh_name(x, set(sigma) | all_names(body))
                body = substitute(body, x, Ident(new))
                x = new
            out = []
            for s1, v1, f1 in self.run(sigma.set(x, 0), body, fuel):
                out.append((s1.without(x), v1, f1))
            return _dedup(out)
        if isinstance(m, Hole):
            raise StuckError("cannot evaluate a hole")
        raise StuckError(f"no rule for {m!r}")

    def _while(self, sigma, m: While, fuel: int) -> list:
        # one extra unit per unfolding pays for the recursive while premise
        frontier = {sigma: fuel}
        done = []
        while frontier:
            nxt: dict = {}
            for s0, f0 in frontier.items():
                for s1, v1, f1 in self.run(s0, m.guard, f0):
                    if self._nat(v1, m) != 0:
                        done.append((s1, SKIP, f1))
                        continue
                    for s2, v2, f2 in self.run(s1, m.body, f1):
                        if not isinstance(v2, Skip):
                            raise StuckError(f"loop body produced {v2}")
                        if f2 <= 0:
                            self.exhausted = True
                            continue
                        f2 -= 1
                        if nxt.get(s2, -1) < f2:
                            nxt[s2] = f2
            frontier = nxt
        return _dedup(done)

    @staticmethod
    def _nat(v: Term, m: Term) -> int:
        if not isinstance(v, NumLit):
            raise StuckError(f"expected a number, got {v} while evaluating {m}")
        return v.n


def _dedup(results: list) -> list:
    best: dict = {}
    for s, v, f in results:
        key = (s, v)
        if best.get(key, -1) < f:
            best[key] = f
    return [(s, v, f) for (s, v), f in best.items()]


def evaluate(sigma, m: Term, bounds: Bounds = Bounds()) -> EvalOutcome:
    """Every ``(store, value)`` with ``sigma, m`` evaluating to it within fuel."""
    sigma = sigma if isinstance(sigma, Store) else Store(sigma)
    open_names = free_vars(m) - set(sigma)
    if open_names:
        raise PreconditionError(
            "free identifiers outside the store: " + ", ".join(sorted(open_names)))
    ev = _Evaluator(bounds)
    res = ev.run(sigma, m, bounds.fuel)
    return EvalOutcome(frozenset((s, v) for s, v, _ in res), ev.exhausted)


eval_term = evaluate


def contextual_test(context: Term, m: Term, bounds: Bounds = Bounds()) -> EvalOutcome:
    """Run the closed program obtained by filling the hole of ``context`` with ``m``."""
    return evaluate(Store(), plug(context, m), bounds)
