"""Relations between monoids, realised as finite sets of generator pairs.

A map ``A1 (x) ... (x) An -> B*`` is stored as its generators: pairs of an
input tuple of traces and a single output event.  The relation on whole
output sequences is the homomorphic extension of these generators, and
``star_slice`` materialises a finite window of it so that the map laws can
be checked by brute force.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .denotational import Denotation, Elem
from .events import Bounds, FunEv, Star, alphabet
from .syntax import Arrow, COMM, NAT, Type


class Inj(NamedTuple):
    """An event of the product object, tagged with its side."""

    side: int
    event: object
    tag: str = "inj"


class TensorOut(NamedTuple):
    """An event of one factor of a tensor target."""

    side: int
    event: object
    tag: str = "tensor"


@dataclass(frozen=True)
class Prod:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Tensor:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} * {self.right})"


class RelTypeError(TypeError):
    pass


@dataclass(frozen=True)
class Rel:
    sources: tuple
    target: object
    elems: frozenset

    @staticmethod
    def of(d: Denotation) -> "Rel":
        return Rel(tuple(a for _, a in d.ctx), d.type, d.elems)

    def __len__(self):
        return len(self.elems)


def obj_alphabet(a, bounds: Bounds) -> tuple:
    if isinstance(a, Prod):
        return tuple(Inj(0, e) for e in obj_alphabet(a.left, bounds)) + tuple(
            Inj(1, e) for e in obj_alphabet(a.right, bounds))
    if isinstance(a, Tensor):
        return tuple(TensorOut(0, e) for e in obj_alphabet(a.left, bounds)) + tuple(
            TensorOut(1, e) for e in obj_alphabet(a.right, bounds))
    return alphabet(a, bounds)


def identity(a, bounds: Bounds) -> Rel:
    return Rel((a,), a, frozenset(Elem(((e,),), e) for e in obj_alphabet(a, bounds)))


def _concat_tuples(x: tuple, y: tuple) -> tuple:
    return tuple(p + q for p, q in zip(x, y))


def _preimages(f: Rel, seq: Sequence, max_len: int) -> set:
    """All input tuples that ``f`` relates to the output sequence ``seq``."""
    by_out: dict = {}
    for el in f.elems:
        by_out.setdefault(el.out, []).append(el.inputs)
    acc = {tuple(() for _ in f.sources)}
    for e in seq:
        nxt = set()
        for pre in acc:
            for ins in by_out.get(e, ()):
                c = _concat_tuples(pre, ins)
                if all(len(s) <= max_len for s in c):
                    nxt.add(c)
        acc = nxt
        if not acc:
            break
    return acc


def compose(g: Rel, fs: Sequence[Optional[Rel]], bounds: Bounds) -> Rel:
    """``(f1 (x) ... (x) fm) ; g`` where ``g`` has sources ``A1..Am``.

    A ``None`` entry in ``fs`` stands for the identity on that source.
    """
    if len(fs) != len(g.sources):
        raise RelTypeError("one relation per source of g is required")
    fs = [identity(a, bounds) if f is None else f for f, a in zip(fs, g.sources)]
    for f, a in zip(fs, g.sources):
        if f.target != a:
            raise RelTypeError(f"cannot feed {f.target} into source {a}")
    sources = tuple(itertools.chain.from_iterable(f.sources for f in fs))
    out = set()
    for el in g.elems:
        choices = [_preimages(f, s, bounds.max_trace) for f, s in zip(fs, el.inputs)]
        for combo in itertools.product(*choices):
            out.add(Elem(tuple(itertools.chain.from_iterable(combo)), el.out))
    return Rel(sources, g.target, frozenset(out))


def compose2(f: Rel, g: Rel, bounds: Bounds) -> Rel:
    """Diagrammatic composite ``f ; g`` for single-source ``g``."""
    return compose(g, [f], bounds)


def tensor(f: Rel, g: Rel) -> Rel:
    ef = tuple(() for _ in f.sources)
    eg = tuple(() for _ in g.sources)
    elems = {Elem(el.inputs + eg, TensorOut(0, el.out)) for el in f.elems}
    elems |= {Elem(ef + el.inputs, TensorOut(1, el.out)) for el in g.elems}
    return Rel(f.sources + g.sources, Tensor(f.target, g.target), frozenset(elems))


def pair(f: Rel, g: Rel) -> Rel:
    if f.sources != g.sources:
        raise RelTypeError("pairing needs a common source")
    elems = {Elem(el.inputs, Inj(0, el.out)) for el in f.elems}
    elems |= {Elem(el.inputs, Inj(1, el.out)) for el in g.elems}
    return Rel(f.sources, Prod(f.target, g.target), frozenset(elems))


def proj(p: Prod, side: int, bounds: Bounds) -> Rel:
    comp = p.left if side == 0 else p.right
    elems = {Elem(((Inj(side, e),),), e) for e in obj_alphabet(comp, bounds)}
    return Rel((p,), comp, frozenset(elems))


def permute(f: Rel, order: Sequence[int]) -> Rel:
    """Reorder sources: new source ``i`` is old source ``order[i]``."""
    if sorted(order) != list(range(len(f.sources))):
        raise RelTypeError("not a permutation")
    elems = {Elem(tuple(el.inputs[j] for j in order), el.out) for el in f.elems}
    return Rel(tuple(f.sources[j] for j in order), f.target, frozenset(elems))


def symm(f: Rel, i: int = 0, j: int = 1) -> Rel:
    order = list(range(len(f.sources)))
    order[i], order[j] = order[j], order[i]
    return permute(f, order)


def weaken(f: Rel, a, pos: Optional[int] = None) -> Rel:
    pos = len(f.sources) if pos is None else pos
    elems = {Elem(el.inputs[:pos] + ((),) + el.inputs[pos:], el.out) for el in f.elems}
    return Rel(f.sources[:pos] + (a,) + f.sources[pos:], f.target, frozenset(elems))


def curry(f: Rel, bounds: Bounds) -> Rel:
    """Move the last source into the target as a function type."""
    if not f.sources:
        raise RelTypeError("nothing to curry")
    a = f.sources[-1]
    elems = {Elem(el.inputs[:-1], FunEv(el.inputs[-1], el.out))
             for el in f.elems if len(el.inputs[-1]) <= bounds.max_arg_len}
    return Rel(f.sources[:-1], Arrow(a, f.target), frozenset(elems))


def uncurry(f: Rel) -> Rel:
    if not isinstance(f.target, Arrow):
        raise RelTypeError("target is not a function type")
    elems = {Elem(el.inputs + (el.out.args,), el.out.out) for el in f.elems}
    return Rel(f.sources + (f.target.domain,), f.target.codomain, frozenset(elems))


def ev(a: Type, b: Type, bounds: Bounds) -> Rel:
    """Evaluation ``(A -o B) (x) A -> B``."""
    elems = {Elem(((e,), e.args), e.out) for e in alphabet(Arrow(a, b), bounds)}
    return Rel((Arrow(a, b), a), b, frozenset(elems))


def while_map(bounds: Bounds) -> Rel:
    """The loop relation over the product of the guard and body objects."""
    p = Prod(NAT, COMM)
    from .events import NatVal

    step = (Inj(0, NatVal(0)), Inj(1, Star))
    elems = set()
    for k in range(bounds.max_unfold + 1):
        for n in range(1, bounds.max_nat + 1):
            elems.add(Elem((step * k + (Inj(0, NatVal(n)),),), Star))
    return Rel((p,), COMM, frozenset(elems))


# --------------------------------------------------------------------------
# map laws
# --------------------------------------------------------------------------

def star_slice(r: Rel, max_out: int, max_len: int) -> set:
    """Pairs ``(inputs, outputs)`` of the extended relation with short outputs."""
    width = len(r.sources)
    empty = tuple(() for _ in range(width))
    layer = {(empty, ())}
    out = set(layer)
    for _ in range(max_out):
        nxt = set()
        for ins, outs in layer:
            for el in r.elems:
                c = _concat_tuples(ins, el.inputs)
                if all(len(s) <= max_len for s in c):
                    nxt.add((c, outs + (el.out,)))
        out |= nxt
        layer = nxt
    return out


def _splits(ins: tuple):
    for cuts in itertools.product(*[range(len(s) + 1) for s in ins]):
        yield (tuple(s[:c] for s, c in zip(ins, cuts)),
               tuple(s[c:] for s, c in zip(ins, cuts)))


def check_map_laws(pairs: set, width: int, max_out: int, max_len: int) -> dict:
    """Brute-force homomorphism, identity reflection and decomposition.

    ``pairs`` is a finite window of a relation between input tuples and
    output sequences: all its pairs with outputs of length at most
    ``max_out`` and inputs of length at most ``max_len``.  Returns a map
    from law name to a list of counterexamples.
    """
    empty = tuple(() for _ in range(width))
    bad = {"homomorphism": [], "identity reflection": [], "decomposition": []}
    if (empty, ()) not in pairs:
        bad["homomorphism"].append((empty, ()))
    for p1 in pairs:
        for p2 in pairs:
            if len(p1[1]) + len(p2[1]) > max_out:
                continue
            c = _concat_tuples(p1[0], p2[0])
            if any(len(s) > max_len for s in c):
                continue
            if (c, p1[1] + p2[1]) not in pairs:
                bad["homomorphism"].append((p1, p2))
    for ins, outs in pairs:
        if not outs and ins != empty:
            bad["identity reflection"].append((ins, outs))
        for k in range(len(outs) + 1):
            b1, b2 = outs[:k], outs[k:]
            if not any((a1, b1) in pairs and (a2, b2) in pairs for a1, a2 in _splits(ins)):
                bad["decomposition"].append((ins, outs, k))
    return bad


def map_laws_hold(r, bounds: Bounds, max_out: int = 2) -> bool:
    if isinstance(r, Denotation):
        r = Rel.of(r)
    pairs = star_slice(r, max_out, bounds.max_trace)
    report = check_map_laws(pairs, len(r.sources), max_out, bounds.max_trace)
    return not any(report.values())
