import pytest

from corpus import REDEX_BOUNDS, REDEX_CTX, redexes
from scitrace.denotational import Elem, denote
from scitrace.events import Bounds, FunEv, NatVal, Star, Write
from scitrace.monrel import (
    Prod, Rel, RelTypeError, Tensor, TensorOut, check_map_laws, compose,
    compose2, curry, ev, identity, map_laws_hold, pair, permute, proj, star_slice,
    symm, tensor, uncurry, weaken, while_map,
)
from scitrace.syntax import COMM, NAT, VAR, parse

B = Bounds(max_nat=1, max_trace=3, max_arg_len=2, max_unfold=2)
X = [("x", VAR)]


def rel(ctx, src, a=None, bounds=B):
    return Rel.of(denote(ctx, parse(src), a, bounds))


def test_identity_left_and_right():
    r = rel(X + [("c", COMM)], "x := 1; c")
    assert compose(r, [None, None], B) == r
    assert compose(identity(COMM, B), [r], B) == r
    assert compose2(r, identity(COMM, B), B) == r


def test_curry_uncurry_roundtrip():
    r = rel(X + [("c", COMM)], "c; x := 1; c")
    assert uncurry(curry(r, B)) == r


def test_curry_matches_lambda():
    r = rel(X + [("c", COMM)], "c; x := 1")
    lam = rel(X, "lambda c:comm. c; x := 1")
    assert curry(r, B) == lam


def test_evaluation_after_currying():
    f = rel(X + [("c", COMM)], "x := 1; c; c")
    back = compose(ev(COMM, COMM, B), [curry(f, B), identity(COMM, B)], B)
    assert back.elems == f.elems


def test_application_is_evaluation():
    fn = rel(X, "lambda c:comm. c; c")
    arg = rel([("y", VAR)], "y := 0")
    app = compose(ev(COMM, COMM, B), [fn, arg], B)
    direct = rel(X + [("y", VAR)], "(lambda c:comm. c; c) (y := 0)")
    assert app == direct


def test_substitution_is_composition():
    m = rel([("a", VAR), ("x", COMM)], "x; a := 1; x")
    n = rel([("b", VAR)], "b := 0")
    sub = compose(m, [None, n], B)
    assert sub == rel([("a", VAR), ("b", VAR)], "b := 0; a := 1; b := 0")


def test_loop_is_pairing_then_loop_map():
    b = B.replace(max_trace=4)
    guard, body = rel(X, "!x", NAT, b), rel(X, "x := 1", COMM, b)
    composite = compose(while_map(b), [pair(guard, body)], b)
    assert composite == rel(X, "while !x do x := 1", COMM, b)


def test_pair_and_projection():
    f, g = rel(X, "!x", NAT), rel(X, "x := 0", COMM)
    p = pair(f, g)
    assert p.target == Prod(NAT, COMM)
    assert compose(proj(p.target, 0, B), [p], B) == f
    assert compose(proj(p.target, 1, B), [p], B) == g


def test_pair_needs_common_source():
    with pytest.raises(RelTypeError):
        pair(rel(X, "!x"), rel([], "1"))


def test_tensor_tags_sides():
    f, g = rel(X, "x := 0"), rel([("y", VAR)], "!y")
    t = tensor(f, g)
    assert t.target == Tensor(COMM, NAT) and len(t.sources) == 2
    assert Elem(((Write(0),), ()), TensorOut(0, Star)) in t.elems


def test_symmetry_matches_exchange():
    r = rel([("x", VAR), ("y", VAR)], "x := !y")
    swapped = rel([("y", VAR), ("x", VAR)], "x := !y")
    assert symm(r) == swapped
    assert permute(permute(r, [1, 0]), [1, 0]) == r


def test_weakening_matches_semantics():
    r = rel(X, "x := 1")
    assert weaken(r, VAR) == rel(X + [("y", VAR)], "x := 1")


def test_permute_rejects_non_permutation():
    with pytest.raises(RelTypeError):
        permute(rel(X, "!x"), [0, 0])


def test_compose_checks_types():
    with pytest.raises(RelTypeError):
        compose(rel(X, "!x"), [rel([], "skip")], B)
    with pytest.raises(RelTypeError):
        compose(rel(X, "!x"), [], B)


def test_ev_shape():
    e = ev(NAT, COMM, Bounds(max_nat=0, max_arg_len=1))
    assert e.elems == {Elem(((FunEv((), Star),), ()), Star),
                       Elem(((FunEv((NatVal(0),), Star),), (NatVal(0),)), Star)}


# map laws ------------------------------------------------------------------------

def test_star_slice_contains_unit():
    r = rel(X, "x := 1")
    sl = star_slice(r, 2, 3)
    assert (((),), ()) in sl
    assert (((Write(1), Write(1)),), (Star, Star)) in sl


@pytest.mark.parametrize("src", ["skip", "x := !x + 1", "!x", "random", "while !x do x := 1",
                                 "lambda c:comm. c; x := 0"])
def test_denotations_satisfy_map_laws(src):
    assert map_laws_hold(denote(X, parse(src), None, B), B)


def test_redex_denotations_satisfy_map_laws():
    for a, m, n in redexes()[::7]:
        d = denote(REDEX_CTX[1:], n, a, REDEX_BOUNDS)
        assert map_laws_hold(d, REDEX_BOUNDS)


E = ((),)
A = ("a",)


def test_law_checker_flags_missing_unit():
    bad = check_map_laws({((A,), ("b",))}, 1, 2, 3)
    assert bad["homomorphism"]


def test_law_checker_flags_identity_reflection():
    pairs = {(E, ()), ((A,), ())}
    bad = check_map_laws(pairs, 1, 2, 3)
    assert bad["identity reflection"]


def test_law_checker_flags_missing_product():
    pairs = {(E, ()), ((A,), ("b",))}
    bad = check_map_laws(pairs, 1, 2, 3)
    assert bad["homomorphism"] and not bad["decomposition"]


def test_law_checker_flags_indecomposable_pair():
    pairs = {(E, ()), ((("a", "a"),), ("b", "b"))}
    bad = check_map_laws(pairs, 1, 2, 3)
    assert bad["decomposition"]


def test_law_checker_accepts_generated_slice():
    pairs = star_slice(Rel((VAR,), COMM, frozenset({Elem(((Write(1),),), Star)})), 2, 3)
    assert not any(check_map_laws(pairs, 1, 2, 3).values())
