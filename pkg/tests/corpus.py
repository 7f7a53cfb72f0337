"""Shared test corpora: ground terms for goodness, generated beta-redexes."""

from scitrace.events import Bounds
from scitrace.syntax import Arrow, COMM, NAT, VAR, parse

GOOD_CTX = [("x", VAR), ("y", VAR)]

# stores range over 0..2; denotations need room for one increment
GOOD_BOUNDS = Bounds(max_nat=3, max_trace=7, max_arg_len=2, max_unfold=3, fuel=10000)
GOOD_STORE_MAX = 2

# (label, source); every term is ground and typed under x:var, y:var
GOOD_CORPUS = [
    ("skip", "skip"),
    ("literal", "3"),
    ("deref", "!x"),
    ("assign const", "x := 1"),
    ("increment", "x := !x + 1"),
    ("copy", "x := !y"),
    ("assign then read", "x := 2; !x"),
    ("monus", "!x - !y"),
    ("compare", "!x = !y"),
    ("less", "!y < !x"),
    ("seq of assigns", "x := 1; y := !x"),
    ("effectful operand", "(x := 1; 2) - !x"),
    ("effectful value", "x := (y := 1; 2)"),
    ("ifzero comm", "ifzero !x then x := 1 else skip"),
    ("ifzero nat", "ifzero !x then 0 else !y"),
    ("ifzero on difference", "ifzero !x - !y then skip else x := !y"),
    ("countdown", "while !x = 0 do x := !x - 1"),
    ("count up to two", "while !x = 2 do x := !x + 1"),
    ("loop never entered", "while 1 do x := 0"),
    ("local swap", "new z in z := !x; x := !y; y := !z"),
    ("local read", "new z in (z := 1; !z + !x)"),
    ("local loop", "new z in (while !z = 1 do z := 1; x := !z)"),
    ("local chain", "new z in new w in (z := !x; w := !z; !w)"),
    ("local copy", "new z in (z := !x; !z)"),
    ("diverge", "diverge"),
    ("guarded divergence", "ifzero !x then diverge else skip"),
    ("write then diverge", "x := 1; diverge"),
    ("spin", "while 0 do x := !x"),
    ("var-typed conditional", "ifzero !x then x else y"),
    ("bad variable write", "mkvar(lambda n:nat. x := n, !x) := 2"),
    ("constant bad variable", "!(mkvar(lambda n:nat. skip, 3))"),
    ("var-typed bad variable", "mkvar(lambda n:nat. x := n, !y)"),
    ("bad variable via lambda", "(lambda v:var. v := 1) (mkvar(lambda n:nat. x := n, !x))"),
    ("command twice", "(lambda c:comm. c; c) (x := 1)"),
    ("random", "random"),
    ("random assignment", "x := random"),
    ("random local", "new z in (z := random; ifzero !z then skip else x := !z)"),
    ("random branch", "ifzero random then x := 1 else skip"),
]


def good_terms():
    return [(label, parse(src)) for label, src in GOOD_CORPUS]


# ---------------------------------------------------------------------------
# beta-redexes (lambda x. M) N
# ---------------------------------------------------------------------------

REDEX_CTX = [("a", VAR), ("b", VAR), ("f", Arrow(COMM, COMM))]
REDEX_BOUNDS = Bounds(max_nat=1, max_trace=2, max_arg_len=2, max_unfold=2, fuel=5000)

# bodies use x at most twice, never inside a loop, and only the context
# identifier a; arguments use only b and f, so the application is affine.
# every natural that can flow through x stays within max_nat.
REDEX_TEMPLATES = {
    COMM: (
        ["x", "x; x", "a := 1; x", "ifzero !a then x else skip", "x; !a", "x; a := 0"],
        ["skip", "b := 1", "b := !b - 1", "ifzero !b then skip else diverge",
         "new z in z := !b", "diverge"],
    ),
    NAT: (
        ["a := x", "x - x", "ifzero x then skip else a := 0", "x = 1", "even(x)", "x < !a"],
        ["0", "1", "!b", "(b := 1; 0)", "new z in (z := !b; !z)", "random"],
    ),
    VAR: (
        ["x := 1", "!x", "x := 0; !x", "ifzero !x then x := 1 else skip", "x := !x; skip"],
        ["b", "mkvar(lambda n:nat. b := n, !b)", "mkvar(lambda n:nat. skip, 1)",
         "ifzero !b then b else b"],
    ),
    Arrow(COMM, COMM): (
        ["x skip", "x (a := 1)", "x (a := !a - 1)", "x skip; !a"],
        ["lambda c:comm. c", "lambda c:comm. c; c", "lambda c:comm. b := 1",
         "lambda c:comm. skip", "f"],
    ),
    Arrow(NAT, COMM): (
        ["x 1", "x !a", "x (a := 1; 0)"],
        ["lambda n:nat. b := n", "lambda n:nat. ifzero n then skip else diverge",
         "lambda n:nat. skip"],
    ),
    Arrow(VAR, COMM): (
        ["x a", "x a; !a"],
        ["lambda v:var. v := 1", "lambda v:var. v := !v", "lambda v:var. b := !v"],
    ),
}


def redexes():
    """Triples ``(A, M, N)`` with ``a:var, x:A |- M`` and ``b, f |- N : A``."""
    out = []
    for a, (bodies, args) in REDEX_TEMPLATES.items():
        for m in bodies:
            for n in args:
                out.append((a, parse(m), parse(n)))
    return out
