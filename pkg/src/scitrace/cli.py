"""Command-line front end: ``sci <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .analysis import coherence_check, equiv, goodness_check
from .denotational import denote
from .events import Bounds, TraceSyntaxError, parse_trace, render_event
from .operational import PreconditionError, StuckError, Store, evaluate
from .syntax import (
    NumLit, ParseError, Skip, VAR, free_vars, parse, parse_context, parse_type,
    pretty,
)
from .typecheck import TypeCheckError, infer
from .universal import produce_term, retraction_check, test_term

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _bounds(args) -> Bounds:
    try:
        return Bounds(args.max_nat, args.max_trace, args.max_arg_len, args.max_unfold, args.fuel)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _header_ctx(text: str) -> Optional[str]:
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("# ctx:"):
            return s[len("# ctx:"):]
    return None


def load(path: str, ctx_flag: Optional[str]):
    """Parse a source file and work out its context."""
    text = _read(path)
    term = parse(text)
    spec = ctx_flag if ctx_flag is not None else _header_ctx(text)
    if spec is not None:
        ctx = parse_context(spec)
    else:
        ctx = [(x, VAR) for x in sorted(free_vars(term))]
    return ctx, term


def _show_value(v) -> str:
    if isinstance(v, NumLit):
        return str(v.n)
    if isinstance(v, Skip):
        return "skip"
    return pretty(v)


def _emit(args, payload, text: str):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_check(args) -> int:
    ctx, term = load(args.file, args.ctx)
    t = infer(ctx, term)
    _emit(args, {"type": str(t.type), "used": sorted(t.used)},
          f"{t.type}  (uses: {', '.join(sorted(t.used)) or 'nothing'})")
    return EXIT_OK


def _parse_store(spec: Optional[str]) -> Store:
    if not spec:
        return Store()
    items = {}
    for part in spec.split(","):
        if "=" not in part:
            raise UsageError(f"bad store entry {part!r}; expected name=value")
        k, v = part.split("=", 1)
        try:
            items[k.strip()] = int(v)
        except ValueError as exc:
            raise UsageError(f"bad store value in {part!r}") from exc
    return Store(items)


def cmd_run(args) -> int:
    text = _read(args.file)
    term = parse(text)
    sigma = _parse_store(args.store)
    infer([(x, VAR) for x in sigma], term)
    outcome = evaluate(sigma, term, _bounds(args))
    results = sorted(outcome.results, key=lambda r: (repr(r[0]), _show_value(r[1])))
    payload = {
        "results": [{"store": dict(s), "value": _show_value(v)} for s, v in results],
        "exhausted": outcome.exhausted,
    }
    lines = []
    for s, v in results:
        lines.append(_show_value(v) + (f"  {s!r}" if len(s) else ""))
    if outcome.exhausted:
        lines.append("(fuel exhausted on some branch)")
    if not results:
        lines.insert(0, "no result")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if results else EXIT_FAIL


def cmd_denote(args) -> int:
    ctx, term = load(args.file, args.ctx)
    a = parse_type(args.type) if args.type else None
    d = denote(ctx, term, a, _bounds(args))
    if args.json:
        print(json.dumps(d.to_json(), indent=2))
    else:
        for el in d.sorted_elems():
            print(el.render())
        print(f"# {len(d.elems)} elements")
    return EXIT_OK


def cmd_equiv(args) -> int:
    ctx1, m = load(args.left, args.ctx)
    ctx2, n = load(args.right, args.ctx)
    names = dict(ctx1)
    for x, a in ctx2:
        if names.setdefault(x, a) != a:
            raise UsageError(f"identifier {x} has different types in the two files")
    ctx = sorted(names.items())
    v = equiv(ctx, m, n, _bounds(args))
    _emit(args, v.to_json(), v.text())
    return EXIT_OK if v.equal else EXIT_FAIL


def cmd_cohere(args) -> int:
    ctx, term = load(args.file, args.ctx)
    ok = coherence_check(term, _bounds(args), ctx)
    _emit(args, {"coherent": ok}, "coherent" if ok else "incoherent")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_good(args) -> int:
    ctx, term = load(args.file, args.ctx)
    rep = goodness_check(ctx, term, _bounds(args), args.store_max)
    payload = {
        "good": rep.ok,
        "stores": rep.stores_checked,
        "mismatches": [[k, repr(i)] for k, i in rep.mismatches],
        "unconfirmed": [repr(i) for i in rep.unconfirmed],
    }
    _emit(args, payload, rep.text())
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_retract(args) -> int:
    a = parse_type(args.type)
    rep = retraction_check(a, _bounds(args))
    payload = {
        "type": rep["type"], "ok": rep["ok"], "checked": rep["checked"],
        "missing": [render_event(e) for e in rep["missing"]],
        "extra": [e.render() for e in rep["extra"]],
    }
    text = f"in;out = id on {rep['checked']} events of {a}: {'yes' if rep['ok'] else 'no'}"
    _emit(args, payload, text)
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def _trace_arg(args):
    try:
        return parse_trace(args.trace)
    except TraceSyntaxError as exc:
        raise UsageError(f"bad trace literal: {exc}") from exc


def cmd_test_gen(args) -> int:
    a = parse_type(args.type)
    t = test_term(a, _trace_arg(args), "x", _bounds(args))
    _emit(args, {"ctx": [["x", str(a)]], "term": pretty(t)}, f"x:{a} |- {pretty(t)}")
    return EXIT_OK


def cmd_produce_gen(args) -> int:
    a = parse_type(args.type)
    spec = produce_term(a, _trace_arg(args), _bounds(args))
    ctx = ", ".join(f"{x}:{t}" for x, t in spec.ctx)
    payload = {"ctx": [[x, str(t)] for x, t in spec.ctx], "term": pretty(spec.term),
               "init": dict(spec.init), "final": dict(spec.final)}
    text = f"{ctx} |- {pretty(spec.term)}\ninit  {spec.init!r}\nfinal {spec.final!r}"
    _emit(args, payload, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-nat", type=int, default=2)
    common.add_argument("--max-trace", type=int, default=3)
    common.add_argument("--max-arg-len", type=int, default=2)
    common.add_argument("--max-unfold", type=int, default=2)
    common.add_argument("--fuel", type=int, default=10000)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--ctx", help='typing context, e.g. "x:var, f:comm -o comm"')

    p = argparse.ArgumentParser(prog="sci", description="SCI semantics workbench")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    add("check", cmd_check, "type-check a term").add_argument("file")
    sp = add("run", cmd_run, "evaluate a ground term")
    sp.add_argument("file")
    sp.add_argument("--store", help="initial store, e.g. x=1,y=0")
    sp = add("denote", cmd_denote, "print the bounded denotation")
    sp.add_argument("file")
    sp.add_argument("--type")
    sp = add("equiv", cmd_equiv, "compare two terms at bounds")
    sp.add_argument("left")
    sp.add_argument("right")
    add("cohere", cmd_cohere, "check pairwise coherence").add_argument("file")
    sp = add("good", cmd_good, "check goodness against the evaluator")
    sp.add_argument("file")
    sp.add_argument("--store-max", type=int)
    add("retract", cmd_retract, "verify in;out = id").add_argument("--type", required=True)
    for name, fn in (("test-gen", cmd_test_gen), ("produce-gen", cmd_produce_gen)):
        sp = add(name, fn, "emit a definability term")
        sp.add_argument("--type", required=True)
        sp.add_argument("--trace", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except (UsageError, ParseError, TypeCheckError, PreconditionError, StuckError) as exc:
        print(f"sci: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
