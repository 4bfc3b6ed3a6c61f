"""Command-line entry point: check, graph, translate, run, difftest, bench.

Exit codes: 0 clean, 1 findings (or a failed differential test), 2 input
error, 3 runtime error or exhausted fuel.
"""
from __future__ import annotations

import argparse
import json
import sys

from .corocheck import check, diagnostics_json, emit_dot, emit_json, filter_graph
from .lang import LangError, parse_program, print_program, typecheck
from .lang.errors import TypeCheckFailed

EXIT_OK, EXIT_FINDINGS, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3


class _InputError(Exception):
    pass


def _load(path: str, attr_name: str = "coroutine_fn"):
    try:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as ex:
        raise _InputError(f"{path}: {ex.strerror}") from None
    try:
        return typecheck(parse_program(source, path, coroutine_keyword=attr_name))
    except TypeCheckFailed as ex:
        raise _InputError("\n".join(f"{path}:{e.pos}: error: {e.message}" for e in ex.errors)) from None
    except LangError as ex:
        raise _InputError(f"{path}:{ex.pos}: error: {ex.message}") from None


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    tp = _load(args.file, args.attr_name)
    r = check(tp)
    if args.json:
        _write(diagnostics_json(r.diagnostics) + "\n", None)
    else:
        for d in r.diagnostics:
            print(f"{args.file}:{d}")
    return EXIT_OK if r.clean else EXIT_FINDINGS


def cmd_graph(args) -> int:
    tp = _load(args.file, args.attr_name)
    r = check(tp)
    g = filter_graph(r.graph, r.inference) if args.filter else r.graph
    if args.json:
        _write(emit_json(g, r.inference) + "\n", args.out)
    else:
        _write(emit_dot(g, r.inference, r.diagnostics), args.out)
    return EXIT_OK


def _translated(tp, file: str, stage: str = "cps"):
    from .cps import run_pipeline

    r = check(tp)
    if not r.clean:
        for d in r.findings:
            print(f"{file}:{d}", file=sys.stderr)
        return None
    return run_pipeline(tp, stage)[stage]


def cmd_translate(args) -> int:
    from .cps import TranslationError

    tp = _load(args.file, args.attr_name)
    try:
        out = _translated(tp, args.file, args.stage)
    except TranslationError as ex:
        print(f"{args.file}:{ex.pos}: error: {ex.message}", file=sys.stderr)
        return EXIT_INPUT
    if out is None:
        return EXIT_FINDINGS
    _write(print_program(out.program), args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    from .cps import TranslationError
    from .interp import FUEL, OK, Schedule, run_cps, run_direct

    tp = _load(args.file, args.attr_name)
    schedule = Schedule.parse(args.schedule or "")
    engine = "cps" if args.cps or tp.cps else "direct"
    if engine == "direct":
        res = run_direct(tp, schedule, args.fuel)
    else:
        prog = tp
        if not tp.cps:
            try:
                prog = _translated(tp, args.file)
            except TranslationError as ex:
                print(f"{args.file}:{ex.pos}: error: {ex.message}", file=sys.stderr)
                return EXIT_INPUT
            if prog is None:
                return EXIT_FINDINGS
        res = run_cps(prog, schedule, args.fuel, pool_size=0 if args.no_pool else 64)
    if args.json:
        print(json.dumps({"engine": engine, "status": res.status, "steps": res.steps,
                          "trace": [f"{k} {v}" for k, v in res.trace.events], "stats": res.stats}, indent=2))
    else:
        sys.stdout.write(res.trace.to_text())
    if res.status != OK:
        print(f"{args.file}: {res.message if res.status != FUEL else 'fuel exhausted'}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_difftest(args) -> int:
    from .cps import TranslationError
    from .interp.difftest import diff_test

    tp = _load(args.file, args.attr_name)
    r = check(tp)
    if not r.clean:
        for d in r.findings:
            print(f"{args.file}:{d}", file=sys.stderr)
        return EXIT_FINDINGS
    try:
        rep = diff_test(tp, args.schedules, args.fuel, depth=args.depth, seed=args.seed)
    except TranslationError as ex:
        print(f"{args.file}:{ex.pos}: error: {ex.message}", file=sys.stderr)
        return EXIT_INPUT
    print(rep.dumps())
    return EXIT_OK if rep.passed else EXIT_FINDINGS


def cmd_bench(args) -> int:
    from .bench import BENCHMARKS, run_bench

    names = BENCHMARKS if args.bench == "all" else (args.bench,)
    results = [run_bench(n, args.pool == "on", args.iters).to_json() for n in names]
    print(json.dumps(results if len(results) > 1 else results[0], indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    from .cps import STAGES
    from .interp import DEFAULT_FUEL

    p = argparse.ArgumentParser(prog="corocpc", description="Coroutine annotation checker, CPS translator and runtime.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file")
        sp.add_argument("--attr-name", default="coroutine_fn", help="keyword spelling the coroutine annotation")
        return sp

    sp = with_file("check", "infer annotations and report mismatches")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_check)

    sp = with_file("graph", "print the annotated call graph as DOT")
    sp.add_argument("--filter", action="store_true", help="drop external native leaves")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_graph)

    sp = with_file("translate", "print a translation stage")
    sp.add_argument("--stage", choices=STAGES[1:], default="cps")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_translate)

    sp = with_file("run", "execute a program and print its trace")
    sp.add_argument("--schedule", help="comma-separated coroutine ordinals")
    sp.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--direct", action="store_true")
    g.add_argument("--cps", action="store_true")
    sp.add_argument("--no-pool", action="store_true")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_run)

    sp = with_file("difftest", "compare direct and trampoline execution")
    sp.add_argument("--schedules", type=int, default=100, help="samples when enumeration is too large")
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    sp.add_argument("--json", action="store_true", help="accepted for uniformity; output is always JSON")
    sp.set_defaults(func=cmd_difftest)

    sp = sub.add_parser("bench", help="runtime micro-benchmarks")
    sp.add_argument("--bench", choices=("lifecycle", "nesting", "yield", "all"), default="all")
    sp.add_argument("--pool", choices=("on", "off"), default="on")
    sp.add_argument("--iters", type=int, default=10000)
    sp.add_argument("--json", action="store_true", help="accepted for uniformity; output is always JSON")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _InputError as ex:
        print(ex, file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
