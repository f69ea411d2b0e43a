"""Command-line front end.

    evstream [run] -q QUERY [--input [NAME=]FILE ...] [--output FILE]
    evstream bench --events N --seed K --queries S1,S3 --report text|csv
    evstream generate --events N --seed K [--output FILE]

Exit status: 0 success, 1 query error (parse or build), 2 runtime error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import BuildError, EngineError, ParseError, PipeConnectionError, PipelineError
from .events import Troolean, Tuple
from .tuples import format_scalar, header_line, infer, row_line

EXIT_QUERY, EXIT_RUNTIME, EXIT_IO = 1, 2, 3


def render(e) -> str:
    """One-line text form of an output event (tuples give their CSV row)."""
    if isinstance(e, Tuple):
        return row_line(e)
    if isinstance(e, Troolean):
        return e.value
    if isinstance(e, list):
        return "[" + ",".join(render(x) for x in e) + "]"
    return format_scalar(e)


class _Writer:
    def __init__(self, fh):
        self.fh = fh
        self.header_done = False

    def write(self, events):
        for e in events:
            if isinstance(e, Tuple) and not self.header_done:
                self.fh.write(header_line(e) + "\n")
                self.header_done = True
            self.fh.write(render(e) + "\n")


def _read_lines(path: str):
    fh = sys.stdin if path == "-" else open(path, encoding="utf-8", newline="")
    try:
        for line in fh:
            line = line.rstrip("\r\n")
            yield infer(line)
    finally:
        if fh is not sys.stdin:
            fh.close()


def _bind_inputs(names: list[str], specs: list[str]) -> list:
    """Map each query input to a file; ``NAME=FILE`` binds by name, bare files by position."""
    by_name: dict[str, str] = {}
    positional = []
    for s in specs:
        name, eq, path = s.partition("=")
        if eq and (name == "*" or name.startswith("$")):
            by_name[name] = path
        else:
            positional.append(s)
    files = []
    for n in names:
        if n in by_name:
            files.append(by_name.pop(n))
        elif positional:
            files.append(positional.pop(0))
        elif not specs and len(names) == 1:
            files.append("-")
        else:
            raise BuildError(f"no input file given for query input {n}")
    if by_name:
        raise BuildError(f"query has no input named {', '.join(by_name)}")
    if positional:
        raise BuildError(f"{len(positional)} more input file(s) than query inputs")
    return files


def cmd_run(args) -> int:
    from .esql import Interpreter

    palettes = args.palette or ["tuples", "ltl", "fsm"]
    it = Interpreter(palettes=palettes)
    for g in args.grammar or []:
        it.add_grammar(Path(g).read_text(encoding="utf-8"))
    if args.query is not None:
        text = args.query
    elif args.query_file:
        text = Path(args.query_file).read_text(encoding="utf-8")
    else:
        raise BuildError("give a query with -q or --query-file")

    if args.parse_only:
        from .esql import is_definition, split_statements
        out = []
        for stmt in split_statements(text):
            if is_definition(stmt):
                it.define(stmt)
                out.append(f"definition: {stmt}")
            else:
                out.append(it.parse(stmt).pretty())
        _emit_text("\n".join(out) + "\n", args.output)
        return 0

    proc = it.execute(text)
    if proc is None:
        raise BuildError("the session contains no query")
    names = list(getattr(proc, "input_names", []))
    files = _bind_inputs(names, args.input or [])
    streams = [_read_lines(f) for f in files]

    fh = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        w = _Writer(fh)
        live = list(enumerate(streams))
        while live:
            nxt = []
            for i, s in live:
                e = next(s, _END)
                if e is _END:
                    continue
                proc.push(i, e)
                nxt.append((i, s))
            w.write(proc.take_output(0))
            live = nxt
        for src in getattr(proc, "sources", []):
            src.push_all()
            w.write(proc.take_output(0))
        if proc.input_arity:
            proc.push_end()
        w.write(proc.take_output(0))
    finally:
        if fh is not sys.stdout:
            fh.close()
        else:
            fh.flush()
    return 0


_END = object()


def _emit_text(text: str, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_bench(args) -> int:
    from .bench import QUERIES, generate, report, run_suite

    queries = [q.strip().upper() for q in args.queries.split(",")] if args.queries else list(QUERIES)
    bad = [q for q in queries if q not in QUERIES]
    if bad:
        raise BuildError(f"unknown benchmark queries: {', '.join(bad)}")
    if args.trace:
        lines = Path(args.trace).read_text(encoding="utf-8").splitlines()
    else:
        lines = generate(args.events, args.seed)
    results = run_suite(lines, queries, check_prefix=args.check_prefix, verify=not args.no_check)
    _emit_text(report(results, args.report), args.output)
    return 0


def cmd_generate(args) -> int:
    from .bench import generate

    _emit_text("\n".join(generate(args.events, args.seed, (args.min_price, args.max_price))) + "\n",
               args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evstream", description="Run event stream queries over CSV traces.")
    sub = p.add_subparsers(dest="command")

    r = sub.add_parser("run", help="run a query (default)")
    r.add_argument("-q", "--query", help="query text (definitions may precede it, separated by '.')")
    r.add_argument("--query-file", help="file holding the query text")
    r.add_argument("--input", action="append", metavar="[NAME=]FILE",
                   help="input trace; repeat for several inputs ('-' is standard input)")
    r.add_argument("--grammar", action="append", metavar="FILE", help="extra grammar rules")
    r.add_argument("--palette", action="append", choices=["tuples", "ltl", "fsm"],
                   help="palettes to load (default: all)")
    r.add_argument("--parse-only", action="store_true", help="print the parse tree and stop")
    r.add_argument("--output", metavar="FILE", help="write results here instead of standard output")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="run the synthetic benchmark suite")
    b.add_argument("--events", type=int, default=100_000)
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--queries", help="comma-separated subset of S1..S7")
    b.add_argument("--report", choices=["text", "csv"], default="text")
    b.add_argument("--trace", help="use this CSV trace instead of generating one")
    b.add_argument("--check-prefix", type=int, default=10_000,
                   help="events checked against the reference evaluator")
    b.add_argument("--no-check", action="store_true", help="skip the reference check")
    b.add_argument("--output", metavar="FILE")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("generate", help="write a synthetic ticker trace")
    g.add_argument("--events", type=int, default=1000)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--min-price", type=int, default=0)
    g.add_argument("--max-price", type=int, default=9)
    g.add_argument("--output", metavar="FILE")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in ("run", "bench", "generate", "-h", "--help"):
        argv.insert(0, "run")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except (BuildError, PipeConnectionError) as exc:
        print(f"query error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except PipelineError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
