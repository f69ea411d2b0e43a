"""Synthetic stock-ticker traces and the S1-S7 throughput suite.

Trace rows are ``stockSymbol,closingPrice,timestamp`` with symbols drawn
from {1, 2, 3}, integer prices drawn uniformly from a range and timestamps
counting up from 0.

Queries:

S1  passthrough of every tuple
S2  tuples with stockSymbol = 1
S3  average closingPrice over a window of 5 symbol-1 events
S4  tuples whose price exceeds the average of the last 50 prices
    (the window includes the tuple itself, so the first 49 emit nothing)
S5  symbol-2 tuples with price < 2 whose next symbol-1 tuple has the same price
S6  on the pairs (k-th symbol-1 price, k-th symbol-2 price): a pair with
    p2 < 2, then any number of pairs with p1 > p2, then a pair with p2 < 2;
    the opening pair is reported when the closing one arrives
S7  symbol-1 tuples (from the same pairing) for which the 50-pair average of
    p1 was above that of p2 in at least 4 of the last 5 pairs
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from pathlib import Path

from .core import GroupProcessor, Processor, connect
from .esql import Interpreter
from .fsm import MooreMachine, Transition
from .functions import ContextFunction, ScalarFunction
from .trace_ops import Unpack

HEADER = "stockSymbol,closingPrice,timestamp"


def generate(count: int, seed: int = 1, prices=(0, 9)) -> list[str]:
    """CSV lines (header first) of a reproducible random trace."""
    if count < 1:
        raise ValueError("a trace needs at least one event")
    rng = random.Random(seed)
    lo, hi = prices
    lines = [HEADER]
    for t in range(count):
        lines.append(f"{rng.randint(1, 3)},{rng.randint(lo, hi)},{t}")
    return lines


def write_trace(path, count: int, seed: int = 1, prices=(0, 9)) -> Path:
    path = Path(path)
    path.write_text("\n".join(generate(count, seed, prices)) + "\n", encoding="utf-8")
    return path


# -- queries -----------------------------------------------------------------

ZIP = (
    "SELECT T.closingPrice AS p1, U.closingPrice AS p2, T.timestamp AS t "
    "FROM ((THE TUPLES OF *) WHERE stockSymbol = 1) AS T, "
    "((THE TUPLES OF *) WHERE stockSymbol = 2) AS U"
)

ESQL = {
    "S1": "THE TUPLES OF *",
    "S2": "(THE TUPLES OF *) WHERE stockSymbol = 1",
    "S3": (
        "APPLY $s / 5 WITH (GET (COMBINE * WITH ADDITION) FROM "
        "(APPLY closingPrice WITH ((THE TUPLES OF *) WHERE stockSymbol = 1)) "
        "ON A WINDOW OF 5) AS $s"
    ),
    "S4": (
        "SELECT T.stockSymbol, T.closingPrice, T.timestamp "
        "FROM (TRIM 49 OF THE TUPLES OF *) AS T, "
        "(APPLY $s / 50 WITH (GET (COMBINE * WITH ADDITION) FROM "
        "(APPLY closingPrice WITH THE TUPLES OF *) ON A WINDOW OF 50) AS $s) AS W "
        "WHERE T.closingPrice > W"
    ),
    "S7": (
        "SELECT 1 AS stockSymbol, Z.p1 AS closingPrice, Z.t AS timestamp "
        f"FROM (TRIM 53 OF ({ZIP})) AS Z, "
        "(GET (COMBINE (APPLY IF $1 THEN 1 ELSE 0 WITH *) WITH ADDITION) FROM "
        "(APPLY $a > $b WITH "
        f"(APPLY $x / 50 WITH (GET (COMBINE * WITH ADDITION) FROM (APPLY p1 WITH ({ZIP})) "
        "ON A WINDOW OF 50) AS $x) AS $a, "
        f"(APPLY $y / 50 WITH (GET (COMBINE * WITH ADDITION) FROM (APPLY p2 WITH ({ZIP})) "
        "ON A WINDOW OF 50) AS $y) AS $b) "
        "ON A WINDOW OF 5) AS C WHERE C >= 4"
    ),
}

QUERIES = ("S1", "S2", "S3", "S4", "S5", "S6", "S7")


def _f(name, fn):
    return ContextFunction(name, 1, fn)


def s5_machine() -> MooreMachine:
    trigger = ScalarFunction("sym2-low", 1, lambda e: e["stockSymbol"] == 2 and e["closingPrice"] < 2)
    sym1 = ScalarFunction("sym1", 1, lambda e: e["stockSymbol"] == 1)
    remember = ("pending", _f("append", lambda e, c: c["pending"] + [e]))
    match = ("matched", _f("same-price", lambda e, c: [p for p in c["pending"]
                                                         if p["closingPrice"] == e["closingPrice"]]))
    clear = ("pending", _f("clear", lambda e, c: []))
    trans = []
    for s in ("collect", "resolve"):
        trans.append(Transition(s, "collect", trigger, [remember]))
        trans.append(Transition(s, "resolve", sym1, [match, clear]))
    outputs = {"resolve": _f("matched", lambda e, c: c["matched"])}
    return MooreMachine("collect", outputs, trans, {"pending": [], "matched": []})


def s6_machine() -> MooreMachine:
    low = ScalarFunction("p2-low", 1, lambda e: e["p2"] < 2)
    above = ScalarFunction("p1-above", 1, lambda e: e["p1"] > e["p2"])
    anything = ScalarFunction("true", 1, lambda e: True)
    start = ("start", _f("start", lambda e, c: e))
    found = ("found", _f("found", lambda e, c: c["start"]))
    trans = [Transition("idle", "inside", low, [start])]
    for s in ("inside", "match"):
        trans += [
            Transition(s, "match", low, [found, start]),
            Transition(s, "inside", above),
            Transition(s, "idle", anything),
        ]
    outputs = {"match": _f("found", lambda e, c: c["found"])}
    return MooreMachine("idle", outputs, trans, {"start": None, "found": None})


def _chain(*procs: Processor) -> GroupProcessor:
    g = GroupProcessor(procs[0].input_arity, 1)
    for a, b in zip(procs, procs[1:]):
        connect(a, 0, b, 0)
    g.add(*procs)
    for i in range(procs[0].input_arity):
        g.associate_input(i, procs[0], i)
    g.associate_output(0, procs[-1])
    return g


def build(query: str, interpreter: Interpreter | None = None) -> Processor:
    """Pipeline reading CSV lines (header first) and producing the query's output."""
    it = interpreter or Interpreter(palettes=("tuples", "ltl", "fsm"))
    if query in ESQL:
        return it.interpret(ESQL[query])
    if query == "S5":
        return _chain(it.interpret("THE TUPLES OF *"), s5_machine(), Unpack())
    if query == "S6":
        return _chain(it.interpret(ZIP), s6_machine())
    raise KeyError(f"unknown query {query!r}")


def run_query(query: str, lines, collect: bool = True):
    """Push ``lines`` through query ``query``; return (outputs or count, build s, run s)."""
    t0 = time.perf_counter()
    proc = build(query)
    t1 = time.perf_counter()
    out = [] if collect else None
    count = 0
    push = proc.push
    take = proc.take_output
    for k, line in enumerate(lines):
        push(0, line)
        if k & 1023 == 0:
            got = take(0)
            count += len(got)
            if collect:
                out.extend(got)
    proc.push_end()
    got = take(0)
    count += len(got)
    if collect:
        out.extend(got)
    t2 = time.perf_counter()
    return (out if collect else count), t1 - t0, t2 - t1


@dataclass
class BenchResult:
    query: str
    events: int
    seconds: float
    build_seconds: float
    outputs: int

    @property
    def events_per_second(self) -> float:
        return self.events / self.seconds if self.seconds > 0 else float("inf")


def check(query: str, lines) -> tuple[bool, int]:
    """Compare the engine with the brute-force evaluator; return (equal, outputs)."""
    from .events import traces_equal
    from .reference import evaluate

    got, _, _ = run_query(query, lines)
    want = evaluate(query, lines)
    return traces_equal(got, want), len(want)


def run_suite(lines, queries=QUERIES, check_prefix: int = 10_000, verify: bool = True) -> list[BenchResult]:
    """Check each query on a prefix, then time it on the whole trace."""
    from .errors import EngineError

    events = len(lines) - 1
    results = []
    for q in queries:
        if verify:
            ok, _ = check(q, lines[: check_prefix + 1])
            if not ok:
                raise EngineError(f"{q}: output differs from the reference evaluator")
        n, b, s = run_query(q, lines, collect=False)
        results.append(BenchResult(q, events, s + b, b, n))
    return results


def report(results: list[BenchResult], fmt: str = "text") -> str:
    base = next((r.events_per_second for r in results if r.query == "S1"), None)
    rows = []
    for r in results:
        rel = r.events_per_second / base if base else float("nan")
        rows.append((r.query, r.events, r.seconds, r.events_per_second, rel, r.build_seconds, r.outputs))
    if fmt == "csv":
        lines = ["query,events,seconds,events_per_second,relative_to_S1,build_seconds,outputs"]
        lines += [f"{q},{e},{s:.6f},{eps:.1f},{rel:.4f},{b:.6f},{o}" for q, e, s, eps, rel, b, o in rows]
        return "\n".join(lines) + "\n"
    head = f"{'query':<6}{'events':>10}{'seconds':>11}{'events/s':>13}{'vs S1':>8}{'build s':>10}{'outputs':>10}"
    lines = [head]
    for q, e, s, eps, rel, b, o in rows:
        lines.append(f"{q:<6}{e:>10}{s:>11.3f}{eps:>13.0f}{rel:>8.3f}{b:>10.4f}{o:>10}")
    return "\n".join(lines) + "\n"


__all__ = ["generate", "write_trace", "ESQL", "ZIP", "QUERIES", "build", "run_query",
           "run_suite", "check", "report", "BenchResult", "s5_machine", "s6_machine"]
