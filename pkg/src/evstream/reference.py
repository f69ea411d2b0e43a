"""Straightforward whole-trace evaluation of the benchmark queries.

Nothing here uses the processor machinery; each query is computed with
plain loops over the parsed rows so it can serve as an independent check.
"""
from __future__ import annotations

from .events import Tuple

COLS = ("stockSymbol", "closingPrice", "timestamp")


def parse(lines) -> list[tuple[int, int, int]]:
    it = iter(lines)
    header = next(it).strip().split(",")
    if tuple(header) != COLS:
        raise ValueError(f"unexpected header {header}")
    return [tuple(int(x) for x in ln.split(",")) for ln in it if ln.strip()]


def _row(r) -> Tuple:
    return Tuple(zip(COLS, r))


def _pairs(rows):
    ones = [r for r in rows if r[0] == 1]
    twos = [r for r in rows if r[0] == 2]
    return [(a[1], b[1], a[2]) for a, b in zip(ones, twos)]


def s1(rows):
    return [_row(r) for r in rows]


def s2(rows):
    return [_row(r) for r in rows if r[0] == 1]


def s3(rows):
    p = [r[1] for r in rows if r[0] == 1]
    return [sum(p[i - 4:i + 1]) / 5 for i in range(4, len(p))]


def s4(rows):
    p = [r[1] for r in rows]
    return [_row(rows[i]) for i in range(49, len(rows)) if p[i] > sum(p[i - 49:i + 1]) / 50]


def s5(rows):
    out = []
    for i, r in enumerate(rows):
        if r[0] == 2 and r[1] < 2:
            j = next((k for k in range(i + 1, len(rows)) if rows[k][0] == 1), None)
            if j is not None and rows[j][1] == r[1]:
                out.append((j, i))
    out.sort()
    return [_row(rows[i]) for _, i in out]


def s6(rows):
    pairs = _pairs(rows)
    out = []
    for k, (p1, p2, t) in enumerate(pairs):
        if p2 >= 2:
            continue
        for m in range(k + 1, len(pairs)):
            q1, q2, _ = pairs[m]
            if q2 < 2:
                out.append((m, k))
                break
            if not q1 > q2:
                break
    out.sort()
    return [Tuple(p1=pairs[k][0], p2=pairs[k][1], t=pairs[k][2]) for _, k in out]


def s7(rows):
    pairs = _pairs(rows)
    n = len(pairs)
    above = {}
    for k in range(49, n):
        a = sum(p[0] for p in pairs[k - 49:k + 1]) / 50
        b = sum(p[1] for p in pairs[k - 49:k + 1]) / 50
        above[k] = a > b
    out = []
    for k in range(53, n):
        if sum(above[j] for j in range(k - 4, k + 1)) >= 4:
            out.append(Tuple(stockSymbol=1, closingPrice=pairs[k][0], timestamp=pairs[k][2]))
    return out


_ALL = {"S1": s1, "S2": s2, "S3": s3, "S4": s4, "S5": s5, "S6": s6, "S7": s7}


def evaluate(query: str, lines) -> list:
    return _ALL[query](parse(lines))
