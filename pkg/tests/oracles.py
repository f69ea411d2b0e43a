"""Whole-trace reference evaluators used as test oracles.

These work on complete Python lists with no streaming machinery, so they
are independent of the engine under test.
"""
from itertools import accumulate

U = "?"  # unknown verdict in the three-valued oracle


def decimate(xs, n):
    return [x for i, x in enumerate(xs) if i % n == 0]


def trim(xs, n):
    return xs[n:]


def freeze(xs):
    return [xs[0]] * len(xs) if xs else []


def prefix(xs, n):
    return xs[:n]


def filter_(xs, guards):
    return [x for x, g in zip(xs, guards) if g]


def window(xs, n, whole):
    """``whole`` maps a complete window (a list) to its value."""
    return [whole(xs[i:i + n]) for i in range(len(xs) - n + 1)]


def cumsum(xs):
    return list(accumulate(xs))


def running_mean(xs):
    return [s / (i + 1) for i, s in enumerate(accumulate(xs))]


def slicer(xs, key, body_last):
    """After each event, the last body output of every slice, in creation order.

    ``body_last(events)`` returns the last output of the body on ``events`` or
    None when the body has produced nothing.
    """
    out = []
    for n in range(1, len(xs) + 1):
        groups = {}
        for x in xs[:n]:
            groups.setdefault(key(x), []).append(x)
        out.append([v for v in (body_last(g) for g in groups.values()) if v is not None])
    return out


# -- LTL ---------------------------------------------------------------------
# formulas: "p" | ("not", f) | ("and", f, g) | ("or", f, g) | ("G", f) | ("F", f)
#           | ("X", f) | ("U", f, g); events are letters or sets of letters


def holds(p, e):
    return p in e if isinstance(e, (set, frozenset)) else e == p


def bool_stream(f, trace):
    """Two-valued stream semantics: entry i is the verdict on suffix i of the operand stream."""
    if isinstance(f, str):
        return [holds(f, e) for e in trace]
    op = f[0]
    if op == "not":
        return [not v for v in bool_stream(f[1], trace)]
    if op in ("and", "or"):
        a, b = bool_stream(f[1], trace), bool_stream(f[2], trace)
        m = min(len(a), len(b))
        return [(a[i] and b[i]) if op == "and" else (a[i] or b[i]) for i in range(m)]
    if op == "X":
        return bool_stream(f[1], trace)[1:]
    s = bool_stream(f[1], trace)
    if op == "G":
        return [all(s[i:]) for i in range(len(s))]
    if op == "F":
        return [any(s[i:]) for i in range(len(s))]
    if op == "U":
        t = bool_stream(f[2], trace)
        m = min(len(s), len(t))
        out = []
        for i in range(m):
            v = False
            for j in range(i, m):
                if t[j]:
                    v = True
                    break
                if not s[j]:
                    break
            out.append(v)
        return out
    raise ValueError(op)


def _and3(a, b):
    if a is False or b is False:
        return False
    if a is True and b is True:
        return True
    return U


def _or3(a, b):
    if a is True or b is True:
        return True
    if a is False and b is False:
        return False
    return U


def _not3(a):
    return U if a == U else (not a)


def verdict3(f, prefix, i=0):
    """Three-valued verdict of ``f`` at position ``i`` given only ``prefix``.

    Positions past the prefix are unknown; temporal operators combine the
    known positions with an unknown remainder.
    """
    n = len(prefix)
    if isinstance(f, str):
        return holds(f, prefix[i]) if i < n else U
    op = f[0]
    if op == "not":
        return _not3(verdict3(f[1], prefix, i))
    if op == "and":
        return _and3(verdict3(f[1], prefix, i), verdict3(f[2], prefix, i))
    if op == "or":
        return _or3(verdict3(f[1], prefix, i), verdict3(f[2], prefix, i))
    if op == "X":
        return verdict3(f[1], prefix, i + 1)
    if op == "G":
        acc = U
        for j in range(i, n):
            acc = _and3(acc, verdict3(f[1], prefix, j))
        return acc
    if op == "F":
        acc = U
        for j in range(i, n):
            acc = _or3(acc, verdict3(f[1], prefix, j))
        return acc
    if op == "U":
        acc = U
        for j in range(n - 1, i - 1, -1):
            acc = _or3(verdict3(f[2], prefix, j), _and3(verdict3(f[1], prefix, j), acc))
        return acc
    raise ValueError(op)


def troolean_stream(f, trace):
    return [verdict3(f, trace[:n]) for n in range(1, len(trace) + 1)]


# -- Moore machines ------------------------------------------------------------


def table_machine(initial, table, outputs, trace):
    """``table[(state, event)]`` is the next state or absent (stay, silent)."""
    state, out = initial, []
    for e in trace:
        nxt = table.get((state, e))
        if nxt is None:
            continue
        state = nxt
        if outputs.get(state) is not None:
            out.append(outputs[state])
    return out
