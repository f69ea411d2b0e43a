import pytest
from hypothesis import given, settings, strategies as st

import oracles
from evstream.core import run_pull, run_push
from evstream.errors import PipelineError
from evstream.esql import Interpreter
from evstream.events import FF, TT, UNK, Troolean, Tuple
from evstream.basic import FunctionProcessor, Passthrough
from evstream.functions import ContextFunction, ScalarFunction
from evstream.ltl import (Always, Eventually, Globally, Next, Quantifier, Sometime, Until,
                          atom, boolean_monitor, troolean_monitor)
from evstream.trace_ops import Trim

letters = st.sampled_from("abc")
traces = st.lists(st.one_of(letters, st.frozensets(letters, max_size=3)), max_size=12)


def formulas(depth):
    if depth == 0:
        return letters
    sub = formulas(depth - 1)
    return st.one_of(
        letters,
        st.tuples(st.just("not"), sub),
        st.tuples(st.sampled_from(["and", "or", "U"]), sub, sub),
        st.tuples(st.sampled_from(["G", "F", "X"]), sub),
    )


TO3 = {True: TT, False: FF, oracles.U: UNK}


@settings(max_examples=200)
@given(formulas(3), traces)
def test_boolean_monitor_matches_stream_semantics(f, trace):
    want = oracles.bool_stream(f, trace)
    assert run_push(boolean_monitor(f), trace) == want
    assert run_pull(boolean_monitor(f), trace) == want


@settings(max_examples=200)
@given(formulas(3), traces)
def test_boolean_verdicts_are_final_when_emitted(f, trace):
    """Whatever is emitted before the end of the trace is a prefix of the final answer."""
    p = boolean_monitor(f)
    seen = []
    for e in trace:
        p.push(0, e)
        seen += p.take_output(0)
    p.push_end()
    final = seen + p.take_output(0)
    assert seen == final[: len(seen)]


@settings(max_examples=200)
@given(formulas(3), traces)
def test_troolean_monitor_matches_prefix_semantics(f, trace):
    want = [TO3[v] for v in oracles.troolean_stream(f, trace)]
    # atoms and their Boolean combinations stay plain bools, which are definite verdicts
    assert [Troolean.of(v) for v in run_push(troolean_monitor(f), trace)] == want
    assert [Troolean.of(v) for v in run_pull(troolean_monitor(f), trace)] == want


@given(formulas(2), traces)
def test_troolean_verdicts_never_change_once_decided(f, trace):
    out = [Troolean.of(v) for v in run_push(troolean_monitor(f), trace)]
    for i, v in enumerate(out):
        if v is not UNK:
            assert all(w is v for w in out[i:])


@given(st.lists(st.booleans(), max_size=20))
def test_next_is_trim_one(xs):
    assert run_push(Next(), xs) == run_push(Trim(1), xs)


def test_globally_and_eventually_emit_batches():
    g = Globally()
    g.push(0, True)
    g.push(0, True)
    assert g.take_output(0) == []
    g.push(0, False)
    assert g.take_output(0) == [False, False, False]
    e = Eventually()
    for x in (False, False, True):
        e.push(0, x)
    assert e.take_output(0) == [True, True, True]


def test_until_waits_for_right_operand():
    u = Until()
    u.push(0, True)
    u.push(1, False)
    assert u.take_output(0) == []
    u.push(0, True)
    u.push(1, True)
    assert u.take_output(0) == [True, True]


def test_non_boolean_input_is_rejected():
    with pytest.raises(PipelineError):
        run_push(Globally(), [1])


def test_always_on_constant_verdicts():
    assert run_push(Always(Passthrough()), [TT, TT, FF]) == [UNK, UNK, FF]
    assert run_push(Sometime(Passthrough()), [FF, TT, FF]) == [UNK, TT, TT]


def test_implication_example():
    f = ("or", ("not", "a"), ("F", "b"))
    trace = ["a", "c", "c", "b"]
    assert run_push(troolean_monitor(f), trace)[:3] == [UNK, UNK, UNK]
    assert run_push(troolean_monitor(f), trace)[3] is TT
    p = boolean_monitor(f)
    for e in trace[:3]:
        p.push(0, e)
    assert p.take_output(0) == []
    p.push(0, "b")
    assert p.take_output(0) == [True, True, True, True]


def test_atom_on_tuples_and_sets():
    assert run_push(atom("a"), [{"a"}, Tuple(a=True), Tuple(a=False), "a", "b"]) == [
        True, True, False, True, False]


MEMBERS = ScalarFunction("members", 1, lambda e: sorted(e))


def _above_two():
    return FunctionProcessor(ContextFunction("above", 1, lambda e, c: e[c["x"]] > 2))


def test_quantifier_over_event_domain():
    # for every attribute x of the event: x > 2
    assert run_push(Quantifier(True, "x", MEMBERS, Always(_above_two())), [Tuple(a=3), Tuple(a=2)]) == [UNK, FF]
    assert run_push(Quantifier(True, "x", MEMBERS, _above_two()), [Tuple(a=3), Tuple(a=2)]) == [TT, FF]
    assert run_push(Quantifier(False, "x", MEMBERS, _above_two()), [Tuple(a=1, b=5)]) == [TT]


def test_quantifier_with_empty_domain():
    empty = ScalarFunction("none", 1, lambda e: [])
    assert run_push(Quantifier(True, "x", empty, Always(Passthrough())), [1, 2]) == [TT, TT]
    assert run_push(Quantifier(False, "x", empty, Always(Passthrough())), [1, 2]) == [FF, FF]


def test_quantifier_rejects_scalar_domains():
    with pytest.raises(PipelineError):
        run_push(Quantifier(True, "x", ScalarFunction("id", 1, lambda e: e), Passthrough()), [1])


@pytest.fixture(scope="module")
def it():
    return Interpreter(palettes=("ltl",))


def test_esql_boolean_operators(it):
    q = "G (F (APPLY $1 = 1 WITH *))"
    xs = [0, 1, 0, 1]
    want = oracles.bool_stream(("G", ("F", "1")), [str(x) for x in xs])
    assert run_push(it.interpret(q), xs) == want
    u = "(APPLY $1 = 0 WITH *) U (APPLY $1 = 1 WITH *)"
    assert run_push(it.interpret(u), [0, 0, 1, 2]) == [True, True, True, False]
    assert run_push(it.interpret("X (APPLY $1 > 0 WITH *)"), [0, 1, 2]) == [True, True]


def test_esql_troolean_operators(it):
    assert run_push(it.interpret("SOMETIME ( APPLY $1 = 'b' WITH * )"), ["a", "a", "b"]) == [UNK, UNK, TT]
    assert run_push(it.interpret("ALWAYS ( APPLY $1 < 3 WITH * )"), [1, 2, 5, 1]) == [UNK, UNK, FF, FF]
    q = "( APPLY $1 = 'a' WITH * ) UPTO ( APPLY $1 = 'b' WITH * )"
    assert run_push(it.interpret(q), ["a", "a", "b"]) == [UNK, UNK, TT]
    assert run_push(it.interpret("AFTER ( APPLY $1 = 'x' WITH * )"), ["a", "x"]) == [UNK, TT]


def test_esql_quantifier(it):
    q = "FOR ALL $x IN {1, 2} : ( ALWAYS ( APPLY $1 != $x WITH * ) )"
    assert run_push(it.interpret(q), [3, 4, 2]) == [UNK, UNK, FF]
    q = "THERE EXISTS $x IN {1, 2} : ( SOMETIME ( APPLY $1 = $x WITH * ) )"
    assert run_push(it.interpret(q), [3, 2]) == [UNK, TT]
