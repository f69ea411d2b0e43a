import pytest
from hypothesis import given, settings, strategies as st

import oracles
from evstream.core import run_pull, run_push
from evstream.errors import ParseError, PipelineError
from evstream.esql import Interpreter
from evstream.events import Tuple
from evstream.fsm import (SILENT, MooreMachine, Transition, auction_demo, auction_event,
                          auction_machine, load_machine, parse_machine)

ALPHABET = "abc"


@st.composite
def machines(draw):
    n = draw(st.integers(1, 5))
    states = [f"s{i}" for i in range(n)]
    table = {}
    for s in states:
        for e in ALPHABET:
            if draw(st.booleans()):
                table[(s, e)] = draw(st.sampled_from(states))
    outputs = {s: draw(st.one_of(st.none(), st.integers(0, 9))) for s in states}
    return states[0], table, outputs


def build(initial, table, outputs):
    trans = [Transition(s, t, (lambda x, _e=e: x == _e)) for (s, e), t in table.items()]
    outs = {s: (SILENT if v is None else v) for s, v in outputs.items()}
    return MooreMachine(initial, outs, trans)


@settings(max_examples=100)
@given(machines(), st.lists(st.lists(st.sampled_from(ALPHABET), max_size=30), min_size=1, max_size=5))
def test_random_machines_match_table_simulator(m, traces):
    for trace in traces:
        want = oracles.table_machine(*m, trace)
        assert run_push(build(*m), trace) == want
        assert run_pull(build(*m), trace) == want


@given(machines(), st.lists(st.sampled_from(ALPHABET), max_size=20))
def test_duplicate_starts_fresh(m, trace):
    p = build(*m)
    run_push(p, trace)
    assert run_push(p.duplicate(), trace) == oracles.table_machine(*m, trace)


def test_first_true_guard_wins():
    m = MooreMachine("a", {"b": 1, "c": 2}, [("a", "b", lambda e: e > 0), ("a", "c", lambda e: e > 5)])
    assert run_push(m, [9]) == [1]


def test_non_boolean_guard():
    m = MooreMachine("a", {}, [("a", "a", lambda e: e)])
    with pytest.raises(PipelineError):
        run_push(m, [3])


def test_variables_and_assignments():
    text = """
    initial s
    var total 0
    state s output $total
    transition s -> s when $1 > 0 do total := $total + $1 ; total := $total * 2
    """
    m = parse_machine(text)
    assert run_push(m, [1, -1, 2]) == [2, 8]
    assert m.vars["total"] == 8
    m.reset()
    assert m.vars["total"] == 0


def test_text_format_errors():
    with pytest.raises(ParseError, match="initial"):
        parse_machine("state s silent")
    with pytest.raises(ParseError, match="line 2"):
        parse_machine("initial s\nfrobnicate")
    with pytest.raises(ParseError, match="line 2"):
        parse_machine("initial s\ntransition s -> s when ( (")
    with pytest.raises(ParseError):
        parse_machine("initial s\nstate s loud")


def test_quoted_semicolons_in_assignments():
    m = parse_machine("initial s\nstate t output $v\ntransition s -> t do v := 'a;b'")
    assert run_push(m, [0]) == ["a;b"]


def test_load_machine(tmp_path):
    f = tmp_path / "m.txt"
    f.write_text("initial a\nstate b output 'hit'\ntransition a -> b when $1 = 'go'\n", encoding="utf-8")
    assert run_push(load_machine(f), ["x", "go"]) == ["hit"]
    with pytest.raises(OSError):
        load_machine(tmp_path / "missing.txt")


def test_machine_in_esql(tmp_path):
    f = tmp_path / "m.txt"
    f.write_text("initial a\nstate b output $1 * 10\ntransition a -> b when $1 > 1\n"
                 "transition b -> b\n", encoding="utf-8")
    it = Interpreter()
    q = it.interpret(f"MACHINE '{f}' ON (APPLY $1 + 1 WITH *)")
    assert run_push(q, [0, 1, 2]) == [20, 30]


# -- auction -------------------------------------------------------------------

A = auction_event


def auction_log():
    return [
        A("start", "vase", 10, 3),
        A("bid", "vase", 5),
        A("start", "lamp", 20, 2),
        A("endOfDay"),
        A("bid", "vase", 12),
        A("bid", "lamp", 25),
        A("endOfDay"),
        A("sell", "vase"),
    ]


def hand_reference(log):
    """Average elapsed days over open auctions, written out by hand."""
    days, open_, out = {}, set(), []
    max_days = {}
    for e in log:
        name, item = e["name"], e["item"]
        if name == "start":
            days[item] = 0
            max_days[item] = e["y"]
            open_.add(item)
        elif name == "endOfDay":
            for i in list(open_):
                days[i] += 1
                if days[i] >= max_days[i]:
                    open_.discard(i)
        elif name == "sell":
            open_.discard(item)
        live = [days[i] for i in open_]
        if live:
            out.append(sum(live) / len(live))
    return out


def test_auction_matches_hand_reference():
    log = auction_log()
    assert run_push(auction_demo(), log) == hand_reference(log)
    assert run_push(auction_demo(), log) == [0, 0, 0, 1, 1, 1, 2]


def test_auction_single_item():
    m = auction_machine()
    log = [A("start", "x", 5, 2), A("bid", "x", 3), A("bid", "x", 6), A("endOfDay"), A("endOfDay")]
    assert run_push(m, log) == [0, 0, 0, 1, "CLOSED"]
    bad = [A("bid", "x", 3)]
    assert run_push(auction_machine(), bad) == ["INVALID"]
    assert run_push(auction_machine(), [A("start", "x", 5, 9), A("bid", "x", 2), A("bid", "x", 1)]) == [
        0, 0, "INVALID"]


def test_auction_event_shape():
    assert A("bid", "x", 3) == Tuple(name="bid", item="x", x=3, y="")
