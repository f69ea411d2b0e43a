import pytest
from hypothesis import given, strategies as st

import oracles
from evstream.core import run_pull, run_push
from evstream.errors import BuildError, EvaluationError, ParseError, PipelineError
from evstream.esql import Interpreter, split_statements
from evstream.events import FF, TT, UNK, Tuple

COUNT_DEF = ("WHEN @P IS A PROCESSOR: THE COUNT OF @P IS THE PROCESSOR "
             "COMBINE APPLY CONSTANT 1 WITH @P WITH ADDITION")

nums = st.lists(st.integers(-20, 20), max_size=40)


@pytest.fixture(scope="module")
def it():
    return Interpreter()


def run(it, query, *traces):
    a = run_push(it.interpret(query), *traces)
    b = run_pull(it.interpret(query), *traces)
    assert a == b
    return a


@given(nums)
def test_combine(xs):
    assert run(Interpreter(palettes=()), "COMBINE * WITH ADDITION", xs) == oracles.cumsum(xs)


@given(nums, st.integers(1, 5))
def test_window_of_sums(xs, n):
    got = run(Interpreter(palettes=()), f"GET (COMBINE * WITH ADDITION) FROM * ON A WINDOW OF {n}", xs)
    assert got == oracles.window(xs, n, sum)


@given(nums, st.integers(1, 6))
def test_decimate_and_prefix(xs, n):
    it = Interpreter(palettes=())
    assert run(it, f"EVERY {n}TH OF *", xs) == oracles.decimate(xs, n)
    assert run(it, f"THE FIRST {n} OF *", xs) == oracles.prefix(xs, n)
    assert run(it, f"TRIM {n} OF *", xs) == oracles.trim(xs, n)


def test_ordinal_suffix_is_a_separate_token(it):
    assert run(it, "EVERY 2 ND OF *", [1, 2, 3]) == [1, 3]
    assert run(it, "EVERY 3RD OF *", [1, 2, 3, 4]) == [1, 4]


# random arithmetic over $1 evaluated against Python
terms = st.recursive(
    st.one_of(st.integers(0, 9).map(str), st.just("$1")),
    lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from("+-*"), inner).map(lambda t: f"{t[0]} {t[1]} {t[2]}"),
        inner.map(lambda s: f"( {s} )"),
    ),
    max_leaves=8,
)


@given(terms, st.lists(st.integers(-9, 9), min_size=1, max_size=5))
def test_apply_arithmetic_matches_python(expr, xs):
    got = run_push(Interpreter(palettes=()).interpret(f"APPLY {expr} WITH *"), xs)
    assert got == [eval(expr.replace("$1", f"({x})")) for x in xs]


def test_comparison_and_logic(it):
    q = "APPLY ($1 > 2 AND $1 < 5) OR $1 = 0 WITH *"
    assert run(it, q, [0, 1, 3, 4, 5]) == [True, False, True, True, False]
    assert run(it, "APPLY IF $1 >= 0 THEN $1 ELSE - $1 WITH *", [-3, 2]) == [3, 2]
    assert run(it, "APPLY NOT $1 WITH *", [True, False]) == [False, True]
    assert run(it, "APPLY $1 → FALSE WITH *", [True, False]) == [False, True]
    assert run(it, "APPLY 2 ^ 3 ^ 2 WITH *", [0]) == [512]
    assert run(it, "APPLY ABS ( $1 ) WITH *", [-4]) == [4]
    assert run(it, "APPLY MAXIMUM ( $1 , 3 ) WITH *", [1, 7]) == [3, 7]


def test_division_keeps_exact_integers(it):
    assert run(it, "APPLY $1 / 2 WITH *", [4, 3]) == [2, 1.5]
    assert isinstance(run(it, "APPLY $1 / 2 WITH *", [4])[0], int)


def test_named_operands(it):
    q = it.interpret("APPLY $a - $b WITH * AS $a, $y AS $b")
    assert q.input_names == ["*", "$y"]
    assert run_push(q, [10, 20], [1, 2]) == [9, 18]


def test_apply_over_two_processors(it):
    q = "APPLY $1 + $2 WITH (COMBINE * WITH ADDITION), (EVERY 1ST OF *)"
    assert run(it, q, [1, 2, 3]) == [2, 5, 9]


def test_slicer(it):
    q = "SLICE * WITH (COMBINE * WITH ADDITION) ON $1 % 3"
    xs = [1, 2, 4, 5, 3, 7]
    want = oracles.slicer(xs, lambda x: x % 3, lambda g: sum(g))
    assert run(it, q, xs) == want


def test_constant_collection_and_membership(it):
    assert run(it, "APPLY {1, $1} WITH *", [2]) == [[1, 2]]
    assert run(it, "APPLY CONSTANT 7 WITH *", [1, 2]) == [7, 7]
    assert run(it, "APPLY $1 = 'x' WITH *", ["x", "y"]) == [True, False]


def test_conjunction_combine(it):
    assert run(it, "COMBINE * WITH CONJUNCTION", [True, True, False, True]) == [True, True, False, False]
    assert run(it, "COMBINE * WITH MAXIMUM", [1, 5, 2]) == [1, 5, 5]
    assert run(it, "COMBINE * WITH SUBTRACTION", [10, 1, 2]) == [10, 9, 7]


def test_troolean_conjunction_is_kleene():
    it = Interpreter(palettes=("ltl",))
    got = run(it, "COMBINE * WITH CONJUNCTION", [TT, UNK, FF, TT])
    assert got == [TT, UNK, FF, FF]


def test_troolean_constants():
    it = Interpreter(palettes=("ltl",))
    assert run(it, "APPLY ? WITH *", [1]) == [UNK]
    assert run(it, "APPLY $1 ∧ ⊤ WITH *", [FF]) == [FF]


def test_definitions_extend_the_grammar():
    it = Interpreter()
    d = it.define(COUNT_DEF)
    assert d.target == "processor"
    assert run(it, "THE COUNT OF *", [5, 6, 7, 8]) == [1, 2, 3, 4]
    assert run(it, "THE COUNT OF (EVERY 2ND OF *)", list(range(7))) == [1, 2, 3, 4]
    assert it.expand("THE COUNT OF *").split() == "COMBINE APPLY CONSTANT 1 WITH * WITH ADDITION".split()


def test_definition_of_a_constant():
    it = Interpreter(palettes=())
    it.define("PI IS THE CONSTANT 3.14")
    assert run(it, "APPLY $1 * PI WITH *", [2]) == [6.28]


def test_builtin_readings_win_over_definitions():
    # with tuples loaded, a bare word is first read as an attribute name
    it = Interpreter(palettes=("tuples",))
    it.define("PI IS THE CONSTANT 3.14")
    assert run(it, "APPLY PI WITH *", [Tuple(PI=1)]) == [1]


def test_nested_definitions():
    it = Interpreter()
    it.execute(COUNT_DEF + ". WHEN @Q IS A PROCESSOR: TWICE @Q IS THE PROCESSOR APPLY $1 * 2 WITH @Q.")
    assert run(it, "TWICE (THE COUNT OF *)", [9, 9, 9]) == [2, 4, 6]


def test_bad_definitions():
    it = Interpreter()
    with pytest.raises(BuildError):
        it.define("WHEN @P IS A PROCESSOR: FOO @Q IS THE PROCESSOR @Q")
    with pytest.raises(ParseError):
        it.define("WHEN @P IS A PROCESSOR: FOO @P IS THE PROCESSOR APPLY WITH")
    with pytest.raises(BuildError):
        it.define("WHEN @P IS A GIZMO: FOO @P IS THE PROCESSOR @P")
    # a rejected definition leaves the grammar alone
    assert not it.grammar.matches("FOO *")


def test_session_statements():
    assert split_statements("A IS THE CONSTANT 1. APPLY 1.5 WITH *") == [
        "A IS THE CONSTANT 1", "APPLY 1.5 WITH *"]
    assert split_statements("APPLY 'a. b' WITH *.") == ["APPLY 'a. b' WITH *"]
    with pytest.raises(BuildError):
        Interpreter().execute("FREEZE *. FREEZE *")
    assert Interpreter().execute("PI IS THE CONSTANT 3") is None


def test_parse_errors_point_at_the_problem(it):
    with pytest.raises(ParseError) as ei:
        it.interpret("COMBINE * WITH SUBSTRACTION")
    assert ei.value.position == len("COMBINE * WITH ")


def test_runtime_type_errors(it):
    with pytest.raises(EvaluationError):
        run_push(it.interpret("APPLY $1 + 1 WITH *"), ["a"])
    with pytest.raises(PipelineError):
        run_push(it.interpret("APPLY $1 / 0 WITH *"), [1])


def test_empty_trace(it):
    assert run(it, "COMBINE * WITH ADDITION", []) == []


def test_tuples_where(it):
    got = run(it, "(THE TUPLES OF *) WHERE a > b", ["a,b", "1,2", "3,1", "5,5", "9,0"])
    assert got == [Tuple(a=3, b=1), Tuple(a=9, b=0)]
