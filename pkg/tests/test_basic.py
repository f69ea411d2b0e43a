import pytest
from hypothesis import given, strategies as st

import oracles
from evstream.basic import Cumulative, Fork, FunctionProcessor, Passthrough, average, function_processor, moment, mutator
from evstream.core import ConstantSource, connect, run_pull, run_push
from evstream.errors import EvaluationError, PipeConnectionError, PipelineError
from evstream.events import FF, TT, UNK
from evstream.functions import (
    Addition, And, ConstantFunction, Division, Maximum, Multiplication, ScalarFunction,
)

nums = st.lists(st.integers(-100, 100), max_size=50)


@given(nums)
def test_cumulative_sum_matches_accumulate(xs):
    assert run_push(Cumulative(Addition, 0), xs) == oracles.cumsum(xs)
    assert run_pull(Cumulative(Addition, 0), xs) == oracles.cumsum(xs)


@given(nums)
def test_cumulative_max(xs):
    want = [max(xs[: i + 1]) for i in range(len(xs))]
    assert run_push(Cumulative(Maximum, float("-inf")), xs) == want


@given(st.lists(st.integers(-20, 20), min_size=1, max_size=30))
def test_average_is_running_mean(xs):
    got = run_push(average(), xs)
    assert got == pytest.approx(oracles.running_mean(xs))


@given(st.lists(st.integers(-10, 10), min_size=1, max_size=20), st.integers(1, 3))
def test_moment(xs, n):
    want = [sum(x ** n for x in xs[: i + 1]) / (i + 1) for i in range(len(xs))]
    assert run_push(moment(n), xs) == pytest.approx(want)
    assert run_pull(moment(n), xs) == pytest.approx(want)


def test_average_small_example():
    assert run_push(average(), [2, 4, 6]) == [2, 3, 4]


def test_conjunction_seeded_with_unknown():
    # cumulative strong-Kleene And never gets above its seed
    got = run_push(Cumulative(And, UNK), [TT, TT, FF, TT])
    assert got == [UNK, UNK, FF, FF]


def test_function_processor_multi_input():
    p = FunctionProcessor(Multiplication)
    assert run_push(p, [1, 2, 3], [4, 5, 6]) == [4, 10, 18]


def test_function_errors_surface_as_evaluation_errors():
    p = FunctionProcessor(Division)
    with pytest.raises(EvaluationError):
        run_push(p, [1], [0])
    with pytest.raises(PipelineError):
        run_push(FunctionProcessor(Addition), ["a"], [1])


def test_function_uses_context():
    f = ScalarFunction("id", 1, lambda x: x)
    p = FunctionProcessor(f)
    p.set_context("unused", 1)
    assert run_push(p, [3]) == [3]


def test_mutator_and_passthrough_and_fork():
    assert run_push(mutator("z"), [1, 2]) == ["z", "z"]
    assert run_push(Passthrough(), [1, 2]) == [1, 2]
    f = Fork(3)
    for x in (1, 2):
        f.push(0, x)
    assert [f.take_output(j) for j in range(3)] == [[1, 2]] * 3
    with pytest.raises(ValueError):
        Fork(0)


def test_constant_function_becomes_source():
    src = function_processor(ConstantFunction(7, arity=0))
    assert isinstance(src, ConstantSource)
    with pytest.raises(PipeConnectionError):
        function_processor(ScalarFunction("nothing", 0, lambda: 1))


def test_constant_source_alone_never_triggers_a_push():
    a = FunctionProcessor(Addition)
    connect(ConstantSource(1), 0, a, 0)
    connect(ConstantSource(2), 0, a, 1)
    assert a.take_output() == []
    assert a.pull_hard() == 3
