"""Function processors, cumulative processors and the trivial plumbing."""
from __future__ import annotations

from .core import ConstantSource, GroupProcessor, Processor, connect
from .errors import PipeConnectionError
from .functions import (
    Addition,
    ArgRef,
    Const,
    ConstantFunction,
    Division,
    Function,
    FunctionTree,
    Apply,
    Power,
)


class FunctionProcessor(Processor):
    """Applies ``f`` to every front, using the processor's context."""

    def __init__(self, f: Function):
        self.function = f
        self.input_kinds = f.input_kinds
        self.output_kinds = f.output_kinds
        super().__init__(f.input_arity, f.output_arity)
        self._single = f.output_arity == 1

    def compute(self, front):
        if self._single:
            return [(self.function.value(front, self.context),)]
        return [self.function.evaluate(front, self.context)]

    def replay(self, events):
        f, ctx = self.function, self.context
        if self.input_arity == 1 and self._single:
            return [f.value((e,), ctx) for e in events]
        return super().replay(events)

    def __repr__(self):
        return f"<Apply {self.function!r}>"


def function_processor(f: Function) -> Processor:
    """Lift ``f``; zero-input functions are only allowed for constants."""
    if f.input_arity == 0:
        if isinstance(f, ConstantFunction) and f.output_arity == 1:
            return ConstantSource(f.constant)
        raise PipeConnectionError("only constant functions may have no input")
    return FunctionProcessor(f)


def mutator(value, arity: int = 1) -> FunctionProcessor:
    """Outputs ``value`` for every front, whatever the input."""
    return FunctionProcessor(ConstantFunction(value, arity))


class Passthrough(Processor):
    def compute(self, front):
        return [front]

    def replay(self, events):
        return list(events)


class Fork(Processor):
    """Copies each input event to all of its ``k`` outputs."""

    def __init__(self, k: int = 2):
        if k < 1:
            raise ValueError("a fork needs at least one output")
        super().__init__(1, k)

    def compute(self, front):
        return [front * self.output_arity]


class Cumulative(Processor):
    """out_0 = f(seed, in_0); out_i = f(out_{i-1}, in_i)."""

    def __init__(self, f: Function, seed):
        if f.input_arity != 2 or f.output_arity != 1:
            raise ValueError("cumulative processors need a 2:1 function")
        self.function = f
        self.seed = seed
        super().__init__(1, 1)
        self.output_kinds = f.output_kinds
        self._last = seed

    def reset(self):
        self._last = self.seed

    def compute(self, front):
        v = self.function.value((self._last, front[0]), self.context)
        self._last = v
        return [(v,)]

    def replay(self, events):
        f, ctx = self.function, self.context
        acc = self.seed
        out = []
        for e in events:
            acc = f.value((acc, e), ctx)
            out.append(acc)
        return out

    def __repr__(self):
        return f"<Cumulative {self.function.name} seed={self.seed!r}>"


def moment(n: int = 1) -> GroupProcessor:
    """Running statistical moment of order ``n``.

    fork -> (x^n -> running sum) and (constant 1 -> running sum) -> divide.
    """
    g = GroupProcessor(1, 1)
    fork = Fork(2)
    pw = FunctionProcessor(FunctionTree(Apply(Power, ArgRef(0), Const(n))))
    sum_a = Cumulative(Addition, 0)
    one = mutator(1)
    sum_b = Cumulative(Addition, 0)
    div = FunctionProcessor(Division)
    connect(fork, 0, pw, 0)
    connect(pw, 0, sum_a, 0)
    connect(fork, 1, one, 0)
    connect(one, 0, sum_b, 0)
    connect(sum_a, 0, div, 0)
    connect(sum_b, 0, div, 1)
    g.add(fork, pw, sum_a, one, sum_b, div)
    g.associate_input(0, fork, 0)
    g.associate_output(0, div, 0)
    return g


def average() -> GroupProcessor:
    return moment(1)
