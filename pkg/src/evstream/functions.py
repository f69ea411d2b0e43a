"""Stateless functions over events and the built-in function library.

A :class:`Function` maps ``input_arity`` events (plus a read-only context)
to ``output_arity`` events. Expression trees built from :class:`ArgRef`,
:class:`Const`, :class:`ContextRead` and :class:`Apply` nodes are wrapped
by :class:`FunctionTree` to become functions themselves.
"""
from __future__ import annotations

import math
import operator
from typing import Any, Callable

from .errors import EvaluationError
from .events import FF, TT, UNK, Troolean, events_equal, kind_of

NUM = frozenset({"number"})
TRUTH = frozenset({"bool", "troolean"})
BOOL = frozenset({"bool"})


class Function:
    input_arity = 1
    output_arity = 1
    input_kinds: tuple | None = None
    output_kinds: tuple | None = None
    name = "function"

    def evaluate(self, args: tuple, ctx=None) -> tuple:
        return (self.value(args, ctx),)

    def value(self, args: tuple, ctx=None):
        raise NotImplementedError

    def __call__(self, *args, ctx=None):
        if self.output_arity == 1:
            return self.value(args, ctx or {})
        return self.evaluate(args, ctx or {})

    def __repr__(self):
        return f"<{self.name}/{self.input_arity}>"


class ScalarFunction(Function):
    """Wraps a plain Python callable returning one event."""

    _ERRORS = (TypeError, ValueError, ZeroDivisionError, OverflowError, KeyError)

    def __init__(self, name: str, arity: int, fn: Callable, in_kinds=None, out_kind=None):
        self.name = name
        self.input_arity = arity
        self.fn = fn
        if in_kinds is not None:
            self.input_kinds = tuple(in_kinds) if isinstance(in_kinds, (tuple, list)) else (in_kinds,) * arity
        if out_kind is not None:
            self.output_kinds = (out_kind,)

    def value(self, args, ctx=None):
        try:
            return self.fn(*args)
        except EvaluationError:
            raise
        except self._ERRORS as exc:
            raise EvaluationError(f"{self.name}{tuple(args)!r}: {exc}") from exc


class ContextFunction(ScalarFunction):
    """Like :class:`ScalarFunction`, but the callable also receives the context last."""

    def value(self, args, ctx=None):
        try:
            return self.fn(*args, ctx if ctx is not None else {})
        except EvaluationError:
            raise
        except self._ERRORS as exc:
            raise EvaluationError(f"{self.name}{tuple(args)!r}: {exc}") from exc


# -- helpers -----------------------------------------------------------------


def _num(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise EvaluationError(f"expected a number, got {x!r}")
    return x


def _add(a, b):
    return _num(a) + _num(b)


def _sub(a, b):
    return _num(a) - _num(b)


def _mul(a, b):
    return _num(a) * _num(b)


def _div(a, b):
    _num(a)
    if _num(b) == 0:
        raise EvaluationError(f"division by zero ({a!r} / {b!r})")
    if isinstance(a, int) and isinstance(b, int) and a % b == 0:
        return a // b
    return a / b


def _mod(a, b):
    if _num(b) == 0:
        raise EvaluationError("modulo by zero")
    return _num(a) % b


def _pow(a, b):
    r = _num(a) ** _num(b)
    if isinstance(r, complex):
        raise EvaluationError(f"{a!r} ** {b!r} is not real")
    return r


def _cmp(op):
    def f(a, b):
        ka, kb = kind_of(a), kind_of(b)
        if ka != kb or ka not in ("number", "text"):
            raise EvaluationError(f"cannot compare {a!r} and {b!r}")
        return op(a, b)
    return f


def _truth(x):
    if isinstance(x, (bool, Troolean)):
        return x
    raise EvaluationError(f"expected a truth value, got {x!r}")


def kleene_and(a, b):
    if isinstance(a, bool) and isinstance(b, bool):
        return a and b
    a, b = Troolean.of(_truth(a)), Troolean.of(_truth(b))
    if a is FF or b is FF:
        return FF
    if a is TT and b is TT:
        return TT
    return UNK


def kleene_or(a, b):
    if isinstance(a, bool) and isinstance(b, bool):
        return a or b
    a, b = Troolean.of(_truth(a)), Troolean.of(_truth(b))
    if a is TT or b is TT:
        return TT
    if a is FF and b is FF:
        return FF
    return UNK


def kleene_not(a):
    if isinstance(a, bool):
        return not a
    a = _truth(a)
    return {TT: FF, FF: TT, UNK: UNK}[a]


def kleene_implies(a, b):
    return kleene_or(kleene_not(a), b)


def _if(c, a, b):
    if not isinstance(c, bool):
        raise EvaluationError(f"condition must be Boolean, got {c!r}")
    return a if c else b


def _abs(a):
    return abs(_num(a))


Addition = ScalarFunction("Addition", 2, _add, NUM, NUM)
Subtraction = ScalarFunction("Subtraction", 2, _sub, NUM, NUM)
Multiplication = ScalarFunction("Multiplication", 2, _mul, NUM, NUM)
Division = ScalarFunction("Division", 2, _div, NUM, NUM)
Modulo = ScalarFunction("Modulo", 2, _mod, NUM, NUM)
Power = ScalarFunction("Power", 2, _pow, NUM, NUM)
Maximum = ScalarFunction("Maximum", 2, lambda a, b: max(_num(a), _num(b)), NUM, NUM)
Minimum = ScalarFunction("Minimum", 2, lambda a, b: min(_num(a), _num(b)), NUM, NUM)
AbsoluteValue = ScalarFunction("AbsoluteValue", 1, _abs, NUM, NUM)
Negation = ScalarFunction("Negation", 1, lambda a: -_num(a), NUM, NUM)
GreaterThan = ScalarFunction("GreaterThan", 2, _cmp(operator.gt), None, BOOL)
LessThan = ScalarFunction("LessThan", 2, _cmp(operator.lt), None, BOOL)
GreaterOrEqual = ScalarFunction("GreaterOrEqual", 2, _cmp(operator.ge), None, BOOL)
LessOrEqual = ScalarFunction("LessOrEqual", 2, _cmp(operator.le), None, BOOL)
Equals = ScalarFunction("Equals", 2, events_equal, None, BOOL)
NotEquals = ScalarFunction("NotEquals", 2, lambda a, b: not events_equal(a, b), None, BOOL)
And = ScalarFunction("And", 2, kleene_and, TRUTH, TRUTH)
Or = ScalarFunction("Or", 2, kleene_or, TRUTH, TRUTH)
Not = ScalarFunction("Not", 1, kleene_not, TRUTH, TRUTH)
Implies = ScalarFunction("Implies", 2, kleene_implies, TRUTH, TRUTH)
IfThenElse = ScalarFunction("IfThenElse", 3, _if, (BOOL, None, None))
Identity = ScalarFunction("Identity", 1, lambda a: a)

# names accepted wherever a binary combining function is expected
NAMED_FUNCTIONS: dict[str, Function] = {
    "ADDITION": Addition,
    "SUBTRACTION": Subtraction,
    "MULTIPLICATION": Multiplication,
    "DIVISION": Division,
    "MAXIMUM": Maximum,
    "MINIMUM": Minimum,
    "POWER": Power,
    "CONJUNCTION": And,
    "DISJUNCTION": Or,
}


class ConstantFunction(Function):
    """Returns ``value`` whatever its (possibly zero) arguments."""

    def __init__(self, value, arity: int = 1, outputs: int = 1):
        self.constant = value
        self.input_arity = arity
        self.output_arity = outputs
        self.name = f"Constant({value!r})"
        self.output_kinds = (frozenset({kind_of(value)}),) * outputs

    def value(self, args, ctx=None):
        return self.constant

    def evaluate(self, args, ctx=None):
        return (self.constant,) * self.output_arity


# -- expression trees --------------------------------------------------------


class Node:
    def value(self, args: tuple, ctx) -> Any:
        raise NotImplementedError

    def max_arg(self) -> int:
        return -1


class ArgRef(Node):
    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index

    def value(self, args, ctx):
        return args[self.index]

    def max_arg(self):
        return self.index

    def __repr__(self):
        return f"${self.index}"


class Const(Node):
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def value(self, args, ctx):
        return self.v

    def __repr__(self):
        return repr(self.v)


class ContextRead(Node):
    """Reads a name from the evaluating processor's context."""

    __slots__ = ("key",)

    def __init__(self, key: str):
        self.key = key

    def value(self, args, ctx):
        try:
            return ctx[self.key]
        except (KeyError, TypeError):
            raise EvaluationError(f"context has no binding for {self.key!r}") from None

    def __repr__(self):
        return f"ctx[{self.key!r}]"


class Apply(Node):
    """Applies a single-output function to the values of child nodes."""

    __slots__ = ("fn", "children", "_raw")

    def __init__(self, fn: Function, *children: Node):
        if fn.output_arity != 1:
            raise ValueError("only single-output functions can be nested")
        if len(children) != fn.input_arity:
            raise ValueError(f"{fn.name} takes {fn.input_arity} operands, got {len(children)}")
        self.fn = fn
        self.children = children
        self._raw = fn.fn if type(fn) is ScalarFunction else None

    def value(self, args, ctx):
        fn = self.fn
        if fn is And or fn is Or or fn is IfThenElse:
            # short-circuit, so guards like "kind = 'bid' AND price > 0" are safe
            first = self.children[0].value(args, ctx)
            if fn is IfThenElse:
                if first is True:
                    return self.children[1].value(args, ctx)
                if first is False:
                    return self.children[2].value(args, ctx)
            elif first is (fn is Or):
                return first
            vals = [first] + [c.value(args, ctx) for c in self.children[1:]]
        else:
            vals = [c.value(args, ctx) for c in self.children]
        if self._raw is not None:
            try:
                return self._raw(*vals)
            except EvaluationError:
                raise
            except ScalarFunction._ERRORS as exc:
                raise EvaluationError(f"{self.fn.name}{tuple(vals)!r}: {exc}") from exc
        return self.fn.value(tuple(vals), ctx)

    def max_arg(self):
        return max((c.max_arg() for c in self.children), default=-1)

    def __repr__(self):
        return f"{self.fn.name}({', '.join(map(repr, self.children))})"


class FunctionTree(Function):
    """A composition of functions, seen as one function.

    Arity defaults to the highest argument index used by the leaves.
    """

    def __init__(self, root: Node, arity: int | None = None, name: str = "tree"):
        self.root = root
        self.input_arity = root.max_arg() + 1 if arity is None else arity
        self.name = name
        if isinstance(root, Apply):
            self.output_kinds = root.fn.output_kinds
        elif isinstance(root, Const):
            self.output_kinds = (frozenset({kind_of(root.v)}),)

    def value(self, args, ctx=None):
        return self.root.value(args, ctx)

    def __repr__(self):
        return f"<tree {self.root!r}>"


def lift(fn: Function, *children: Node) -> Apply:
    return Apply(fn, *children)


def is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def is_finite_number(x) -> bool:
    return is_number(x) and math.isfinite(x)
