"""Moore machines with guarded transitions and context updates.

A machine reads one event at a time. The transitions leaving the current
state are tried in declaration order; the first whose guard is true fires,
its assignments run one after the other, and the machine emits the output
of the target state (nothing for a silent state). When no guard is true
the machine keeps its state and emits nothing.

Guards, assignments and state outputs are :class:`Function` objects
evaluated on ``(event,)`` with the machine's variables layered over its
context, so ``ContextRead`` leaves see both.

Machines can also be written in a small text format::

    # comment
    initial idle
    var Days 0
    state idle silent
    state open output $Days
    transition idle -> open when name = 'start' do Days := 0 ; Max := f3

Expressions use the eSQL function syntax; ``$name`` reads a variable.
"""
from __future__ import annotations

import re
from collections import ChainMap
from dataclasses import dataclass, field
from pathlib import Path

from .core import GroupProcessor, Processor, connect
from .errors import BuildError, ParseError, PipelineError
from .events import WILDCARD, Tuple
from .functions import ConstantFunction, Function, ScalarFunction, is_number
from .trace_ops import Slicer


class _Silent:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "SILENT"

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


SILENT = _Silent()


@dataclass
class Transition:
    source: str
    target: str
    guard: Function
    assignments: list = field(default_factory=list)  # (name, Function)


def _fn(x) -> Function:
    if isinstance(x, Function):
        return x
    if callable(x):
        return ScalarFunction(getattr(x, "__name__", "guard"), 1, x)
    return ConstantFunction(x)


class MooreMachine(Processor):
    def __init__(self, initial: str, outputs: dict, transitions, variables: dict | None = None):
        super().__init__()
        self.initial = initial
        self.outputs = dict(outputs)
        self.transitions = [t if isinstance(t, Transition) else Transition(*t) for t in transitions]
        for t in self.transitions:
            t.guard = _fn(t.guard)
            t.assignments = [(n, _fn(f)) for n, f in t.assignments]
        states = set(self.outputs) | {initial}
        for t in self.transitions:
            states |= {t.source, t.target}
        self.states = states
        self._by_state: dict[str, list[Transition]] = {s: [] for s in states}
        for t in self.transitions:
            self._by_state[t.source].append(t)
        self.variables = dict(variables or {})
        self.reset()

    def reset(self):
        self.state = self.initial
        self._vars = dict(self.variables)

    def _duplicate_parts(self):
        self._vars = dict(self.variables)

    @property
    def vars(self) -> dict:
        return dict(self._vars)

    def compute(self, front):
        args = front
        env = ChainMap(self._vars, self.context)
        for t in self._by_state[self.state]:
            ok = t.guard.value(args, env)
            if ok is True:
                break
            if ok is not False:
                raise PipelineError(f"guard of {t.source} -> {t.target} returned {ok!r}, not a Boolean")
        else:
            return []
        for name, f in t.assignments:
            self._vars[name] = f.value(args, env)
        self.state = t.target
        out = self.outputs.get(t.target, SILENT)
        if out is SILENT:
            return []
        if isinstance(out, Function):
            out = out.value(args, env)
        return [(out,)]


# -- text format -------------------------------------------------------------

_TRANS_RE = re.compile(
    r"^transition\s+(?P<src>\w+)\s*->\s*(?P<dst>\w+)"
    r"(?:\s+when\s+(?P<guard>.*?))?(?:\s+do\s+(?P<do>.*))?$")
_ASSIGN_RE = re.compile(r"^\s*\$?(?P<name>\w+)\s*:=\s*(?P<expr>.+?)\s*$")


def _split_outside_quotes(text: str, sep: str) -> list[str]:
    parts, buf, quote = [], [], None
    for ch in text:
        if quote:
            buf.append(ch)
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
            buf.append(ch)
        elif ch == sep:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return parts


def compile_function(text: str, ctx_vars=(), interpreter=None) -> Function:
    """Build a unary function from eSQL function syntax."""
    from .esql import BuildStack, _expr

    it = interpreter or _default_interpreter()
    stack = BuildStack(it)
    stack.scope.ctx_vars = set(ctx_vars)
    it.build_in(text, "function", stack)
    if len(stack.items) != 1:
        raise BuildError(f"expression {text!r} did not build to a single value")
    return _expr(stack.pop()).to_function(stack.resolver(1))


_INTERP = None


def _default_interpreter():
    global _INTERP
    if _INTERP is None:
        from .esql import Interpreter
        _INTERP = Interpreter(palettes=("tuples", "ltl"))
    return _INTERP


def parse_machine(text: str, interpreter=None) -> MooreMachine:
    initial = None
    outputs: dict = {}
    variables: dict = {}
    raw_trans = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "initial":
            initial = rest
        elif word == "var":
            name, _, expr = rest.partition(" ")
            raw_trans.append(("var", n, name.lstrip("$"), expr.strip() or "0"))
        elif word == "state":
            name, _, spec = rest.partition(" ")
            spec = spec.strip()
            if spec in ("", "silent"):
                outputs[name] = SILENT
            elif spec.startswith("output "):
                raw_trans.append(("out", n, name, spec[len("output "):].strip()))
            else:
                raise ParseError(f"line {n}: state output must be 'silent' or 'output <expr>'", n)
        elif word == "transition":
            m = _TRANS_RE.match(line)
            if not m:
                raise ParseError(f"line {n}: malformed transition {line!r}", n)
            assigns = []
            if m.group("do"):
                for part in _split_outside_quotes(m.group("do"), ";"):
                    if not part.strip():
                        continue
                    am = _ASSIGN_RE.match(part)
                    if not am:
                        raise ParseError(f"line {n}: malformed assignment {part.strip()!r}", n)
                    assigns.append((am.group("name"), am.group("expr")))
            raw_trans.append(("tr", n, m.group("src"), m.group("dst"), m.group("guard") or "TRUE", assigns))
        else:
            raise ParseError(f"line {n}: unknown directive {word!r}", n)
    if initial is None:
        raise ParseError("machine has no 'initial' line", 0)

    names = {r[2] for r in raw_trans if r[0] == "var"}
    for r in raw_trans:
        if r[0] == "tr":
            names |= {a for a, _ in r[5]}

    def comp(expr, n):
        try:
            return compile_function(expr, names, interpreter)
        except (ParseError, BuildError) as exc:
            raise ParseError(f"line {n}: {exc}", n) from exc

    transitions = []
    for r in raw_trans:
        if r[0] == "var":
            variables[r[2]] = comp(r[3], r[1]).value((None,), {})
        elif r[0] == "out":
            f = comp(r[3], r[1])
            outputs[r[2]] = f.constant if isinstance(f, ConstantFunction) else f
        else:
            _, n, src, dst, guard, assigns = r
            transitions.append(Transition(src, dst, comp(guard, n),
                                          [(a, comp(e, n)) for a, e in assigns]))
    return MooreMachine(initial, outputs, transitions, variables)


def load_machine(path, interpreter=None) -> MooreMachine:
    return parse_machine(Path(path).read_text(encoding="utf-8"), interpreter)


# -- auction demo ------------------------------------------------------------

AUCTION_MACHINE = """
# one instance per item; events are tuples name,item,x,y
initial idle
state idle silent
state open output $Days
state reached output $Days
state closed output 'CLOSED'
state invalid output 'INVALID'

transition idle -> open when name = 'start' do LastPrice := 0 ; Days := 0 ; MinPrice := x ; MaxDays := y
transition idle -> invalid when name = 'bid' OR name = 'sell'

transition open -> closed when name = 'endOfDay' AND $Days + 1 >= $MaxDays do Days := $Days + 1
transition open -> open when name = 'endOfDay' do Days := $Days + 1
transition open -> reached when name = 'bid' AND x > $LastPrice AND x >= $MinPrice do LastPrice := x
transition open -> open when name = 'bid' AND x > $LastPrice do LastPrice := x
transition open -> invalid when name != 'endOfDay'

transition reached -> closed when name = 'endOfDay' AND $Days + 1 >= $MaxDays do Days := $Days + 1
transition reached -> reached when name = 'endOfDay' do Days := $Days + 1
transition reached -> reached when name = 'bid' AND x > $LastPrice do LastPrice := x
transition reached -> closed when name = 'sell'
transition reached -> invalid when name != 'endOfDay'
"""

AUCTION_HEADER = ("name", "item", "x", "y")


def auction_event(name: str, item="", x="", y="") -> Tuple:
    return Tuple(zip(AUCTION_HEADER, (name, item, x, y)))


def auction_slice_key(e):
    if e["name"] == "endOfDay":
        return WILDCARD
    return e["item"]


class NumericAverage(Processor):
    """Average of the numeric members of each collection; nothing when there are none."""

    def compute(self, front):
        c = front[0]
        if not isinstance(c, list):
            raise PipelineError(f"expected a collection, got {c!r}")
        nums = [v for v in c if is_number(v)]
        if not nums:
            return []
        return [(sum(nums) / len(nums),)]


def auction_machine(interpreter=None) -> MooreMachine:
    return parse_machine(AUCTION_MACHINE, interpreter)


def auction_demo(interpreter=None) -> GroupProcessor:
    """Average elapsed days over open auctions, one machine per item."""
    sl = Slicer(ScalarFunction("auction-key", 1, auction_slice_key), auction_machine(interpreter))
    avg = NumericAverage()
    connect(sl, 0, avg, 0)
    g = GroupProcessor(1, 1)
    g.add(sl, avg)
    g.associate_input(0, sl)
    g.associate_output(0, avg)
    return g


# -- grammar -------------------------------------------------------------------

GRAMMAR = r"""
<processor> := <p-machine>
<p-machine> := MACHINE <string> ON <processor>
"""


def install(it) -> None:
    it.add_grammar(GRAMMAR)

    def b_machine(s):
        path, src = s.args()
        s.push(s.pipe(src, load_machine(path, it)))

    it.register_association("p-machine", b_machine)


__all__ = [
    "MooreMachine", "Transition", "SILENT", "parse_machine", "load_machine",
    "compile_function", "AUCTION_MACHINE", "auction_machine", "auction_demo",
    "auction_event", "auction_slice_key", "NumericAverage",
]
