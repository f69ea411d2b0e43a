"""Linear temporal logic operators.

Two flavours are provided.

Boolean operators (``G``, ``F``, ``X``, ``U``) emit, for every input
position i, the truth value of the formula on the suffix starting at i.
An output is held back until it is decided; at the end of the trace the
remaining positions are settled with finite-trace semantics (``G`` holds on
an empty remainder, ``F`` and ``U`` fail).

Troolean operators (``ALWAYS``, ``SOMETIME``, ``AFTER``, ``UPTO``) emit,
after every event, the three-valued verdict of the formula at position 0
on the prefix read so far. They run one copy of their operand per input
position; a copy emitting Booleans is an atomic test whose first output is
its verdict, a copy emitting trooleans reports its latest verdict.
"""
from __future__ import annotations

from .basic import FunctionProcessor
from .core import GroupProcessor, Processor, connect
from .errors import PipelineError
from .events import FF, TT, UNK, Troolean, Tuple
from .functions import And, Function, Not, Or, ScalarFunction, kleene_and, kleene_or
from .trace_ops import Freeze, Trim

TRUTH = frozenset({"bool", "troolean"})


def _bool(v, who):
    if v is True or v is False:
        return v
    raise PipelineError(f"{who} expects Boolean events, got {v!r}")


# -- Boolean flavour ---------------------------------------------------------


class Globally(Processor):
    def __init__(self):
        super().__init__()
        self.input_kinds = (frozenset({"bool"}),)
        self._pending = 0

    def reset(self):
        self._pending = 0

    def compute(self, front):
        if _bool(front[0], "G"):
            self._pending += 1
            return []
        n, self._pending = self._pending + 1, 0
        return [(False,)] * n

    def on_end(self):
        n, self._pending = self._pending, 0
        return [(True,)] * n


class Eventually(Processor):
    def __init__(self):
        super().__init__()
        self.input_kinds = (frozenset({"bool"}),)
        self._pending = 0

    def reset(self):
        self._pending = 0

    def compute(self, front):
        if not _bool(front[0], "F"):
            self._pending += 1
            return []
        n, self._pending = self._pending + 1, 0
        return [(True,)] * n

    def on_end(self):
        n, self._pending = self._pending, 0
        return [(False,)] * n


class Next(Trim):
    def __init__(self):
        super().__init__(1)


class Until(Processor):
    """(a U b): b eventually holds and a holds at every position before."""

    input_arity = 2

    def __init__(self):
        super().__init__()
        self.input_kinds = (frozenset({"bool"}),) * 2
        self._pending = 0

    def reset(self):
        self._pending = 0

    def compute(self, front):
        a, b = _bool(front[0], "U"), _bool(front[1], "U")
        if b:
            n, self._pending = self._pending + 1, 0
            return [(True,)] * n
        if not a:
            n, self._pending = self._pending + 1, 0
            return [(False,)] * n
        self._pending += 1
        return []

    def on_end(self):
        n, self._pending = self._pending, 0
        return [(False,)] * n


# -- Troolean flavour --------------------------------------------------------


class _Slot:
    __slots__ = ("proc", "verdict")

    def __init__(self, proc):
        self.proc = proc
        self.verdict = UNK


def _advance(slot: _Slot, e) -> None:
    p = slot.proc
    p._push(0, e)
    outs = p.take_output(0)
    if not outs:
        return
    first = outs[0]
    if first is True or first is False:
        slot.verdict = TT if first else FF
        slot.proc = None
        return
    last = outs[-1]
    if not isinstance(last, Troolean):
        raise PipelineError(f"temporal operand must emit truth values, got {last!r}")
    slot.verdict = last
    if last is not UNK:
        slot.proc = None


class _Monitor(Processor):
    """Base for operators that start a copy of their operands at each position."""

    def __init__(self, *bodies: Processor):
        for b in bodies:
            if b.input_arity != 1 or b.output_arity != 1:
                raise ValueError("temporal operands must be 1:1 processors")
        self.bodies = list(bodies)
        super().__init__()
        self.output_kinds = (frozenset({"troolean"}),)
        self.reset()

    def reset(self):
        self._slots: list[list[_Slot]] = []
        self._decided = None

    def _children(self):
        live = [s.proc for row in self._slots for s in row if s.proc is not None]
        return self.bodies + live

    def _duplicate_parts(self):
        self.bodies = [b.duplicate() for b in self.bodies]

    def _spawn_and_feed(self, e, spawn=True):
        if spawn:
            self._slots.append([_Slot(b.duplicate()) for b in self.bodies])
        for row in self._slots:
            for s in row:
                if s.proc is not None:
                    _advance(s, e)

    def compute(self, front):
        if self._decided is not None:
            return [(self._decided,)]
        self._spawn_and_feed(front[0])
        v = self.verdict()
        if v is not UNK:
            self._decided = v
            self._slots = []
        return [(v,)]

    def verdict(self) -> Troolean:
        raise NotImplementedError


class Always(_Monitor):
    def verdict(self):
        rows = self._slots
        if any(r[0].verdict is FF for r in rows):
            return FF
        # decided-true positions no longer matter
        self._slots = [r for r in rows if r[0].verdict is not TT]
        return UNK


class Sometime(_Monitor):
    def verdict(self):
        rows = self._slots
        if any(r[0].verdict is TT for r in rows):
            return TT
        self._slots = [r for r in rows if r[0].verdict is not FF]
        return UNK


class After(_Monitor):
    """Verdict of the operand at position 1 (LTL next)."""

    def reset(self):
        super().reset()
        self._seen = 0

    def _spawn_and_feed(self, e, spawn=True):
        self._seen += 1
        super()._spawn_and_feed(e, spawn=self._seen == 2)

    def verdict(self):
        if not self._slots:
            return UNK
        return self._slots[0][0].verdict


class UpTo(_Monitor):
    """Three-valued (a U b): U_i = b_i or (a_i and U_{i+1}), unknown past the prefix."""

    def __init__(self, left: Processor, right: Processor):
        super().__init__(left, right)

    def verdict(self):
        acc = UNK
        for a, b in reversed(self._slots):
            acc = kleene_or(b.verdict, kleene_and(a.verdict, acc))
        return acc


class Quantifier(Processor):
    """One copy of ``phi`` per value of the domain, with ``var`` bound in its context.

    Values are collected from the domain function of every event; a value
    seen for the first time starts a fresh copy at that event.
    """

    def __init__(self, universal: bool, var: str, domain: Function, phi: Processor):
        if phi.input_arity != 1 or phi.output_arity != 1:
            raise ValueError("quantified processor must be 1:1")
        self.universal = universal
        self.var = var.lstrip("$@")
        self.domain = domain
        self.body = phi
        super().__init__()
        self.output_kinds = (frozenset({"troolean"}),)
        self.reset()

    def reset(self):
        self._inst: dict = {}
        self._latest: dict = {}

    def _children(self):
        return [self.body, *self._inst.values()]

    def _duplicate_parts(self):
        self.body = self.body.duplicate()

    def compute(self, front):
        e = front[0]
        values = self.domain.value((e,), self.context)
        if not isinstance(values, (list, tuple, set, frozenset)):
            raise PipelineError(f"quantifier domain must be a collection, got {values!r}")
        for v in values:
            key = _key(v)
            if key not in self._inst:
                p = self.body.duplicate()
                p.set_context(self.var, v)
                self._inst[key] = p
        for key, p in self._inst.items():
            p._push(0, e)
            outs = p.take_output(0)
            if outs:
                last = outs[-1]
                if not isinstance(last, (bool, Troolean)):
                    raise PipelineError(f"quantified processor must emit truth values, got {last!r}")
                self._latest[key] = Troolean.of(last)
        acc = TT if self.universal else FF
        op = kleene_and if self.universal else kleene_or
        for key in self._inst:
            acc = op(acc, self._latest.get(key, UNK))
        return [(acc,)]


def _key(v):
    try:
        hash(v)
        return (type(v).__name__, v)
    except TypeError:
        return (type(v).__name__, repr(v))


# -- formula compilers (used by tests and the API) ----------------------------


def atom(name: str) -> FunctionProcessor:
    """Boolean test: the event is ``name`` or contains proposition ``name``."""
    def test(e, _n=name):
        if isinstance(e, (set, frozenset, Tuple, dict)):
            return _n in e and (not isinstance(e, (Tuple, dict)) or bool(e[_n]))
        return e == _n
    return FunctionProcessor(ScalarFunction(f"is[{name}]", 1, test))


def _pair(left: Processor, right: Processor, fn) -> GroupProcessor:
    g = GroupProcessor(1, 1)
    op = FunctionProcessor(fn)
    connect(left, 0, op, 0)
    connect(right, 0, op, 1)
    g.add(left, right, op)
    g.associate_input(0, left)
    g.associate_input(0, right)
    g.associate_output(0, op)
    return g


def _seq(*procs) -> Processor:
    if len(procs) == 1:
        return procs[0]
    g = GroupProcessor(1, 1)
    for a, b in zip(procs, procs[1:]):
        connect(a, 0, b, 0)
    g.add(*procs)
    g.associate_input(0, procs[0])
    g.associate_output(0, procs[-1])
    return g


def _until_pair(left: Processor, right: Processor) -> GroupProcessor:
    g = GroupProcessor(1, 1)
    u = Until()
    connect(left, 0, u, 0)
    connect(right, 0, u, 1)
    g.add(left, right, u)
    g.associate_input(0, left)
    g.associate_input(0, right)
    g.associate_output(0, u)
    return g


def boolean_monitor(f) -> Processor:
    """Boolean-flavour pipeline for a formula given as nested tuples.

    Formulas: ``"p"`` (atom), ``("not", f)``, ``("and", f, g)``,
    ``("or", f, g)``, ``("G", f)``, ``("F", f)``, ``("X", f)``, ``("U", f, g)``.
    """
    if isinstance(f, str):
        return atom(f)
    op = f[0]
    if op == "not":
        return _seq(boolean_monitor(f[1]), FunctionProcessor(Not))
    if op in ("and", "or"):
        return _pair(boolean_monitor(f[1]), boolean_monitor(f[2]), And if op == "and" else Or)
    if op == "G":
        return _seq(boolean_monitor(f[1]), Globally())
    if op == "F":
        return _seq(boolean_monitor(f[1]), Eventually())
    if op == "X":
        return _seq(boolean_monitor(f[1]), Next())
    if op == "U":
        return _until_pair(boolean_monitor(f[1]), boolean_monitor(f[2]))
    raise ValueError(f"unknown operator {op!r}")


def troolean_monitor(f) -> Processor:
    """Three-valued monitor for a formula (same encoding as :func:`boolean_monitor`)."""
    if isinstance(f, str):
        return _seq(atom(f), Freeze())
    op = f[0]
    if op == "not":
        return _seq(troolean_monitor(f[1]), FunctionProcessor(Not))
    if op in ("and", "or"):
        return _pair(troolean_monitor(f[1]), troolean_monitor(f[2]), And if op == "and" else Or)
    if op == "G":
        return Always(troolean_monitor(f[1]))
    if op == "F":
        return Sometime(troolean_monitor(f[1]))
    if op == "X":
        return After(troolean_monitor(f[1]))
    if op == "U":
        return UpTo(troolean_monitor(f[1]), troolean_monitor(f[2]))
    raise ValueError(f"unknown operator {op!r}")


# -- grammar ---------------------------------------------------------------------

GRAMMAR = r"""
<processor> := <ltl-operator> | <ltl-troolean> | <ltl-quantifier>
<ltl-operator> := <globally> | <eventually> | <next> | <until> | <ltl-not> | <ltl-and> | <ltl-or>
<ltl-not> := NOT ( <processor> )
<ltl-and> := ( <processor> ) AND ( <processor> )
<ltl-or> := ( <processor> ) OR ( <processor> )
<globally> := G ( <processor> )
<eventually> := F ( <processor> )
<next> := X ( <processor> )
<until> := ( <processor> ) U ( <processor> )
<ltl-troolean> := <t-always> | <t-sometime> | <t-after> | <t-upto>
<t-always> := ALWAYS ( <processor> )
<t-sometime> := SOMETIME ( <processor> )
<t-after> := AFTER ( <processor> )
<t-upto> := ( <processor> ) UPTO ( <processor> )
<ltl-quantifier> := <forall> | <exists>
<forall> := FOR ALL <var-name> IN <function> : ( <processor> )
<exists> := THERE EXISTS <var-name> IN <function> : ( <processor> )
<constant> := <troolean>
<troolean> := ⊤ | ⊥ | ?
"""

_TROOLEAN_TOKENS = {"⊤": TT, "⊥": FF, "?": UNK}


def install(it) -> None:
    it.add_grammar(GRAMMAR)
    reg = it.register_association

    def unary(cls_or_fn):
        def b(s):
            src = s.args()[0]
            s.push(s.pipe(src, cls_or_fn()))
        return b

    def binary(factory):
        def b(s):
            left, right = s.args()
            p = s.new(factory())
            connect(left, 0, p, 0)
            connect(right, 0, p, 1)
            s.push(p)
        return b

    reg("ltl-not", unary(lambda: FunctionProcessor(Not)))
    reg("ltl-and", binary(lambda: FunctionProcessor(And)))
    reg("ltl-or", binary(lambda: FunctionProcessor(Or)))
    reg("globally", unary(Globally))
    reg("eventually", unary(Eventually))
    reg("next", unary(Next))
    reg("until", binary(Until))

    def monitor(cls):
        def b(s):
            bodies = s.args()
            op = cls(*bodies)
            s.push(s.pipe(s.placeholder(), op))
        return b

    reg("t-always", monitor(Always))
    reg("t-sometime", monitor(Sometime))
    reg("t-after", monitor(After))
    reg("t-upto", monitor(UpTo))
    it.register_scoped("t-always", [2])
    it.register_scoped("t-sometime", [2])
    it.register_scoped("t-after", [2])
    it.register_scoped("t-upto", [1, 5])

    def quant(universal):
        def b(s):
            a = s.args(keep_tokens=True)
            var, dom, body = str(a[2]), a[4], a[7]
            from .esql import _expr
            fn = _expr(dom).to_function(s.resolver(1))
            q = Quantifier(universal, var, fn, body)
            s.push(s.pipe(s.placeholder(), q))
        return b

    reg("forall", quant(True))
    reg("exists", quant(False))
    it.register_scoped("forall", [7], ctx_var_child=2)
    it.register_scoped("exists", [7], ctx_var_child=2)

    def b_troolean(s):
        s.push(_TROOLEAN_TOKENS[str(s.pop_token())])

    reg("troolean", b_troolean)
