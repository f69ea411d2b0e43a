"""The eSQL interpreter.

Queries are parsed with a :class:`~evstream.grammar.Grammar` and the parse
tree is walked bottom-up. Each terminal pushes its token on a
:class:`BuildStack`; each non-terminal with a registered builder pops the
artifacts of its children and pushes one result. The last artifact left is
the processor.

``*`` stands for the input of the innermost enclosing construct (window
body, slice body, ...). At top level it is the query's input; ``$name`` at
processor position declares an additional named input.

User definitions (``WHEN @P IS A PROCESSOR: THE COUNT OF @P IS THE
PROCESSOR ...``) add a grammar alternative whose node is expanded, by text
substitution, into the template before being built.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable

from . import functions as F
from .basic import Cumulative, FunctionProcessor, Passthrough
from .core import ConstantSource, GroupProcessor, Processor, connect
from .errors import BuildError, EngineError, ParseError
from .events import WILDCARD, Tuple
from .grammar import Grammar, Literal, NonTerminal, ParseNode, tokenize
from .trace_ops import Decimate, Freeze, Prefix, Slicer, Trim, Window

CORE_GRAMMAR = r"""
<S> := <processor>
<processor> := <p-placeholder> | <p-input> | <p-paren> | <fct-coll> | <fct-cp>
  | <cumulative> | <p-freeze> | <p-trim> | <p-window> | <p-decimate>
  | <p-prefix> | <p-slicer>
<p-placeholder> := *
<p-input> := <var-name>
<p-paren> := ( <processor> )
<fct-coll> := APPLY <function> <p-collator>
<fct-cp> := CONSTANT <constant>
<cumulative> := COMBINE <processor> WITH <fct-name>
<fct-name> := <fctn-and> | <fctn-or> | ADDITION | SUBTRACTION | MULTIPLICATION
  | DIVISION | MAXIMUM | MINIMUM
<fctn-and> := CONJUNCTION
<fctn-or> := DISJUNCTION
<p-freeze> := FREEZE <processor>
<p-trim> := TRIM <number> OF <processor>
<p-window> := GET <processor> FROM <processor> ON A WINDOW OF <number>
<p-decimate> := EVERY <number> <number-suffix> OF <processor>
<number-suffix> := ST | ND | RD | TH
<p-prefix> := THE FIRST <number> OF <processor>
<p-slicer> := SLICE <processor> WITH <processor> ON <function>
<p-collator> := WITH <proc-list>
<proc-list> := <proc-def> , <proc-list> | <proc-def>
<proc-def> := <proc-def-named> | <proc-def-anonymous>
<proc-def-named> := <processor> AS <var-name> | ( <processor> ) AS <var-name>
  | ( <processor> AS <var-name> )
<proc-def-anonymous> := ( <processor> ) | <processor>

<function> := <f-ite> | <f-imp>
<f-ite> := IF <function> THEN <function> ELSE <function>
<f-imp> := <f-or> <imp-op> <f-imp> | <f-or>
<imp-op> := → | IMPLIES
<f-or> := <f-and> <f-or-tail> | <f-and>
<f-or-tail> := <or-op> <f-and> <f-or-tail> | <or-op> <f-and>
<or-op> := ∨ | OR
<f-and> := <f-not> <f-and-tail> | <f-not>
<f-and-tail> := <and-op> <f-not> <f-and-tail> | <and-op> <f-not>
<and-op> := ∧ | AND
<f-not> := <not-op> <f-not> | <f-cmp>
<not-op> := ¬ | NOT
<f-cmp> := <f-sum> <cmp-op> <f-sum> | <f-sum>
<cmp-op> := = | != | <> | ≠ | < | > | <= | >= | ≤ | ≥
<f-sum> := <f-prod> <f-sum-tail> | <f-prod>
<f-sum-tail> := <add-op> <f-prod> <f-sum-tail> | <add-op> <f-prod>
<add-op> := + | -
<f-prod> := <f-pow> <f-prod-tail> | <f-pow>
<f-prod-tail> := <mul-op> <f-pow> <f-prod-tail> | <mul-op> <f-pow>
<mul-op> := * | / | % | MOD
<f-pow> := <f-unary> ^ <f-pow> | <f-unary>
<f-unary> := - <f-unary> | <f-atom>
<f-atom> := ( <function> ) | <fct-const> | <fct-call> | <constant>
<fct-const> := CONSTANT <constant>
<fct-call> := <fct-name> ( <function> , <function> ) | ABS ( <function> )
<constant> := <number> | <boolean> | <string> | <map-placeholder> | <wildcard>
  | <collection>
<map-placeholder> := <var-name>
<wildcard> := #
<collection> := { <const-list> } | { }
<const-list> := <function> , <const-list> | <function>

<number> := ^\d+(\.\d+)?
<boolean> := TRUE | FALSE | true | false
<string> := ^'(?:[^'\\]|\\.)*' | ^"(?:[^"\\]|\\.)*"
<var-name> := ^\$[\w\d]+
"""


# ---------------------------------------------------------------------------
# function expressions
# ---------------------------------------------------------------------------


class Expr:
    """Function expression awaiting name resolution."""

    def compile(self, r: "Resolver") -> F.Node:
        raise NotImplementedError

    def to_function(self, r: "Resolver") -> F.Function:
        node = self.compile(r)
        if isinstance(node, F.Const):
            return F.ConstantFunction(node.v, r.arity)
        return F.FunctionTree(node, r.arity, name=str(self))

    def is_closed(self) -> bool:
        return False


@dataclass
class ELit(Expr):
    value: Any

    def compile(self, r):
        return F.Const(self.value)

    def is_closed(self):
        return True

    def __str__(self):
        return repr(self.value)


@dataclass
class EVar(Expr):
    name: str

    def compile(self, r):
        return r.var(self.name)

    def __str__(self):
        return self.name


@dataclass
class EAttr(Expr):
    qualifier: str | None
    name: str

    def compile(self, r):
        return r.attr(self.qualifier, self.name)

    def __str__(self):
        return f"{self.qualifier}.{self.name}" if self.qualifier else self.name


@dataclass
class ECall(Expr):
    fn: F.Function
    args: list

    def compile(self, r):
        kids = [a.compile(r) for a in self.args]
        if all(isinstance(k, F.Const) for k in kids) and self.fn is not ListOf:
            # fold constants once; errors surface at build time
            try:
                return F.Const(F.Apply(self.fn, *kids).value((), None))
            except EngineError as exc:
                raise BuildError(str(exc)) from exc
        return F.Apply(self.fn, *kids)

    def is_closed(self):
        return all(a.is_closed() for a in self.args)

    def __str__(self):
        return f"{self.fn.name}({', '.join(map(str, self.args))})"


class _ListOf(F.Function):
    name = "List"

    def __init__(self):
        self.input_arity = -1

    def value(self, args, ctx=None):
        return list(args)


ListOf = _ListOf()


@dataclass
class EList(Expr):
    items: list

    def compile(self, r):
        kids = [a.compile(r) for a in self.items]
        if all(isinstance(k, F.Const) for k in kids):
            return F.Const([k.v for k in kids])
        return _ListNode(kids)

    def is_closed(self):
        return all(a.is_closed() for a in self.items)

    def __str__(self):
        return "{" + ", ".join(map(str, self.items)) + "}"


class _ListNode(F.Node):
    def __init__(self, kids):
        self.kids = kids

    def value(self, args, ctx):
        return [k.value(args, ctx) for k in self.kids]

    def max_arg(self):
        return max((k.max_arg() for k in self.kids), default=-1)


class GetAttribute(F.Function):
    """Reads one attribute of a tuple event."""

    def __init__(self, name: str):
        self.attr = name
        self.name = f"get[{name}]"
        self.input_arity = 1

    def value(self, args, ctx=None):
        t = args[0]
        try:
            return t[self.attr]
        except (KeyError, TypeError):
            raise F.EvaluationError(f"event {t!r} has no attribute {self.attr!r}") from None


class _AttrNode(F.Node):
    __slots__ = ("attr", "src")

    def __init__(self, attr, src: F.Node):
        self.attr = attr
        self.src = src

    def value(self, args, ctx):
        t = self.src.value(args, ctx)
        try:
            return t[self.attr]
        except (KeyError, TypeError, IndexError):
            raise F.EvaluationError(f"event {t!r} has no attribute {self.attr!r}") from None

    def max_arg(self):
        return self.src.max_arg()

    def __repr__(self):
        return f"{self.src!r}.{self.attr}"


class _SearchAttr(F.Node):
    """Unqualified attribute over several tuples: first one that has it."""

    def __init__(self, attr, srcs):
        self.attr = attr
        self.srcs = srcs

    def value(self, args, ctx):
        for s in self.srcs:
            t = s.value(args, ctx)
            if isinstance(t, (Tuple, dict)) and self.attr in t:
                return t[self.attr]
        raise F.EvaluationError(f"no input carries attribute {self.attr!r}")

    def max_arg(self):
        return max(s.max_arg() for s in self.srcs)


def attr_node(name: str, src: F.Node) -> F.Node:
    return _AttrNode(name, src)


class Resolver:
    """Maps names in a function expression to argument and context reads.

    ``operands`` lists the optional name of each function argument.
    ``qualifiers`` maps tuple names to nodes producing the named tuple.
    """

    def __init__(self, arity: int, operands=(), qualifiers=None, ctx_vars=(), attr_sources=None):
        self.arity = arity
        self.operands = list(operands) + [None] * (arity - len(operands))
        self.qualifiers = dict(qualifiers or {})
        self.ctx_vars = set(ctx_vars)
        if attr_sources is None:
            attr_sources = [F.ArgRef(i) for i in range(arity)]
        self.attr_sources = attr_sources

    def var(self, name: str) -> F.Node:
        if name in self.operands:
            return F.ArgRef(self.operands.index(name))
        m = re.fullmatch(r"\$(\d+)", name)
        if m and 1 <= int(m.group(1)) <= self.arity:
            return F.ArgRef(int(m.group(1)) - 1)
        bare = name[1:] if name[:1] in "$@" else name
        if bare in self.ctx_vars:
            return F.ContextRead(bare)
        raise BuildError(f"unbound placeholder {name}")

    def attr(self, qualifier, name) -> F.Node:
        if qualifier is None and name in self.qualifiers:
            return self.qualifiers[name]  # a bare tuple name denotes the whole event
        if qualifier is not None:
            if qualifier not in self.qualifiers:
                raise BuildError(f"unknown tuple name {qualifier!r} in {qualifier}.{name}")
            return _AttrNode(name, self.qualifiers[qualifier])
        if not self.attr_sources:
            raise BuildError(f"attribute {name!r} used where no tuple is available")
        if len(self.attr_sources) == 1:
            return _AttrNode(name, self.attr_sources[0])
        return _SearchAttr(name, self.attr_sources)


# ---------------------------------------------------------------------------
# building
# ---------------------------------------------------------------------------


class Token(str):
    """A terminal token on the build stack (distinct from text events)."""


@dataclass
class Collated:
    items: list  # (processor, name or None)


class Scope:
    def __init__(self, parent: "Scope | None", ctx_vars=(), root=False):
        self.parent = parent
        self.root = root
        self.ctx_vars = set(ctx_vars)
        self.placeholders: list[Passthrough] = []
        self.named: dict[str, list[Passthrough]] = {}
        self.procs: list[Processor] = []
        self.sources: list[Processor] = []

    def all_ctx_vars(self) -> set:
        s = set(self.ctx_vars)
        if self.parent is not None:
            s |= self.parent.all_ctx_vars()
        return s


class BuildStack:
    def __init__(self, interp: "Interpreter"):
        self.interp = interp
        self.items: list = []
        self.node: ParseNode | None = None
        self.scope = Scope(None, root=True)

    def push(self, x) -> None:
        self.items.append(x)

    def pop(self):
        if not self.items:
            raise BuildError("build stack is empty")
        return self.items.pop()

    def peek(self):
        return self.items[-1] if self.items else None

    def pop_token(self, expected: str | None = None) -> Token:
        t = self.pop()
        if not isinstance(t, Token) or (expected is not None and t != expected):
            raise BuildError(f"expected token {expected or ''!r} on the build stack, found {t!r}")
        return t

    def pop_processor(self) -> Processor:
        p = self.pop()
        if not isinstance(p, Processor):
            raise BuildError(f"expected a processor on the build stack, found {p!r}")
        return p

    def pop_number(self):
        n = self.pop()
        if isinstance(n, Token):
            try:
                n = int(n)
            except ValueError:
                raise BuildError(f"expected a number, found {n!r}") from None
        if isinstance(n, bool) or not isinstance(n, (int, float)):
            raise BuildError(f"expected a number, found {n!r}")
        return n

    def args(self, keep_tokens=False) -> list:
        """Pop one artifact per child of the current node, in order."""
        n = len(self.node.children)
        if len(self.items) < n:
            raise BuildError("build stack has fewer artifacts than the rule has symbols")
        out = self.items[-n:]
        del self.items[-n:]
        if keep_tokens:
            return out
        return [a for a in out if not isinstance(a, Token)]

    def new(self, proc: Processor) -> Processor:
        """Register a processor created while building the current scope."""
        self.scope.procs.append(proc)
        return proc

    def placeholder(self) -> Passthrough:
        p = self.new(Passthrough())
        self.scope.placeholders.append(p)
        return p

    def named_input(self, name: str) -> Passthrough:
        if not self.scope.root:
            raise BuildError(f"named input {name} cannot be used inside a nested construct")
        p = self.new(Passthrough())
        self.scope.named.setdefault(name, []).append(p)
        return p

    def add_source(self, proc: Processor) -> Processor:
        if not self.scope.root:
            raise BuildError("sources cannot be declared inside a nested construct")
        self.new(proc)
        self.scope.sources.append(proc)
        return proc

    def resolver(self, arity, operands=(), **kw) -> Resolver:
        return Resolver(arity, operands, ctx_vars=self.scope.all_ctx_vars(), **kw)

    def pipe(self, src: Processor, proc: Processor, index: int = 0) -> Processor:
        """Register ``proc`` and feed ``src`` into its input ``index``."""
        self.new(proc)
        connect(src, 0, proc, index)
        return proc


def disconnect(up: Processor, j: int) -> tuple:
    """Undo ``connect(up, j, ...)``; return the former (downstream, index)."""
    s = up._sinks[j]
    sp, sj = up._resolve_out(j)
    dp, di = s[0]._resolve_in(s[1])
    up._sinks[j] = None
    s[0]._sources[s[1]] = None
    sp._sinks[sj] = None
    dp._sources[di] = None
    return s


def _seal(inputs: list[list[Passthrough]], out: Processor, procs: list[Processor]) -> Processor:
    """Wrap ``out`` and its helpers into a group whose input i feeds ``inputs[i]``."""
    if out.output_arity != 1:
        raise BuildError("a query must produce exactly one output trace")
    if not any(inputs) and len(procs) == 1:
        return out
    if len(inputs) == 1 and inputs[0] == [out] and len(procs) == 1:
        return out
    g = GroupProcessor(len(inputs), 1)
    g.add(*procs)
    for i, pts in enumerate(inputs):
        for pt in pts:
            if pt._sinks[0] is not None and pt is not out:
                dest = disconnect(pt, 0)
                g._procs.remove(pt)
                g.associate_input(i, *dest)
            else:
                g.associate_input(i, pt, 0)
    g.associate_output(0, out, 0)
    return g


@dataclass
class Definition:
    params: dict  # "@P" -> grammar symbol
    pattern: list
    target: str
    template: str
    rule: str


_DEF_RE = re.compile(
    r"^\s*(?:WHEN\s+(?P<types>.*?)\s*:\s*)?(?P<pattern>\S.*?)\s+IS\s+THE\s+(?P<symbol>[A-Za-z][\w-]*)\s+(?P<body>.+?)\s*$",
    re.S,
)
_TYPE_RE = re.compile(r"^\s*(?P<var>@[A-Za-z0-9_]+)\s+IS\s+AN?\s+(?P<symbol>[A-Za-z][\w-]*)\s*$", re.S)


def split_statements(text: str) -> list[str]:
    """Split a session on '.' terminators (a '.' followed by blank or end).

    Dots inside quoted strings or numbers are kept.
    """
    out, buf, quote = [], [], None
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if quote:
            buf.append(c)
            if c == "\\" and i + 1 < n:
                buf.append(text[i + 1])
                i += 1
            elif c == quote:
                quote = None
        elif c in "'\"":
            quote = c
            buf.append(c)
        elif c == "." and (i + 1 == n or text[i + 1].isspace()):
            stmt = "".join(buf).strip()
            if stmt:
                out.append(stmt)
            buf = []
        else:
            buf.append(c)
        i += 1
    stmt = "".join(buf).strip()
    if stmt:
        out.append(stmt)
    return out


def is_definition(stmt: str) -> bool:
    return bool(re.match(r"^\s*WHEN\b", stmt)) or bool(re.search(r"\bIS\s+THE\b", stmt))


class Interpreter:
    """Grammar plus builders; one instance keeps definitions across statements."""

    def __init__(self, palettes=("tuples", "ltl", "fsm")):
        self.grammar = Grammar.from_text(CORE_GRAMMAR, start="S")
        self.builders: dict[str, Callable] = {}
        self.expanders: dict[str, Callable] = {}
        self.scoped: dict[str, tuple] = {}
        self.definitions: list[Definition] = []
        self.palettes: list[str] = []
        self._defcount = 0
        _register_core(self)
        for name in palettes:
            self.load_palette(name)

    # -- extension API -----------------------------------------------------

    def register_association(self, nonterminal: str, builder: Callable) -> None:
        """Call ``builder(stack)`` whenever a ``nonterminal`` node completes."""
        self.builders[nonterminal.strip("<>⟨⟩")] = builder

    def register_scoped(self, nonterminal: str, children, ctx_var_child: int | None = None) -> None:
        """Children at the given indices get their own ``*`` binding."""
        self.scoped[nonterminal.strip("<>⟨⟩")] = (frozenset(children), ctx_var_child)

    def add_grammar(self, text: str) -> None:
        self.grammar.load_text(text)

    def load_palette(self, name: str) -> None:
        if name in self.palettes:
            return
        if name == "tuples":
            from .tuples import install
        elif name == "ltl":
            from .ltl import install
        elif name == "fsm":
            from .fsm import install
        else:
            raise EngineError(f"unknown palette {name!r} (expected tuples, ltl or fsm)")
        install(self)
        self.palettes.append(name)

    # -- parsing and building ----------------------------------------------

    def parse(self, text: str, start: str | None = None) -> ParseNode:
        return self.grammar.parse(text, start)

    def interpret(self, query: str) -> Processor:
        """Build the pipeline described by ``query``."""
        tree = self.parse(query)
        stack = BuildStack(self)
        self._build(tree, stack)
        return self._finish_root(stack)

    def _finish_root(self, stack: BuildStack) -> Processor:
        if len(stack.items) != 1:
            raise BuildError(f"build left {len(stack.items)} artifacts on the stack, expected 1")
        out = stack.pop()
        if not isinstance(out, Processor):
            raise BuildError(f"query does not describe a processor (got {out!r})")
        sc = stack.scope
        inputs = []
        if sc.placeholders:
            inputs.append(sc.placeholders)
        self.last_input_names = (["*"] if sc.placeholders else []) + list(sc.named)
        inputs.extend(sc.named.values())
        proc = _seal(inputs, out, sc.procs) if (inputs or len(sc.procs) > 1) else out
        proc.input_names = list(self.last_input_names)
        proc.sources = list(sc.sources)
        return proc

    def build_in(self, text: str, symbol: str, stack: BuildStack) -> None:
        """Parse ``text`` as ``symbol`` and build it onto an existing stack."""
        tree = self.parse(text, symbol)
        self._build(tree, stack)

    def _build(self, node: ParseNode, stack: BuildStack) -> None:
        if node.is_terminal:
            stack.push(Token(node.token))
            return
        exp = self.expanders.get(node.label)
        if exp is not None:
            exp(node, stack)
            return
        sc = self.scoped.get(node.label)
        for i, ch in enumerate(node.children):
            if sc is not None and i in sc[0]:
                ctx = ()
                if sc[1] is not None:
                    ctx = (node.children[sc[1]].text().lstrip("$@"),)
                self._build_scoped(ch, stack, ctx)
            else:
                self._build(ch, stack)
        b = self.builders.get(node.label)
        if len(node.children) == 1 and node.children[0].label in self.expanders:
            b = None  # the expansion already built this symbol
        if b is not None:
            prev = stack.node
            stack.node = node
            try:
                b(stack)
            except EngineError:
                raise
            except (TypeError, ValueError) as exc:
                raise BuildError(f"while building <{node.label}>: {exc}") from exc
            finally:
                stack.node = prev

    def _build_scoped(self, node, stack: BuildStack, ctx_vars=()) -> None:
        outer = stack.scope
        inner = Scope(outer, ctx_vars)
        stack.scope = inner
        try:
            depth = len(stack.items)
            self._build(node, stack)
            if len(stack.items) != depth + 1:
                raise BuildError("nested construct must produce exactly one artifact")
            body = stack.pop()
            if not isinstance(body, Processor):
                raise BuildError(f"expected a processor, found {body!r}")
            if not inner.placeholders:
                raise BuildError("a nested processor must read its input through *")
            stack.push(_seal([inner.placeholders], body, inner.procs))
        finally:
            stack.scope = outer
        outer.procs.append(stack.peek())

    # -- definitions -----------------------------------------------------------

    def define(self, text: str) -> Definition:
        m = _DEF_RE.match(text)
        if not m:
            raise ParseError(f"not a definition: {text!r}", 0)
        params: dict[str, str] = {}
        if m.group("types"):
            for part in m.group("types").split(","):
                tm = _TYPE_RE.match(part)
                if not tm:
                    raise ParseError(f"bad parameter declaration {part.strip()!r}", 0)
                var = tm.group("var")
                if var in params:
                    raise ParseError(f"parameter {var} declared twice", 0)
                params[var] = self._symbol_name(tm.group("symbol"))
        target = self._symbol_name(m.group("symbol"))
        body = m.group("body")
        ptoks = [t.text for t in tokenize(m.group("pattern"))]
        used = {t for t in tokenize(body) if t.text.startswith("@")}
        for t in used:
            if t.text not in params:
                raise BuildError(f"template uses undeclared parameter {t.text}")
        for p in params:
            if p not in ptoks:
                raise BuildError(f"parameter {p} does not appear in the pattern")
        # validate the template before touching the grammar
        sample = _substitute(body, {p: self._sample(sym) for p, sym in params.items()})
        try:
            self.grammar.parse(sample, target)
        except ParseError as exc:
            raise ParseError(f"template does not parse as <{target}>: {exc}", exc.position,
                             exc.expected) from exc
        self._defcount += 1
        rule = f"userdef-{self._defcount}"
        syms = tuple(NonTerminal(params[t]) if t in params else Literal(t) for t in ptoks)
        d = Definition(params, ptoks, target, body, rule)
        self.grammar.add_rule(rule, syms)
        # appended last: built-in readings of the same words win
        self.grammar.add_case_to_rule(target, rule)
        self.expanders[rule] = self._make_expander(d)
        self.definitions.append(d)
        return d

    def _symbol_name(self, word: str) -> str:
        name = word.strip("<>⟨⟩").lower()
        if not self.grammar.has(name):
            raise BuildError(f"unknown grammar symbol {word!r}")
        return name

    def _sample(self, symbol: str) -> str:
        """Shortest sentence derivable from ``symbol`` (for template checks)."""
        samples = {"processor": "*", "number": "0", "function": "0", "constant": "0",
                   "boolean": "TRUE", "string": "'x'", "var-name": "$x"}
        if symbol in samples:
            return samples[symbol]
        best: dict[str, list[str]] = {}
        for _ in range(len(self.grammar.rules) + 1):
            changed = False
            for lhs, alts in self.grammar.rules.items():
                for alt in alts:
                    words = []
                    for s in alt:
                        if isinstance(s, NonTerminal):
                            if s.name not in best:
                                break
                            words.extend(best[s.name])
                        elif isinstance(s, Literal):
                            words.append(s.text)
                        else:
                            break
                    else:
                        if lhs not in best or len(words) < len(best[lhs]):
                            best[lhs] = words
                            changed = True
            if not changed:
                break
        if symbol not in best:
            raise BuildError(f"no sample sentence for <{symbol}>")
        return " ".join(best[symbol])

    def _make_expander(self, d: Definition):
        def expand(node: ParseNode, stack: BuildStack):
            binding = {}
            for tok, ch in zip(d.pattern, node.children):
                if tok in d.params:
                    txt = ch.text()
                    if d.params[tok] == "processor" and len(ch.leaves()) > 1:
                        txt = f"( {txt} )"
                    binding[tok] = txt
            self.build_in(_substitute(d.template, binding), d.target, stack)
        return expand

    def expand(self, query: str) -> str:
        """Rewrite every user-defined form in ``query`` into its template text."""
        tree = self.parse(query)
        return self._expand_text(tree)

    def _expand_text(self, node: ParseNode) -> str:
        if node.is_terminal:
            return node.token
        d = next((x for x in self.definitions if x.rule == node.label), None)
        if d is None:
            return " ".join(self._expand_text(c) for c in node.children)
        binding = {}
        for tok, ch in zip(d.pattern, node.children):
            if tok in d.params:
                txt = self._expand_text(ch)
                if d.params[tok] == "processor" and len(ch.leaves()) > 1:
                    txt = f"( {txt} )"
                binding[tok] = txt
        return _substitute(d.template, binding)

    # -- sessions ----------------------------------------------------------------

    def execute(self, text: str) -> Processor | None:
        """Run a session: definitions are recorded, the last query is built."""
        result = None
        for stmt in split_statements(text):
            if is_definition(stmt):
                self.define(stmt)
            else:
                if result is not None:
                    raise BuildError("a session may contain only one query")
                result = self.interpret(stmt)
        return result


def _substitute(template: str, binding: dict) -> str:
    out = []
    for t in tokenize(template):
        out.append(binding.get(t.text, t.text))
    return " ".join(out)


# ---------------------------------------------------------------------------
# core builders
# ---------------------------------------------------------------------------


_SEEDS = {
    "ADDITION": 0,
    "MULTIPLICATION": 1,
    "CONJUNCTION": True,
    "DISJUNCTION": False,
}

_FIRST = object()


class FirstSeeded(Cumulative):
    """Cumulative processor whose first output is its first input."""

    def __init__(self, f):
        super().__init__(f, _FIRST)

    def compute(self, front):
        if self._last is _FIRST:
            self._last = front[0]
            return [front]
        return super().compute(front)

    def replay(self, events):
        f, ctx = self.function, self.context
        out = []
        acc = _FIRST
        for e in events:
            acc = e if acc is _FIRST else f.value((acc, e), ctx)
            out.append(acc)
        return out


def cumulative_for(name: str) -> Cumulative:
    fn = F.NAMED_FUNCTIONS[name]
    if name in _SEEDS:
        return Cumulative(fn, _SEEDS[name])
    return FirstSeeded(fn)


_OPS = {
    "→": F.Implies, "IMPLIES": F.Implies,
    "∨": F.Or, "OR": F.Or, "∧": F.And, "AND": F.And, "¬": F.Not, "NOT": F.Not,
    "=": F.Equals, "!=": F.NotEquals, "<>": F.NotEquals, "≠": F.NotEquals,
    "<": F.LessThan, ">": F.GreaterThan, "<=": F.LessOrEqual, "≤": F.LessOrEqual,
    ">=": F.GreaterOrEqual, "≥": F.GreaterOrEqual,
    "+": F.Addition, "-": F.Subtraction, "*": F.Multiplication, "/": F.Division,
    "%": F.Modulo, "MOD": F.Modulo,
}


def _expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Token):
        raise BuildError(f"unexpected token {x!r} in a function")
    return ELit(x)


def _fold(head, tail):
    acc = _expr(head)
    for op, operand in tail:
        acc = ECall(op, [acc, _expr(operand)])
    return acc


def _register_core(it: Interpreter) -> None:
    reg = it.register_association

    def b_number(s):
        t = s.pop_token()
        s.push(float(t) if "." in t else int(t))

    def b_boolean(s):
        s.push(s.pop_token().upper() == "TRUE")

    def b_string(s):
        t = s.pop_token()
        s.push(re.sub(r"\\(.)", r"\1", t[1:-1]))

    def b_constant(s):
        s.push(_expr(s.pop()))

    def b_map_placeholder(s):
        s.push(EVar(str(s.pop_token())))

    def b_wildcard(s):
        s.pop_token("#")
        s.push(ELit(WILDCARD))

    def b_collection(s):
        a = s.args()
        s.push(EList(a[0] if a else []))

    def b_const_list(s):
        a = s.args()
        s.push([_expr(a[0])] + (a[1] if len(a) > 1 else []))

    for name, fn in [("number", b_number), ("boolean", b_boolean), ("string", b_string),
                     ("constant", b_constant), ("map-placeholder", b_map_placeholder),
                     ("wildcard", b_wildcard), ("collection", b_collection),
                     ("const-list", b_const_list)]:
        reg(name, fn)

    # operators: a token becomes the function it denotes
    def b_op(s):
        t = s.pop_token()
        s.push(_OPS[t])

    for name in ("imp-op", "or-op", "and-op", "not-op", "cmp-op", "add-op", "mul-op"):
        reg(name, b_op)

    def b_fct_name(s):
        t = s.pop()
        s.push(t if isinstance(t, F.Function) else F.NAMED_FUNCTIONS[str(t)])

    reg("fct-name", b_fct_name)
    reg("fctn-and", lambda s: (s.pop_token(), s.push(F.And)))
    reg("fctn-or", lambda s: (s.pop_token(), s.push(F.Or)))

    def b_chain(s):
        a = s.args()
        if len(a) == 1:
            s.push(_expr(a[0]))
        else:
            s.push(_fold(a[0], a[1]))

    def b_tail(s):
        a = s.args()
        s.push([(a[0], a[1])] + (a[2] if len(a) > 2 else []))

    for name in ("f-or", "f-and", "f-sum", "f-prod"):
        reg(name, b_chain)
    for name in ("f-or-tail", "f-and-tail", "f-sum-tail", "f-prod-tail"):
        reg(name, b_tail)

    def b_imp(s):
        a = s.args()
        s.push(_expr(a[0]) if len(a) == 1 else ECall(a[1], [_expr(a[0]), _expr(a[2])]))

    def b_not(s):
        a = s.args()
        s.push(_expr(a[0]) if len(a) == 1 else ECall(F.Not, [_expr(a[1])]))

    def b_cmp(s):
        a = s.args()
        s.push(_expr(a[0]) if len(a) == 1 else ECall(a[1], [_expr(a[0]), _expr(a[2])]))

    def b_pow(s):
        a = s.args()
        s.push(_expr(a[0]) if len(a) == 1 else ECall(F.Power, [_expr(a[0]), _expr(a[1])]))

    def b_unary(s):
        a = s.args(keep_tokens=True)
        if len(a) == 1:
            s.push(_expr(a[0]))
            return
        x = _expr(a[1])
        if isinstance(x, ELit) and F.is_number(x.value):
            s.push(ELit(-x.value))
        else:
            s.push(ECall(F.Negation, [x]))

    def b_atom(s):
        a = s.args()
        s.push(_expr(a[0]))

    def b_ite(s):
        a = s.args()
        s.push(ECall(F.IfThenElse, [_expr(x) for x in a]))

    def b_fct_call(s):
        a = s.args(keep_tokens=True)
        if a[0] == "ABS":
            s.push(ECall(F.AbsoluteValue, [_expr(a[2])]))
        else:
            s.push(ECall(a[0], [_expr(a[2]), _expr(a[4])]))

    def b_fct_const(s):
        a = s.args()
        s.push(_expr(a[0]))

    for name, fn in [("f-imp", b_imp), ("f-not", b_not), ("f-cmp", b_cmp), ("f-pow", b_pow),
                     ("f-unary", b_unary), ("f-atom", b_atom), ("f-ite", b_ite),
                     ("fct-call", b_fct_call), ("fct-const", b_fct_const)]:
        reg(name, fn)

    # -- processors --------------------------------------------------------

    def b_placeholder(s):
        s.pop_token("*")
        s.push(s.placeholder())

    def b_input(s):
        s.push(s.named_input(str(s.pop_token())))

    def b_paren(s):
        a = s.args()
        s.push(a[0])

    reg("p-placeholder", b_placeholder)
    reg("p-input", b_input)
    reg("p-paren", b_paren)

    def b_fct_cp(s):
        a = s.args()
        e = _expr(a[0])
        if not e.is_closed():
            raise BuildError("CONSTANT needs a closed value")
        s.push(s.new(ConstantSource(e.compile(Resolver(0)).v)))

    reg("fct-cp", b_fct_cp)

    def b_proc_list(s):
        a = s.args()
        s.push([a[0]] + (a[1] if len(a) > 1 else []))

    def b_named_raw(s):
        a = s.args(keep_tokens=True)
        proc = next(x for x in a if isinstance(x, Processor))
        name = next(str(x) for x in a if isinstance(x, Token) and re.fullmatch(r"\$[\w\d]+", x))
        s.push((proc, name))

    def b_anon(s):
        a = s.args()
        s.push((a[0], None))

    def b_collator(s):
        a = s.args()
        items = a[0]
        names = [n for _, n in items if n is not None]
        if len(names) != len(set(names)):
            raise BuildError(f"duplicate operand names in collator: {names}")
        s.push(Collated(items))

    reg("proc-list", b_proc_list)
    reg("proc-def-named", b_named_raw)
    reg("proc-def-anonymous", b_anon)
    reg("p-collator", b_collator)

    def b_apply(s):
        a = s.args()
        expr, coll = _expr(a[0]), a[1]
        k = len(coll.items)
        r = s.resolver(k, [n for _, n in coll.items])
        fn = expr.to_function(r)
        proc = s.new(FunctionProcessor(fn))
        for i, (p, _) in enumerate(coll.items):
            connect(p, 0, proc, i)
        s.push(proc)

    reg("fct-coll", b_apply)

    def b_cumulative(s):
        a = s.args()
        src, fn = a[0], a[1]
        name = next((n for n, f in F.NAMED_FUNCTIONS.items() if f is fn), None)
        s.push(s.pipe(src, cumulative_for(name)))

    reg("cumulative", b_cumulative)

    reg("p-freeze", lambda s: s.push(s.pipe(s.args()[0], Freeze())))

    def b_trim(s):
        n, src = s.args()
        s.push(s.pipe(src, Trim(int(n))))

    def b_window(s):
        body, src, n = s.args()
        s.push(s.pipe(src, Window(body, int(n))))

    def b_decimate(s):
        n, _suffix, src = s.args()
        s.push(s.pipe(src, Decimate(int(n))))

    def b_suffix(s):
        s.push(str(s.pop_token()))

    def b_prefix(s):
        n, src = s.args()
        s.push(s.pipe(src, Prefix(int(n))))

    def b_slicer(s):
        src, body, expr = s.args()
        fn = _expr(expr).to_function(s.resolver(1))
        s.push(s.pipe(src, Slicer(fn, body)))

    reg("p-trim", b_trim)
    reg("p-window", b_window)
    reg("p-decimate", b_decimate)
    reg("number-suffix", b_suffix)
    reg("p-prefix", b_prefix)
    reg("p-slicer", b_slicer)
    it.register_scoped("p-window", [1])
    it.register_scoped("p-slicer", [3])
