"""A BNF grammar that can be changed while the program runs.

Alternatives are written as whitespace-separated symbols:

* ``<name>`` (or ``⟨name⟩``) refers to a non-terminal,
* ``^regex`` is a terminal matched against a whole token,
* anything else is a literal token.

Parsing is recursive descent with full backtracking: every non-terminal
is expanded into all the token positions it can reach, alternatives are
tried in order, and the first derivation that consumes the whole input
wins. Results are memoised per (symbol, position). Re-entering a symbol at
the position where it is already being expanded means the grammar is left
recursive, which is reported as a :class:`ParseError`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    '(?:[^'\\]|\\.)*'            # single-quoted string
  | "(?:[^"\\]|\\.)*"            # double-quoted string
  | \d+(?:\.\d+)?                # number
  | [$@][A-Za-z0-9_]+            # placeholder / parameter name
  | [A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?   # identifier, maybe qualified
  | <=|>=|!=|<>|:=
  | \S                           # any other single character
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    text: str
    offset: int


def tokenize(text: str) -> list[Tok]:
    return [Tok(m.group(0), m.start()) for m in _TOKEN_RE.finditer(text)]


class Symbol:
    __slots__ = ()


@dataclass(frozen=True)
class NonTerminal(Symbol):
    name: str

    def __str__(self):
        return f"<{self.name}>"


@dataclass(frozen=True)
class Literal(Symbol):
    text: str

    def __str__(self):
        return self.text


@dataclass(frozen=True, eq=False)
class Pattern(Symbol):
    source: str
    regex: re.Pattern = field(compare=False, repr=False)

    def __eq__(self, other):
        return isinstance(other, Pattern) and other.source == self.source

    def __hash__(self):
        return hash(("re", self.source))

    def __str__(self):
        return "^" + self.source


_NT_RE = re.compile(r"^(?:<([^<>\s]+)>|⟨([^⟨⟩\s]+)⟩)$")


def parse_symbol(word: str) -> Symbol:
    m = _NT_RE.match(word)
    if m:
        return NonTerminal(m.group(1) or m.group(2))
    if word.startswith("^") and len(word) > 1:
        src = word[1:]
        return Pattern(src, re.compile(src))
    return Literal(word)


def parse_alternative(alt) -> tuple:
    if isinstance(alt, str):
        syms = tuple(parse_symbol(w) for w in alt.split())
    else:
        syms = tuple(parse_symbol(a) if isinstance(a, str) else a for a in alt)
    if not syms:
        raise ValueError("an alternative needs at least one symbol")
    return syms


@dataclass
class ParseNode:
    """Parse-tree node. Terminals have ``label is None`` and a ``token``."""

    label: str | None
    children: list
    start: int
    end: int
    token: str | None = None
    alternative: int = 0

    @property
    def is_terminal(self):
        return self.label is None

    def leaves(self) -> list[str]:
        if self.is_terminal:
            return [self.token]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def text(self) -> str:
        return " ".join(self.leaves())

    def same_as(self, other: "ParseNode") -> bool:
        if (self.label, self.token, self.start, self.end) != (other.label, other.token, other.start, other.end):
            return False
        return len(self.children) == len(other.children) and all(
            a.same_as(b) for a, b in zip(self.children, other.children))

    def pretty(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.is_terminal:
            return f"{pad}{self.token}"
        lines = [f"{pad}<{self.label}>"]
        lines.extend(c.pretty(indent + 1) for c in self.children)
        return "\n".join(lines)

    def find(self, label: str):
        if self.label == label:
            return self
        for c in self.children:
            r = c.find(label)
            if r is not None:
                return r
        return None


class Grammar:
    def __init__(self, start: str | None = None):
        self.start = start
        self.rules: dict[str, list[tuple]] = {}

    def copy(self) -> "Grammar":
        g = Grammar(self.start)
        g.rules = {k: list(v) for k, v in self.rules.items()}
        return g

    def add_rule(self, lhs: str, alternative) -> None:
        """Append one alternative to ``lhs`` (created if needed)."""
        syms = parse_alternative(alternative)
        self.rules.setdefault(_bare(lhs), []).append(syms)

    def add_case_to_rule(self, lhs: str, case: str) -> None:
        self.add_rule(lhs, (NonTerminal(_bare(case)),))

    def has(self, name: str) -> bool:
        return _bare(name) in self.rules

    def remove_last(self, lhs: str) -> None:
        lhs = _bare(lhs)
        self.rules[lhs].pop()
        if not self.rules[lhs]:
            del self.rules[lhs]

    # -- text format -------------------------------------------------------

    def load_text(self, text: str) -> None:
        """Read rules written as ``<lhs> := alt1 | alt2 ;``.

        A rule may span several lines; lines starting with ``#`` are comments.
        """
        stmts: list[str] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if _RULE_START.match(line) or not stmts:
                stmts.append(line)
            else:
                stmts[-1] += " " + line
        for st in stmts:
            self._load_rule(st)

    def _load_rule(self, stmt: str) -> None:
        stmt = stmt.strip()
        if stmt.endswith(";"):
            stmt = stmt[:-1]
        lhs, sep, body = stmt.partition(":=")
        if not sep:
            raise ParseError(f"grammar rule without ':=': {stmt!r}")
        lhs = lhs.strip()
        if not _NT_RE.match(lhs):
            raise ParseError(f"left-hand side must be a non-terminal: {lhs!r}")
        alt: list[str] = []
        for w in body.split():
            if w == "|":
                if not alt:
                    raise ParseError(f"empty alternative in rule for {lhs}")
                self.add_rule(lhs, alt)
                alt = []
            else:
                alt.append(w)
        if not alt:
            raise ParseError(f"empty alternative in rule for {lhs}")
        self.add_rule(lhs, alt)

    @classmethod
    def from_text(cls, text: str, start: str | None = None) -> "Grammar":
        g = cls(start)
        g.load_text(text)
        if g.start is None and g.rules:
            g.start = next(iter(g.rules))
        return g

    @classmethod
    def from_file(cls, path, start=None) -> "Grammar":
        return cls.from_text(Path(path).read_text(encoding="utf-8"), start)

    def to_text(self) -> str:
        lines = []
        for lhs, alts in self.rules.items():
            body = " | ".join(" ".join(str(s) for s in a) for a in alts)
            lines.append(f"<{lhs}> := {body} ;")
        return "\n".join(lines)

    # -- parsing -------------------------------------------------------------

    def parse(self, text: str, start: str | None = None) -> ParseNode:
        tokens = tokenize(text) if isinstance(text, str) else list(text)
        sym = _bare(start or self.start or "")
        if not sym:
            raise ParseError("grammar has no start symbol")
        return _Parser(self, tokens, text if isinstance(text, str) else None).run(sym)

    def matches(self, text: str, start: str | None = None) -> bool:
        try:
            self.parse(text, start)
            return True
        except ParseError:
            return False


_RULE_START = re.compile(r"^(?:<[^<>\s]+>|⟨[^⟨⟩\s]+⟩)\s*:=")


def _bare(name: str) -> str:
    m = _NT_RE.match(name)
    if m:
        return m.group(1) or m.group(2)
    return name


class _Parser:
    def __init__(self, grammar: Grammar, tokens: list[Tok], text):
        self.g = grammar
        self.toks = tokens
        self.text = text
        self.memo: dict = {}
        self.active: set = set()
        self.far = -1
        self.expected: set = set()

    def fail(self, pos, what):
        if pos > self.far:
            self.far = pos
            self.expected = {what}
        elif pos == self.far:
            self.expected.add(what)

    def run(self, sym: str) -> ParseNode:
        res = self.nonterminal(sym, 0)
        n = len(self.toks)
        if n in res:
            return res[n]
        if self.far < n and self.far >= 0:
            at = self.toks[self.far]
            where = f"token {at.text!r} at offset {at.offset}"
            pos = at.offset
        else:
            where = "end of input"
            pos = len(self.text) if self.text is not None else n
            if res and not self.expected:
                self.expected = {"end of input"}
        exp = ", ".join(sorted(self.expected)) or "nothing"
        raise ParseError(f"cannot parse at {where}; expected {exp}", pos, self.expected)

    def nonterminal(self, name: str, pos: int) -> dict:
        key = (name, pos)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if key in self.active:
            raise ParseError(f"left recursion on <{name}> at token {pos}",
                             self._offset(pos), [f"<{name}>"])
        alts = self.g.rules.get(name)
        if alts is None:
            raise ParseError(f"undefined non-terminal <{name}>", self._offset(pos), [f"<{name}>"])
        self.active.add(key)
        try:
            out: dict[int, ParseNode] = {}
            for ai, alt in enumerate(alts):
                for end, kids in self.sequence(alt, pos):
                    if end not in out:
                        out[end] = ParseNode(name, kids, pos, end, alternative=ai)
        finally:
            self.active.discard(key)
        self.memo[key] = out
        return out

    def _offset(self, pos):
        if pos < len(self.toks):
            return self.toks[pos].offset
        return len(self.text) if self.text is not None else pos

    def sequence(self, alt: tuple, pos: int):
        states: dict[int, list] = {pos: []}
        for sym in alt:
            nxt: dict[int, list] = {}
            for p, kids in states.items():
                for end, node in self.symbol(sym, p):
                    if end not in nxt:
                        nxt[end] = kids + [node]
            if not nxt:
                return []
            states = nxt
        return list(states.items())

    def symbol(self, sym: Symbol, pos: int):
        if isinstance(sym, NonTerminal):
            return list(self.nonterminal(sym.name, pos).items())
        if pos >= len(self.toks):
            self.fail(pos, str(sym) if isinstance(sym, Literal) else f"/{sym.source}/")
            return []
        t = self.toks[pos].text
        if isinstance(sym, Literal):
            ok = t == sym.text
        else:
            ok = sym.regex.fullmatch(t) is not None
        if not ok:
            self.fail(pos, str(sym) if isinstance(sym, Literal) else f"/{sym.source}/")
            return []
        return [(pos + 1, ParseNode(None, [], pos, pos + 1, token=t))]
