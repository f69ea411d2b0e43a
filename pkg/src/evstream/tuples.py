"""Tuple events: CSV reading and writing, SELECT / FROM / WHERE."""
from __future__ import annotations

import csv
import io
import re
from pathlib import Path

from . import functions as F
from .basic import Fork, FunctionProcessor
from .core import IterSource, Processor, connect
from .errors import BuildError, PipelineError
from .esql import EAttr, Resolver, _expr
from .events import Troolean, Tuple
from .trace_ops import Filter

_INT = re.compile(r"[+-]?\d+", re.ASCII)
_FLOAT = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?", re.ASCII)


def infer(field: str):
    """Number if the field looks like one, text otherwise."""
    if field.isascii() and field.isdigit():
        return int(field)
    if _INT.fullmatch(field):
        return int(field)
    if _FLOAT.fullmatch(field):
        return float(field)
    return field


def split_row(line: str) -> list[str]:
    line = line.rstrip("\r\n")
    if '"' not in line:
        return line.split(",")
    return next(csv.reader([line]))


def _as_line(e) -> str:
    if isinstance(e, str):
        return e
    if isinstance(e, (int, float)) and not isinstance(e, bool):
        return format_scalar(e)
    raise PipelineError(f"tuple reader expects text lines, got {e!r}")


class TupleReader(Processor):
    """Turns CSV lines into tuples; the first line is the header."""

    def __init__(self):
        super().__init__()
        self.output_kinds = (frozenset({"tuple"}),)
        self._header = None
        self._row = 0

    def reset(self):
        self._header = None
        self._row = 0

    def compute(self, front):
        line = _as_line(front[0])
        self._row += 1
        if self._header is None:
            self._header = [h.strip() for h in split_row(line)]
            if len(set(self._header)) != len(self._header):
                raise PipelineError(f"duplicate attribute names in header {self._header}")
            return []
        fields = split_row(line)
        if len(fields) != len(self._header):
            raise PipelineError(
                f"row {self._row} has {len(fields)} fields, header has {len(self._header)}")
        return [(Tuple(zip(self._header, map(infer, fields))),)]

    def replay(self, events):
        d = self.duplicate()
        out = []
        for e in events:
            out.extend(o[0] for o in d.compute((e,)))
        return out


def read_tuples(lines) -> list[Tuple]:
    r = TupleReader()
    out = []
    for ln in lines:
        out.extend(o[0] for o in r.compute((ln,)))
    return out


def format_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v.is_integer() and abs(v) < 1e16:
            return str(int(v))
        return repr(v)
    if isinstance(v, Troolean):
        return str(v)
    return str(v)


def _csv_field(v) -> str:
    s = format_scalar(v)
    if any(c in s for c in ',"\n') or (isinstance(v, str) and s != s.strip()):
        return '"' + s.replace('"', '""') + '"'
    return s


def header_line(t: Tuple) -> str:
    return ",".join(_csv_field(k) for k in t)


def row_line(t: Tuple) -> str:
    return ",".join(_csv_field(v) for v in t.values())


def write_tuples(tuples, out=None) -> str:
    """CSV text for ``tuples`` (header taken from the first one)."""
    buf = out or io.StringIO()
    first = True
    for t in tuples:
        if first:
            buf.write(header_line(t) + "\n")
            first = False
        buf.write(row_line(t) + "\n")
    return buf.getvalue() if out is None else ""


class FileSource(IterSource):
    """Emits the lines of a text file."""

    def __init__(self, path):
        self.path = Path(path)
        super().__init__(self._lines())

    def _lines(self):
        with self.path.open(encoding="utf-8", newline="") as fh:
            for line in fh:
                yield line.rstrip("\r\n")

    def reset(self):
        self._it = iter(self._lines())


class FromProcessor(Processor):
    """Zips k streams; one stream passes through, several become a list."""

    def __init__(self, names):
        self.names = list(names)
        super().__init__(len(self.names), 1)

    def compute(self, front):
        if self.input_arity == 1:
            return [front]
        return [(list(front),)]

    def qualifiers(self) -> dict:
        if self.input_arity == 1:
            return {n: F.ArgRef(0) for n in self.names if n}
        return {n: _Index(i) for i, n in enumerate(self.names) if n}

    def attr_sources(self) -> list:
        if self.input_arity == 1:
            return [F.ArgRef(0)]
        return [_Index(i) for i in range(self.input_arity)]


class _Index(F.Node):
    __slots__ = ("i",)

    def __init__(self, i):
        self.i = i

    def value(self, args, ctx):
        return args[0][self.i]

    def max_arg(self):
        return 0


class SelectFunction(F.Function):
    def __init__(self, columns):
        self.columns = columns  # (name, node)
        self.input_arity = 1
        self.name = "select"
        self.output_kinds = (frozenset({"tuple"}),)

    def value(self, args, ctx=None):
        return Tuple((n, node.value(args, ctx)) for n, node in self.columns)


def _resolver_for(stack, src: Processor) -> Resolver:
    if isinstance(src, FromProcessor):
        return stack.resolver(1, qualifiers=src.qualifiers(), attr_sources=src.attr_sources())
    return stack.resolver(1)


def build_where(stack, src: Processor, cond) -> Processor:
    r = _resolver_for(stack, src)
    fn = _expr(cond).to_function(r)
    fork = stack.new(Fork(2))
    test = stack.new(FunctionProcessor(fn))
    filt = stack.new(Filter())
    connect(src, 0, fork, 0)
    connect(fork, 0, filt, 0)
    connect(fork, 1, test, 0)
    connect(test, 0, filt, 1)
    if isinstance(src, FromProcessor):
        filt.from_source = src
    return filt


def build_select(stack, src: Processor, columns) -> Processor:
    origin = getattr(src, "from_source", src)
    r = _resolver_for(stack, origin)
    cols = []
    for k, (expr, name) in enumerate(columns, start=1):
        e = _expr(expr)
        if name is None:
            name = e.name if isinstance(e, EAttr) else f"_{k}"
        cols.append((name, e.compile(r)))
    names = [n for n, _ in cols]
    if len(names) != len(set(names)):
        raise BuildError(f"duplicate output attribute names {names}")
    return stack.pipe(src, FunctionProcessor(SelectFunction(cols)))


GRAMMAR = r"""
<processor> := <tuples-where> | <tuples-sfw> | <tuples-select> | <tuples-from>
  | <tuple-reader> | <p-file>
<p-file> := FILE <string>
<tuple-reader> := THE TUPLES OF <processor>
<tuples-sfw> := SELECT <attribute-expression-list> FROM <tuple-expression-list> WHERE <function>
<tuples-select> := SELECT <attribute-expression-list> <processor>
<attribute-expression-list> := <attribute-expression> , <attribute-expression-list>
  | <attribute-expression>
<attribute-expression> := <named-attribute-expression> | <anonymous-attribute-expression>
<named-attribute-expression> := <function> AS <tuple-name>
<anonymous-attribute-expression> := <function>
<tuples-from> := FROM <tuple-expression-list>
<tuple-expression-list> := <tuple-expression> , <tuple-expression-list> | <tuple-expression>
<tuple-expression> := <named-tuple-expression> | <anonymous-tuple-expression>
<named-tuple-expression> := <processor> AS <tuple-name>
<anonymous-tuple-expression> := <processor>
<tuples-where> := ( <processor> ) WHERE <function>
<constant> := <get-attribute>
<get-attribute> := <get-attribute-qual> | <get-attribute-unqual>
<get-attribute-qual> := ^[a-zA-Z]\w*\.[a-zA-Z]\w*
<get-attribute-unqual> := <tuple-name>
<tuple-name> := ^[a-zA-Z]\w*
"""


def install(it) -> None:
    it.add_grammar(GRAMMAR)
    reg = it.register_association

    def b_file(s):
        path = s.args()[0]
        s.push(s.add_source(FileSource(path)))

    def b_reader(s):
        src = s.args()[0]
        s.push(s.pipe(src, TupleReader()))

    def b_list(s):
        a = s.args()
        s.push([a[0]] + (a[1] if len(a) > 1 else []))

    def b_named(s):
        a = s.args()
        s.push((a[0], str(a[1])))

    def b_anon(s):
        s.push((s.args()[0], None))

    def b_from_items(s, items) -> FromProcessor:
        names = [n for _, n in items]
        named = [n for n in names if n]
        if len(named) != len(set(named)):
            raise BuildError(f"duplicate tuple names {named}")
        fp = s.new(FromProcessor(names))
        for i, (p, _) in enumerate(items):
            connect(p, 0, fp, i)
        return fp

    def b_from(s):
        s.push(b_from_items(s, s.args()[0]))

    def b_select(s):
        cols, src = s.args()
        s.push(build_select(s, src, cols))

    def b_sfw(s):
        cols, items, cond = s.args()
        fp = b_from_items(s, items)
        s.push(build_select(s, build_where(s, fp, cond), cols))

    def b_where(s):
        src, cond = s.args()
        s.push(build_where(s, src, cond))

    def b_qual(s):
        q, _, n = str(s.pop_token()).partition(".")
        s.push(EAttr(q, n))

    def b_unqual(s):
        s.push(EAttr(None, str(s.pop())))

    def b_tuple_name(s):
        s.push(str(s.pop_token()))

    for name, fn in [
        ("p-file", b_file), ("tuple-reader", b_reader),
        ("attribute-expression-list", b_list), ("tuple-expression-list", b_list),
        ("named-attribute-expression", b_named), ("anonymous-attribute-expression", b_anon),
        ("named-tuple-expression", b_named), ("anonymous-tuple-expression", b_anon),
        ("tuples-from", b_from), ("tuples-select", b_select), ("tuples-sfw", b_sfw),
        ("tuples-where", b_where), ("get-attribute-qual", b_qual),
        ("get-attribute-unqual", b_unqual), ("tuple-name", b_tuple_name),
    ]:
        reg(name, fn)


__all__ = [
    "TupleReader", "FileSource", "FromProcessor", "SelectFunction", "infer", "split_row",
    "read_tuples", "write_tuples", "header_line", "row_line", "format_scalar",
]
