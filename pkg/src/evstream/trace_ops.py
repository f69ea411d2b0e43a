"""Processors that reshape traces: decimation, trimming, windows, slicing."""
from __future__ import annotations

from collections import deque

from .core import Processor
from .errors import PipelineError
from .events import WILDCARD, kind_of
from .functions import Function, ScalarFunction

BOOL = frozenset({"bool"})


class Decimate(Processor):
    """Keeps events 0, n, 2n, ..."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("decimation interval must be at least 1")
        self.interval = n
        super().__init__()
        self._count = 0

    def reset(self):
        self._count = 0

    def compute(self, front):
        c = self._count
        self._count = c + 1
        if c % self.interval == 0:
            return [front]
        return []

    def replay(self, events):
        return list(events)[:: self.interval]


class Freeze(Processor):
    """Repeats the first event it received, once per input event."""

    _EMPTY = object()

    def __init__(self):
        super().__init__()
        self._first = self._EMPTY

    def reset(self):
        self._first = self._EMPTY

    def compute(self, front):
        if self._first is self._EMPTY:
            self._first = front[0]
        return [(self._first,)]


class Trim(Processor):
    """Drops the first ``n`` events."""

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("trim count must be non-negative")
        self.count = n
        super().__init__()
        self._seen = 0

    def reset(self):
        self._seen = 0

    def compute(self, front):
        if self._seen < self.count:
            self._seen += 1
            return []
        return [front]

    def replay(self, events):
        return list(events)[self.count:]


class Prefix(Processor):
    """Emits the first ``n`` events, then ends its output trace."""

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("prefix length must be non-negative")
        self.count = n
        super().__init__()
        self._seen = 0

    def reset(self):
        self._seen = 0

    def compute(self, front):
        if self._seen >= self.count:
            self.request_finish()
            return []
        self._seen += 1
        if self._seen >= self.count:
            self.request_finish()
        return [front]


class Filter(Processor):
    """2:1 processor: forwards the data event when the guard is true."""

    input_arity = 2

    def __init__(self):
        super().__init__()
        self.input_kinds = (None, BOOL)

    def compute(self, front):
        e, b = front
        if b is True:
            return [(e,)]
        if b is False:
            return []
        raise PipelineError(f"filter guard must be Boolean, got {b!r}")


class Dispatcher(Processor):
    """3:1 processor: second input when the selector is true, third otherwise."""

    input_arity = 3

    def __init__(self):
        super().__init__()
        self.input_kinds = (BOOL, None, None)

    def compute(self, front):
        b, x, y = front
        if b is True:
            return [(x,)]
        if b is False:
            return [(y,)]
        raise PipelineError(f"dispatcher selector must be Boolean, got {b!r}")


class Unpack(Processor):
    """Emits the members of each collection event one by one."""

    def compute(self, front):
        c = front[0]
        if not isinstance(c, list):
            raise PipelineError(f"expected a collection, got {c!r}")
        return [(x,) for x in c]


class Window(Processor):
    """out_i is the n-th output of a fresh copy of ``phi`` fed in_i .. in_{i+n-1}.

    Every window is replayed from scratch on a new copy of ``phi``.
    """

    def __init__(self, phi: Processor, n: int):
        if n < 1:
            raise ValueError("window width must be at least 1")
        if phi.input_arity != 1 or phi.output_arity != 1:
            raise ValueError("window body must be a 1:1 processor")
        self.body = phi
        self.width = n
        super().__init__()
        self._buf = deque(maxlen=n)

    def reset(self):
        self._buf = deque(maxlen=self.width)

    def _children(self):
        return [self.body]

    def _duplicate_parts(self):
        self.body = self.body.duplicate()

    def compute(self, front):
        buf = self._buf
        buf.append(front[0])
        n = self.width
        if len(buf) < n:
            return []
        outs = self.body.replay(buf)
        if len(outs) < n:
            raise PipelineError(
                f"window body produced {len(outs)} events on a window of {n}")
        return [(outs[n - 1],)]


def _as_function(f) -> Function:
    if isinstance(f, Function):
        return f
    return ScalarFunction(getattr(f, "__name__", "slice"), 1, f)


def _slot(key):
    k = kind_of(key)
    try:
        hash(key)
        return (k, key)
    except TypeError:
        return (k, repr(key))


class Slicer(Processor):
    """Runs one copy of ``phi`` per slice key.

    The slicing function maps each event to a key; :data:`WILDCARD` sends
    the event to every existing slice. The output after each event is the
    list of the latest outputs of all slices, in slice creation order
    (slices that have produced nothing yet are skipped).
    """

    _NONE = object()

    def __init__(self, slice_fn, phi: Processor):
        if phi.input_arity != 1 or phi.output_arity != 1:
            raise ValueError("slice body must be a 1:1 processor")
        self.slice_fn = _as_function(slice_fn)
        self.body = phi
        super().__init__()
        self._slices: dict = {}
        self._last: dict = {}

    def reset(self):
        self._slices = {}
        self._last = {}

    def _children(self):
        return [self.body, *self._slices.values()]

    def _duplicate_parts(self):
        self.body = self.body.duplicate()

    def slice_count(self) -> int:
        return len(self._slices)

    def _feed(self, slot, p, e):
        p._push(0, e)
        outs = p.take_output(0)
        if outs:
            self._last[slot] = outs[-1]

    def compute(self, front):
        e = front[0]
        key = self.slice_fn.value((e,), self.context)
        if key is WILDCARD:
            for slot, p in self._slices.items():
                self._feed(slot, p, e)
        else:
            slot = _slot(key)
            p = self._slices.get(slot)
            if p is None:
                p = self.body.duplicate()
                self._slices[slot] = p
            self._feed(slot, p, e)
        last, none = self._last, self._NONE
        return [([v for v in (last.get(s, none) for s in self._slices) if v is not none],)]
