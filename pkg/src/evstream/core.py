"""Processor contract, pipes, push/pull evaluation and processor groups.

A processor consumes *fronts*: one event taken from every input queue at
once. Subclasses implement :meth:`Processor.compute`, which maps a front to
a list of output fronts (possibly empty). Everything else (queues, end of
trace, push cascades, pull requests) lives here.

A connected pipeline is single-threaded. Entry points refuse to run while
another thread is inside the same processor.
"""
from __future__ import annotations

import copy
import enum
import itertools
import threading
from collections import deque
from typing import Any, Iterable

from .errors import ConcurrencyError, PipeConnectionError, PipelineError, PullModeError

_ids = itertools.count(1)


class PullStatus(enum.Enum):
    YES = "YES"
    NO = "NO"
    MAYBE = "MAYBE"


YES, NO, MAYBE = PullStatus.YES, PullStatus.NO, PullStatus.MAYBE


class Processor:
    """Base m:n processor.

    ``input_kinds`` / ``output_kinds`` optionally declare, per pipe, the set
    of event kinds (see :func:`evstream.events.kind_of`) a pipe carries.
    ``None`` means any kind.
    """

    input_arity = 1
    output_arity = 1
    input_kinds: tuple | None = None
    output_kinds: tuple | None = None

    def __init__(self, input_arity: int | None = None, output_arity: int | None = None):
        if input_arity is not None:
            self.input_arity = input_arity
        if output_arity is not None:
            self.output_arity = output_arity
        self.context: dict[str, Any] = {}
        self.id = next(_ids)
        self._owner = None
        self._init_plumbing()

    # -- subclass hooks -------------------------------------------------

    def compute(self, front: tuple) -> list:
        """Return the output fronts produced by consuming ``front``."""
        raise NotImplementedError

    def on_end(self) -> list:
        """Output fronts to flush once the input trace is over."""
        return []

    def reset(self) -> None:
        """Clear computation state (called on fresh duplicates)."""

    def _children(self) -> list:
        return []

    def _duplicate_parts(self) -> None:
        pass

    # -- plumbing -------------------------------------------------------

    def _init_plumbing(self):
        m, n = self.input_arity, self.output_arity
        self._inq = [deque() for _ in range(m)]
        self._outq = [deque() for _ in range(n)]
        self._sinks: list = [None] * n
        self._sources: list = [None] * m
        self._ended = [False] * m
        self._const: dict[int, Any] = {}
        self._finished = False
        self._stop = False
        self._pull_modes: dict[int, str] = {}
        self._simple = m == 1

    def _resolve_in(self, i):
        return self, i

    def _resolve_out(self, j):
        return self, j

    def _mark_const(self, i, value):
        self._const[i] = value
        self._simple = False

    # -- push mode ------------------------------------------------------

    def push(self, i: int, e) -> None:
        """Push event ``e`` on input pipe ``i`` and run every step it enables."""
        if not 0 <= i < self.input_arity:
            raise PipeConnectionError(
                f"{self.name()} has no input pipe {i} (arity {self.input_arity})")
        prev = self._enter()
        try:
            self._push(i, e)
        finally:
            self._owner = prev

    def push_end(self, i: int | None = None) -> None:
        """Signal end of trace on pipe ``i`` (all pipes when ``None``)."""
        prev = self._enter()
        try:
            for k in (range(self.input_arity) if i is None else (i,)):
                self._push_end(k)
        finally:
            self._owner = prev

    def _push(self, i, e):
        if self._ended[i]:
            raise PipelineError(f"push on input {i} of {self.name()} after end of trace")
        if self._finished:
            return
        if self._simple:
            try:
                outs = self.compute((e,))
            except Exception:
                # a failed step consumes nothing: keep the event queued
                self._inq[i].append(e)
                self._simple = False
                raise
            if outs:
                self._emit(outs, True)
            if self._stop:
                self._finish(True)
            return
        self._inq[i].append(e)
        self._drain(True)

    def _front_ready(self):
        const = self._const
        for i, q in enumerate(self._inq):
            if not q and i not in const:
                return False
        return True

    def _step(self):
        """Compute on the current front; the front is consumed only if that succeeds."""
        const = self._const
        outs = self.compute(tuple(const[i] if i in const else q[0] for i, q in enumerate(self._inq)))
        for i, q in enumerate(self._inq):
            if i not in const:
                q.popleft()
        return outs

    def _exhausted(self):
        const = self._const
        for i, q in enumerate(self._inq):
            if self._ended[i] and not q and i not in const:
                return True
        return False

    def _drain(self, pushing):
        while not self._finished and self._front_ready():
            outs = self._step()
            if outs:
                self._emit(outs, pushing)
            if self._stop:
                self._finish(pushing)
                return
        if not self._finished and self._exhausted():
            self._finish(pushing)

    def _emit(self, outs, pushing):
        sinks = self._sinks
        outq = self._outq
        for out in outs:
            for j, v in enumerate(out):
                s = sinks[j]
                if pushing and s is not None:
                    s[0]._push(s[1], v)
                else:
                    outq[j].append(v)

    def _push_end(self, i):
        if self._ended[i]:
            return
        self._ended[i] = True
        if self._finished:
            return
        if not self._inq[i]:
            self._finish(True)

    def _finish(self, pushing):
        if self._finished:
            return
        self._finished = True
        outs = self.on_end()
        if outs:
            self._emit(outs, pushing)
        if pushing:
            for s in self._sinks:
                if s is not None:
                    s[0]._push_end(s[1])

    def request_finish(self):
        """Called from :meth:`compute` to declare the output trace complete."""
        self._stop = True

    # -- pull mode ------------------------------------------------------

    def pull_soft(self, j: int = 0):
        """One attempt at producing an event on output ``j``.

        Returns ``(PullStatus, event or None)``.
        """
        self._check_mode(j, "soft")
        prev = self._enter()
        try:
            return self._pull_soft(j)
        finally:
            self._owner = prev

    def pull_hard(self, j: int = 0):
        """Pull until an event is produced (returned) or the trace ends (None)."""
        self._check_mode(j, "hard")
        prev = self._enter()
        try:
            return self._pull_hard(j)
        finally:
            self._owner = prev

    def pull_all(self, j: int = 0) -> list:
        out = []
        self._check_mode(j, "hard")
        prev = self._enter()
        try:
            while True:
                st, e = self._pull_soft(j)
                if st is YES:
                    out.append(e)
                elif st is NO:
                    return out
        finally:
            self._owner = prev

    def _pull_hard(self, j):
        while True:
            st, e = self._pull_soft(j)
            if st is YES:
                return e
            if st is NO:
                return None

    def _check_mode(self, j, mode):
        if not 0 <= j < self.output_arity:
            raise PipeConnectionError(f"{self.name()} has no output pipe {j}")
        seen = self._pull_modes.setdefault(j, mode)
        if seen != mode:
            raise PullModeError(
                f"output {j} of {self.name()} already used with {seen} pulls; "
                f"mixing soft and hard pulls is not supported")

    def _pull_soft(self, j):
        q = self._outq[j]
        if q:
            return YES, q.popleft()
        if self._finished:
            return NO, None
        if self.input_arity == 0:
            outs = self.compute(())
            if outs:
                self._emit(outs, False)
            if self._stop:
                self._finish(False)
        else:
            const = self._const
            for i, iq in enumerate(self._inq):
                if iq or self._ended[i] or i in const:
                    continue
                src = self._sources[i]
                if src is None:
                    raise PullModeError(f"input {i} of {self.name()} is not connected")
                st, e = src[0]._pull_soft(src[1])
                if st is YES:
                    iq.append(e)
                elif st is NO:
                    self._ended[i] = True
            if self._front_ready():
                outs = self._step()
                if outs:
                    self._emit(outs, False)
                if self._stop or self._exhausted():
                    self._finish(False)
            elif self._exhausted():
                self._finish(False)
        if q:
            return YES, q.popleft()
        if self._finished:
            return NO, None
        return MAYBE, None

    # -- misc -----------------------------------------------------------

    def _enter(self):
        me = threading.get_ident()
        prev = self._owner
        if prev is not None and prev != me:
            raise ConcurrencyError(f"{self.name()} is in use by another thread")
        self._owner = me
        return prev

    def take_output(self, j: int = 0) -> list:
        """Remove and return events buffered on an unconnected output."""
        q = self._outq[j]
        out = list(q)
        q.clear()
        return out

    def queue_size(self, i: int) -> int:
        return len(self._inq[i])

    @property
    def finished(self) -> bool:
        return self._finished

    def duplicate(self) -> "Processor":
        """Fresh copy: same configuration, empty queues, reset state, copied context."""
        c = copy.copy(self)
        c._init_plumbing()
        c._owner = None
        c.context = copy.deepcopy(self.context)
        c.id = next(_ids)
        c._duplicate_parts()
        c.reset()
        return c

    def set_context(self, name: str, value) -> None:
        self.context[name] = value
        for ch in self._children():
            ch.set_context(name, value)

    def replay(self, events: Iterable) -> list:
        """Outputs of a fresh 1:1 copy fed ``events`` (no end-of-trace)."""
        d = self.duplicate()
        for e in events:
            d._push(0, e)
            if d._finished:
                break
        return d.take_output(0)

    def name(self) -> str:
        return f"{type(self).__name__}#{self.id}"

    def __repr__(self):
        return f"<{self.name()} {self.input_arity}:{self.output_arity}>"


def _kinds_at(kinds, k):
    if kinds is None:
        return None
    return kinds[k]


def connect(up: Processor, out_index: int, down: Processor, in_index: int = 0):
    """Connect output ``out_index`` of ``up`` to input ``in_index`` of ``down``.

    Returns ``down`` so chains read left to right.
    """
    if not 0 <= out_index < up.output_arity:
        raise PipeConnectionError(
            f"{up.name()} has no output {out_index} (arity {up.output_arity})")
    if not 0 <= in_index < down.input_arity:
        raise PipeConnectionError(
            f"{down.name()} has no input {in_index} (arity {down.input_arity})")
    if down._sources[in_index] is not None:
        raise PipeConnectionError(f"input {in_index} of {down.name()} is already connected")
    if up._sinks[out_index] is not None:
        raise PipeConnectionError(
            f"output {out_index} of {up.name()} is already connected; use a Fork")
    sp, sj = up._resolve_out(out_index)
    dp, di = down._resolve_in(in_index)
    produced = _kinds_at(sp.output_kinds, sj)
    accepted = _kinds_at(dp.input_kinds, di)
    if produced is not None and accepted is not None and not (set(produced) & set(accepted)):
        raise PipeConnectionError(
            f"type mismatch: {sp.name()} emits {sorted(produced)} but "
            f"{dp.name()} accepts {sorted(accepted)}")
    if dp._sources[di] is not None and dp is not down:
        raise PipeConnectionError(f"input {di} of {dp.name()} is already connected")
    up._sinks[out_index] = (down, in_index)
    down._sources[in_index] = (up, out_index)
    if sp is not up:
        sp._sinks[sj] = (dp, di)
    if dp is not down:
        dp._sources[di] = (sp, sj)
    if isinstance(sp, ConstantSource):
        dp._mark_const(di, sp.value)
    return down


def chain(*procs: Processor) -> Processor:
    """Connect 1:1 processors in sequence and return the last one."""
    for a, b in zip(procs, procs[1:]):
        connect(a, 0, b, 0)
    return procs[-1]


# -- sources and sinks ----------------------------------------------------


class ListSource(Processor):
    """Emits a finite list of events, then ends."""

    input_arity = 0

    def __init__(self, events: Iterable = ()):
        super().__init__()
        self.events = list(events)
        self._pos = 0

    def reset(self):
        self._pos = 0

    def compute(self, front):
        if self._pos >= len(self.events):
            self.request_finish()
            return []
        e = self.events[self._pos]
        self._pos += 1
        return [(e,)]

    def push_all(self) -> None:
        """Drive the pipeline in push mode with every remaining event."""
        prev = self._enter()
        try:
            sink = self._sinks[0]
            if sink is None:
                self._outq[0].extend(self.events[self._pos:])
            else:
                p, k = sink
                for e in self.events[self._pos:]:
                    p._push(k, e)
            self._pos = len(self.events)
            self._finish(True)
        finally:
            self._owner = prev


class IterSource(Processor):
    """Lazily emits events from an iterable (consumed once)."""

    input_arity = 0

    def __init__(self, iterable: Iterable):
        super().__init__()
        self._it = iter(iterable)

    def compute(self, front):
        for e in self._it:
            return [(e,)]
        self.request_finish()
        return []

    def push_all(self) -> None:
        prev = self._enter()
        try:
            s = self._sinks[0]
            if s is None:
                self._outq[0].extend(self._it)
            else:
                p, k = s
                push = p._push
                for e in self._it:
                    push(k, e)
            self._finish(True)
        finally:
            self._owner = prev


class ConstantSource(Processor):
    """Infinite trace repeating one value.

    Connected inputs are marked constant-fed: they never block a front and
    never trigger one on their own.
    """

    input_arity = 0

    def __init__(self, value):
        super().__init__()
        self.value = value

    def compute(self, front):
        return [(self.value,)]


class CollectSink(Processor):
    """Terminal processor storing every event it receives."""

    output_arity = 0

    def __init__(self):
        super().__init__()
        self.events: list = []
        self.ended = False

    def reset(self):
        self.events = []
        self.ended = False

    def compute(self, front):
        self.events.append(front[0])
        return []

    def on_end(self):
        self.ended = True
        return []


class CallbackSink(Processor):
    output_arity = 0

    def __init__(self, fn):
        super().__init__()
        self.fn = fn

    def compute(self, front):
        self.fn(front[0])
        return []


# -- groups ---------------------------------------------------------------


class GroupProcessor(Processor):
    """A sub-graph of processors presented as a single processor.

    Group pipes are transparent: connecting to a group wires straight into
    the inner processor. An input used by several inner pipes is fanned out
    through a fork created on demand.
    """

    def __init__(self, input_arity=1, output_arity=1):
        super().__init__(input_arity, output_arity)
        self._procs: list[Processor] = []
        self._targets: list[list] = [[] for _ in range(self.input_arity)]
        self._out_map: list = [None] * self.output_arity
        self._entries: list = [None] * self.input_arity

    def add(self, *procs: Processor) -> "GroupProcessor":
        for p in procs:
            if p not in self._procs:
                self._procs.append(p)
        return self

    def associate_input(self, i: int, proc: Processor, k: int = 0) -> None:
        if self._entries[i] is not None:
            raise PipeConnectionError(f"group input {i} is already in use")
        self.add(proc)
        self._targets[i].append((proc, k))

    def associate_output(self, j: int, proc: Processor, k: int = 0) -> None:
        self.add(proc)
        self._out_map[j] = (proc, k)

    def _entry(self, i):
        ent = self._entries[i]
        if ent is None:
            ts = self._targets[i]
            if not ts:
                raise PipeConnectionError(f"group input {i} is not associated")
            if len(ts) == 1:
                ent = ts[0]
            else:
                from .basic import Fork
                f = Fork(len(ts))
                for j, (p, k) in enumerate(ts):
                    connect(f, j, p, k)
                ent = (f, 0)
            self._entries[i] = ent
        return ent

    def _resolve_in(self, i):
        p, k = self._entry(i)
        return p._resolve_in(k)

    def _resolve_out(self, j):
        if self._out_map[j] is None:
            raise PipeConnectionError(f"group output {j} is not associated")
        p, k = self._out_map[j]
        return p._resolve_out(k)

    def _mark_const(self, i, value):
        raise AssertionError("unreachable: groups resolve to inner processors")

    def _push(self, i, e):
        p, k = self._resolve_in(i)
        p._push(k, e)

    def _push_end(self, i):
        p, k = self._resolve_in(i)
        p._push_end(k)

    def _pull_soft(self, j):
        p, k = self._resolve_out(j)
        return p._pull_soft(k)

    def take_output(self, j=0):
        p, k = self._resolve_out(j)
        return p.take_output(k)

    def queue_size(self, i):
        p, k = self._resolve_in(i)
        return p.queue_size(k)

    @property
    def finished(self):
        return all(self._resolve_out(j)[0].finished for j in range(self.output_arity))

    def _children(self):
        return list(self._procs)

    def _duplicate_parts(self):
        olds = self._procs
        news = [p.duplicate() for p in olds]
        idx = {id(p): n for n, p in enumerate(olds)}
        for p, np_ in zip(olds, news):
            for j, s in enumerate(p._sinks):
                if s is not None and id(s[0]) in idx:
                    connect(np_, j, news[idx[id(s[0])]], s[1])
        self._procs = news
        self._targets = [[(news[idx[id(p)]], k) for p, k in ts] for ts in self._targets]
        self._out_map = [None if o is None else (news[idx[id(o[0])]], o[1]) for o in self._out_map]
        self._entries = [None] * self.input_arity

    def linear_chain(self) -> list | None:
        """Inner processors in order when the group is a plain 1:1 chain."""
        if self.input_arity != 1 or self.output_arity != 1 or len(self._targets[0]) != 1:
            return None
        p, k = self._targets[0][0]
        end = self._out_map[0]
        seq = []
        while True:
            if p.input_arity != 1 or p.output_arity != 1 or k != 0:
                return None
            seq.append(p)
            if end is not None and end[0] is p:
                break
            s = p._sinks[0]
            if s is None:
                return None
            p, k = s
        return seq if len(seq) == len(self._procs) else None

    def replay(self, events):
        seq = self.linear_chain()
        if seq is None:
            return super().replay(events)
        out = list(events)
        for p in seq:
            out = p.replay(out)
        return out


def run_push(proc: Processor, *traces: Iterable) -> list:
    """Push one trace per input of a 1-output ``proc``, end them, return the output.

    Traces are pushed round-robin so multi-input processors see interleaved
    arrivals.
    """
    its = [list(t) for t in traces]
    if len(its) != proc.input_arity:
        raise PipeConnectionError(f"{proc.name()} expects {proc.input_arity} traces")
    n = max((len(t) for t in its), default=0)
    for pos in range(n):
        for i, t in enumerate(its):
            if pos < len(t):
                proc.push(i, t[pos])
    proc.push_end()
    return proc.take_output(0)


def run_pull(proc: Processor, *traces: Iterable) -> list:
    """Feed ``proc`` from list sources and hard-pull until the output ends."""
    for i, t in enumerate(traces):
        connect(ListSource(t), 0, proc, i)
    return proc.pull_all(0)
