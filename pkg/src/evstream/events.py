"""Event values.

Events are plain Python values. The engine recognises a handful of kinds
(number, text, bool, troolean, tuple, collection) and treats everything
else as an opaque payload compared with ``==``.
"""
from __future__ import annotations

import enum
import math
from collections.abc import Mapping
from typing import Any, Iterator


class Troolean(enum.Enum):
    TRUE = "TRUE"
    FALSE = "FALSE"
    INCONCLUSIVE = "INCONCLUSIVE"

    def __str__(self) -> str:
        return self.value

    @property
    def symbol(self) -> str:
        return {"TRUE": "⊤", "FALSE": "⊥", "INCONCLUSIVE": "?"}[self.value]

    @classmethod
    def of(cls, v) -> "Troolean":
        """Coerce a bool or troolean into a troolean."""
        if isinstance(v, Troolean):
            return v
        if isinstance(v, bool):
            return cls.TRUE if v else cls.FALSE
        raise TypeError(f"not a truth value: {v!r}")


TT = Troolean.TRUE
FF = Troolean.FALSE
UNK = Troolean.INCONCLUSIVE


class _Wildcard:
    """Slice key meaning "every slice". Only one instance exists."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "#"

    def __reduce__(self):
        return (_Wildcard, ())

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


WILDCARD = _Wildcard()


class Tuple(Mapping):
    """Immutable named record. Iterates in declaration order; equality
    ignores attribute order."""

    __slots__ = ("_d", "_h")

    def __init__(self, data=(), **kw):
        d = dict(data)
        d.update(kw)
        self._d = d
        self._h = None

    def __getitem__(self, k):
        return self._d[k]

    def __iter__(self) -> Iterator[str]:
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __eq__(self, other):
        if not isinstance(other, Tuple):
            return NotImplemented
        if self._d.keys() != other._d.keys():
            return False
        return all(events_equal(v, other._d[k]) for k, v in self._d.items())

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._d.items()))
        return self._h

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self._d.items())
        return f"Tuple({inner})"

    def values_list(self) -> list:
        return list(self._d.values())


def kind_of(v: Any) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, (int, float)):
        return "number"
    if isinstance(v, str):
        return "text"
    if isinstance(v, Troolean):
        return "troolean"
    if isinstance(v, Tuple):
        return "tuple"
    if isinstance(v, list):
        return "collection"
    return "opaque"


def events_equal(a: Any, b: Any) -> bool:
    """Kind-aware equality: values of different kinds are never equal."""
    ka, kb = kind_of(a), kind_of(b)
    if ka != kb:
        return False
    if ka == "number":
        if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
            return True
        return a == b
    if ka == "collection":
        return len(a) == len(b) and all(events_equal(x, y) for x, y in zip(a, b))
    if ka == "opaque":
        return a is b or a == b
    return a == b


def traces_equal(xs, ys) -> bool:
    xs, ys = list(xs), list(ys)
    return len(xs) == len(ys) and all(events_equal(x, y) for x, y in zip(xs, ys))


def is_truth(v) -> bool:
    return isinstance(v, (bool, Troolean))
