"""Free variables as a reader effect.

A denotation is either an :class:`Answer` carrying a domain value, or a
:class:`Question` asking for the value of a name together with the
continuation to resume once somebody answers. Binding forms are handlers:
they answer the questions about their own name and pass the rest upwards.

Continuations are stored as queues of Kleisli arrows (:class:`Cont`) rather
than nested closures, so resuming a long chain of questions, such as the one
produced by ``x + x + ... + x``, runs in constant Python stack depth.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Union

from .errors import UnboundName


class NS(enum.Enum):
    VAR = "Variable"
    FUN = "Function"


@dataclass(frozen=True)
class QName:
    """A name being asked about. Variables and functions never collide."""

    ns: NS
    name: str

    @classmethod
    def var(cls, name: str) -> "QName":
        return cls(NS.VAR, name)

    @classmethod
    def fun(cls, name: str) -> "QName":
        return cls(NS.FUN, name)

    def __str__(self):
        return self.name


class Cont:
    """Continuation of a question, callable as ``value -> Denot``."""

    __slots__ = ()

    def then(self, fn: Callable[[Any], "Denot"]) -> "Cont":
        return _Then(self, _Leaf(fn))

    def __call__(self, value) -> "Denot":
        return _resume(self, value)


class _Leaf(Cont):
    __slots__ = ("fn",)

    def __init__(self, fn):
        self.fn = fn


class _Then(Cont):
    __slots__ = ("first", "second")

    def __init__(self, first: Cont, second: Cont):
        self.first = first
        self.second = second


def _resume(k: Cont, value) -> "Denot":
    while True:
        # rotate left-nested queues so the next arrow sits at the front
        while isinstance(k, _Then) and isinstance(k.first, _Then):
            k = _Then(k.first.first, _Then(k.first.second, k.second))
        if isinstance(k, _Then):
            fn, rest = k.first.fn, k.second
        else:
            fn, rest = k.fn, None
        d = fn(value)
        if rest is None:
            return d
        if isinstance(d, Answer):
            value = d.value
            k = rest
            continue
        return Question(d.name, _Then(d.resume, rest))


@dataclass(frozen=True)
class Answer:
    value: Any


@dataclass(frozen=True, eq=False)
class Question:
    name: QName
    resume: Cont

    def __post_init__(self):
        if not isinstance(self.resume, Cont):
            object.__setattr__(self, "resume", _Leaf(self.resume))

    def __repr__(self):
        return f"Question({self.name.ns.name}:{self.name.name})"


Denot = Union[Answer, Question]


def ans(v) -> Answer:
    return Answer(v)


def var(n: QName) -> Question:
    return Question(n, _Leaf(ans))


def lift(f: Callable[[Any], Denot], e: Denot) -> Denot:
    """Monadic bind: run ``f`` on the eventual answer of ``e``."""
    if isinstance(e, Answer):
        return f(e.value)
    return Question(e.name, e.resume.then(f))


def lift2(op: Callable[[Any, Any], Any], e1: Denot, e2: Denot) -> Denot:
    """Apply ``op`` as soon as both operands are answered.

    Questions of ``e1`` surface before those of ``e2``.
    """
    if isinstance(e1, Answer) and isinstance(e2, Answer):
        return Answer(op(e1.value, e2.value))
    return lift(lambda v1: lift(lambda v2: Answer(op(v1, v2)), e2), e1)


def sequence(es: Iterable[Denot]) -> Denot:
    """Collect the answers of ``es``, left to right, into a tuple."""
    acc: Denot = Answer(())
    for e in es:
        acc = lift2(lambda vs, v: vs + (v,), acc, e)
    return acc


def handle(
    ret: Callable[[Any], Denot],
    lookup: Callable[[QName], Optional[Any]],
    e: Denot,
    relay: Optional[Callable[[QName, Any], Any]] = None,
) -> Denot:
    """Fold over ``e``, answering the questions ``lookup`` knows about.

    ``lookup`` returns ``None`` for questions it does not handle; those are
    re-raised with a continuation that stays under this handler. When given,
    ``relay(name, value)`` rewrites answers that come back from outside before
    they reach ``e``.
    """
    while isinstance(e, Question):
        v = lookup(e.name)
        if v is None:
            return Question(e.name, _Leaf(_rewrap(ret, lookup, e, relay)))
        e = e.resume(v)
    return ret(e.value)


def _rewrap(ret, lookup, q: Question, relay):
    k = q.resume
    name = q.name
    if relay is None:
        return lambda v: handle(ret, lookup, k(v))
    return lambda v: handle(ret, lookup, k(relay(name, v)), relay)


def letv(n: QName, v, e: Denot) -> Denot:
    """Answer questions about ``n`` with ``v``; propagate all others."""
    return handle(ans, lambda m: v if m == n else None, e)


def top_hand(e: Denot):
    if isinstance(e, Answer):
        return e.value
    raise UnboundName(e.name)
