"""Interpreters over the integers.

* :class:`DeskSemantics` evaluates while parsing, like a desk calculator, and
  knows nothing about variables.
* :class:`EnvSemantics` is the textbook environment-passing interpreter. It
  builds closures and only computes once the initial environment is supplied
  at the end of the program.
* :class:`EffSemantics` treats variables as questions. Anything that does not
  depend on an unknown variable is computed on the spot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional, Union

from .errors import UnboundName, UnsupportedConstruct, check_arity
from .events import EventLog
from .syntax import Semantics, parse_program
from .varfx import NS, Answer, QName, Question, ans, handle, letv, lift, lift2, sequence, top_hand, var

Env = tuple  # ((QName, value), ...), innermost binding first


def desk_int(n: int) -> int:
    return n


def desk_add(events: Optional[EventLog], x: int, y: int) -> int:
    s = x + y
    if events is not None:
        events.intermediate(s)
    return s


def env_lookup(env: Env, q: QName):
    for name, value in env:
        if name == q:
            return value
    raise UnboundName(q)


@dataclass(frozen=True)
class FunDecl:
    name: str
    params: tuple
    body: Any


class DeskSemantics(Semantics):
    def __init__(self, events: Optional[EventLog] = None):
        self.events = events if events is not None else EventLog()

    def int(self, n):
        return desk_int(n)

    def add(self, x, y):
        return desk_add(self.events, x, y)

    def var(self, name):
        raise UnboundName(QName.var(name))

    def let_(self, name, bound, body):
        raise UnsupportedConstruct("let is not supported by the int semantics")

    def call(self, name, args):
        raise UnboundName(QName.fun(name))

    def defun(self, name, params, body):
        raise UnsupportedConstruct("functions are not supported by the int semantics")

    def defn_empty(self):
        return ()

    def defn_add(self, defns, decl):
        raise UnsupportedConstruct("functions are not supported by the int semantics")

    def let_fun(self, decl, body):
        raise UnsupportedConstruct("functions are not supported by the int semantics")

    def top_exp(self, defns, body):
        return body

    def topf_observe(self, top):
        self.events.result(str(top), top)
        return top


@dataclass(frozen=True)
class EnvClosure:
    decl: FunDecl
    env: Env


class EnvSemantics(Semantics):
    """repr = Env -> int."""

    def __init__(self, events: Optional[EventLog] = None):
        self.events = events if events is not None else EventLog()

    def ans(self, v):
        return lambda _env: v

    def lift2(self, op, e1, e2):
        return lambda env: op(e1(env), e2(env))

    def int(self, n):
        return self.ans(desk_int(n))

    def add(self, x, y):
        return self.lift2(lambda a, b: desk_add(self.events, a, b), x, y)

    def var(self, name):
        q = QName.var(name)
        return lambda env: env_lookup(env, q)

    def let_(self, name, bound, body):
        q = QName.var(name)
        return lambda env: body(((q, bound(env)),) + env)

    def call(self, name, args):
        q = QName.fun(name)

        def run(env):
            clo = env_lookup(env, q)
            params = clo.decl.params
            check_arity(name, len(params), len(args))
            values = [a(env) for a in args]
            frame = tuple((QName.var(p), v) for p, v in zip(params, values))
            return clo.decl.body(frame[::-1] + clo.env)

        return run

    def defun(self, name, params, body):
        return FunDecl(name, tuple(params), body)

    def defn_empty(self):
        return ()

    def defn_add(self, defns, decl):
        return defns + (decl,)

    def _bind_fun(self, decl, env):
        return ((QName.fun(decl.name), EnvClosure(decl, env)),) + env

    def let_fun(self, decl, body):
        return lambda env: body(self._bind_fun(decl, env))

    def top_exp(self, defns, body):
        def run(env):
            for decl in defns:
                env = self._bind_fun(decl, env)
            return body(env)

        return run

    def topf_observe(self, top):
        value = top(())
        self.events.result(str(value), value)
        return value


class Closure:
    """A function of the effect interpreter.

    Free names of the body were asked about at the definition site and their
    answers are kept in ``captured``; a call only answers the parameters.
    """

    def __init__(self, name: str, params: tuple, body, captured: dict):
        self.name = name
        self.params = params
        self.body = body
        self.captured = captured

    @property
    def arity(self) -> int:
        return len(self.params)

    def apply(self, values) -> Any:
        env = dict(self.captured)
        env.update(zip((QName.var(p) for p in self.params), values))
        return top_hand(handle(ans, env.get, self.body))

    def __repr__(self):
        return f"<closure {self.name}/{self.arity}>"


class EffSemantics(Semantics):
    """repr = Denot[int]; let is a handler for its own variable."""

    def __init__(self, events: Optional[EventLog] = None):
        self.events = events if events is not None else EventLog()

    def _add(self, a, b):
        return desk_add(self.events, a, b)

    def int(self, n):
        return ans(desk_int(n))

    def add(self, x, y):
        return lift2(self._add, x, y)

    def var(self, name):
        return var(QName.var(name))

    def let_(self, name, bound, body):
        q = QName.var(name)
        return lift(lambda v: letv(q, v, body), bound)

    def call(self, name, args):
        n = len(args)

        def invoke(clo):
            check_arity(name, clo.arity, n)
            return lift(lambda values: ans(clo.apply(values)), sequence(args))

        return lift(invoke, var(QName.fun(name)))

    def defun(self, name, params, body):
        return FunDecl(name, tuple(params), self._close(name, tuple(params), body))

    def _close(self, name, params, body):
        # Walk the body with placeholder arguments, asking the definition site
        # about every other name. The question sequence of a body does not
        # depend on argument values, so the walk finds all of them.
        pset = {QName.var(p) for p in params}

        def step(e, captured):
            while isinstance(e, Question):
                q = e.name
                if q in pset:
                    e = e.resume(0)
                elif q in captured:
                    e = e.resume(captured[q])
                else:
                    k = e.resume
                    return Question(q, lambda v, q=q, k=k: resume(k, v, {**captured, q: v}))
            return ans(Closure(name, params, body, captured))

        def resume(k, v, captured):
            with self.events.muted():
                return step(k(v), captured)

        with self.events.muted():
            return step(body, {})

    def defn_empty(self):
        return {}

    def defn_add(self, defns, decl):
        closure = top_hand(handle(ans, defns.get, decl.body))
        return {**defns, QName.fun(decl.name): closure}

    def let_fun(self, decl, body):
        q = QName.fun(decl.name)
        return lift(lambda clo: letv(q, clo, body), decl.body)

    def top_exp(self, defns, body):
        return handle(ans, defns.get, body)

    def topf_observe(self, top):
        value = top_hand(top)
        self.events.result(str(value), value)
        return value


SEMANTICS = {
    "int": DeskSemantics,
    "env": EnvSemantics,
    "eff": EffSemantics,
}


def evaluate(source, semantics: str = "eff", events: Optional[EventLog] = None) -> int:
    """Run ``source`` under one of the integer semantics and return its value."""
    events = events if events is not None else EventLog()
    return parse_program(source, SEMANTICS[semantics](events), events)
