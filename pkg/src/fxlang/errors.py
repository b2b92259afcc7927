"""Exceptions raised while lexing, parsing, evaluating or compiling."""

from __future__ import annotations


class FxError(Exception):
    """Base class for every user-visible error. ``pos`` is optional."""

    def __init__(self, message: str, pos=None):
        super().__init__(message)
        self.message = message
        self.pos = pos

    def __str__(self):
        return self.message

    def located(self) -> str:
        if self.pos is None:
            return self.message
        return f"line {self.pos.line}, column {self.pos.column}: {self.message}"


class LexError(FxError):
    pass


class ParseError(FxError):
    pass


class UnboundName(FxError):
    def __init__(self, qname, pos=None):
        super().__init__(f"{qname.ns.value} {qname.name} is unbound", pos)
        self.qname = qname


class ArityError(FxError):
    def __init__(self, name: str, expected: int, got: int):
        super().__init__(
            f"Function {name} requires {expected} arguments but was invoked with {got}"
        )
        self.name = name
        self.expected = expected
        self.got = got


class OpenFunctionBody(FxError):
    def __init__(self, name: str, variable: str):
        super().__init__(f"Function {name} refers to free variable {variable}")
        self.name = name
        self.variable = variable


class UnsupportedConstruct(FxError):
    pass


class InternalError(FxError):
    """A broken invariant inside the compiler, never the user's fault."""


def check_arity(name: str, expected: int, got: int) -> None:
    if expected != got:
        raise ArityError(name, expected, got)
