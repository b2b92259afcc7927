"""Incremental interpreter and Wasm compiler where free variables are effects."""

from .compile import CompileResult, WasmSemantics, compile_program
from .errors import ArityError, FxError, LexError, OpenFunctionBody, ParseError, UnboundName
from .events import Event, EventKind, EventLog, trace_dump
from .interp import DeskSemantics, EffSemantics, EnvSemantics, evaluate
from .syntax import Repl, lex, parse_program, parse_repl_line
from .wasm import emit, execute

__all__ = [
    "ArityError",
    "CompileResult",
    "DeskSemantics",
    "EffSemantics",
    "EnvSemantics",
    "Event",
    "EventKind",
    "EventLog",
    "FxError",
    "LexError",
    "OpenFunctionBody",
    "ParseError",
    "Repl",
    "UnboundName",
    "WasmSemantics",
    "compile_program",
    "emit",
    "evaluate",
    "execute",
    "lex",
    "parse_program",
    "parse_repl_line",
    "trace_dump",
]
