"""Streaming lexer and recursive-descent parser.

The parser is generic over a :class:`Semantics`: it never builds a tree, it
calls the semantic action of each production as soon as the production is
complete. It is written as a generator that yields ``NEED_INPUT`` whenever
the lexer runs dry, so the same code serves whole files, lazily read line
iterators and the line-at-a-time REPL.

Grammar::

    program := fundecl* exp EOF
    fundecl := LET FUN IDENT ( params ) = exp IN
    exp     := exp + term | term
    term    := INT | IDENT | IDENT ( args ) | ( exp )
             | LET IDENT = exp IN exp
             | LET FUN IDENT ( params ) = exp IN exp

``;;`` ends a program; in file mode end of input does too.
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Optional, Union

from .errors import FxError, LexError, ParseError
from .events import Event, EventLog


@dataclass(frozen=True, order=True)
class SourcePos:
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class TK(enum.Enum):
    INT = "integer"
    IDENT = "identifier"
    PLUS = "+"
    LPAREN = "("
    RPAREN = ")"
    LET = "let"
    FUN = "fun"
    EQ = "="
    IN = "in"
    COMMA = ","
    EOF = "end of input"


KEYWORDS = {"let": TK.LET, "fun": TK.FUN, "in": TK.IN}
_PUNCT = {"+": TK.PLUS, "(": TK.LPAREN, ")": TK.RPAREN, "=": TK.EQ, ",": TK.COMMA}
_WHITESPACE = " \t\r\n"


def _ident_start(c: str) -> bool:
    return c == "_" or ("a" <= c <= "z") or ("A" <= c <= "Z")


def _ident_char(c: str) -> bool:
    return _ident_start(c) or ("0" <= c <= "9")


@dataclass(frozen=True)
class Token:
    kind: TK
    pos: SourcePos
    value: Union[int, str, None] = None

    @property
    def text(self) -> str:
        if self.kind is TK.INT:
            return str(self.value)
        if self.kind is TK.IDENT:
            return self.value
        if self.kind is TK.EOF:
            return ""
        return self.kind.value

    def describe(self) -> str:
        return "end of input" if self.kind is TK.EOF else self.text


class Lexer:
    """Incremental tokenizer.

    Text arrives through :meth:`feed`; :meth:`next_token` returns ``None``
    when it cannot decide the next token without more characters. It looks
    at most one character past the end of the current token.
    """

    def __init__(self, text: str = "", line: int = 1, column: int = 1):
        self._buf = text
        self._i = 0
        self._line = line
        self._col = column
        self.closed = False
        self.finished = False

    def feed(self, text: str) -> None:
        if self._i:
            self._buf = self._buf[self._i:]
            self._i = 0
        self._buf += text

    def close(self) -> None:
        self.closed = True

    @property
    def position(self) -> SourcePos:
        return SourcePos(self._line, self._col)

    def remainder(self) -> str:
        rest = self._buf[self._i:]
        self._buf, self._i = "", 0
        return rest

    def _advance(self, n: int) -> None:
        for c in self._buf[self._i:self._i + n]:
            if c == "\n":
                self._line += 1
                self._col = 1
            else:
                self._col += 1
        self._i += n

    def _scan(self, start: int, pred) -> Optional[int]:
        """End index of the run matching ``pred``, or None if it may continue."""
        j = start
        buf = self._buf
        while j < len(buf) and pred(buf[j]):
            j += 1
        if j == len(buf) and not self.closed:
            return None
        return j

    def next_token(self) -> Optional[Token]:
        if self.finished:
            return Token(TK.EOF, self.position)
        buf = self._buf
        while self._i < len(buf) and buf[self._i] in _WHITESPACE:
            self._advance(1)
        pos = self.position
        i = self._i
        if i == len(buf):
            if self.closed:
                self.finished = True
                return Token(TK.EOF, pos)
            return None
        c = buf[i]
        if "0" <= c <= "9":
            j = self._scan(i, lambda ch: "0" <= ch <= "9")
            if j is None:
                return None
            if j < len(buf) and _ident_start(buf[j]):
                end = self._scan(j, _ident_char)
                if end is None:
                    return None
                raise LexError(f"Invalid literal {buf[i:end]}", pos)
            self._advance(j - i)
            return Token(TK.INT, pos, int(buf[i:j]))
        if _ident_start(c):
            j = self._scan(i, _ident_char)
            if j is None:
                return None
            word = buf[i:j]
            self._advance(j - i)
            kind = KEYWORDS.get(word)
            if kind is not None:
                return Token(kind, pos)
            return Token(TK.IDENT, pos, word)
        if c in _PUNCT:
            self._advance(1)
            return Token(_PUNCT[c], pos)
        if c == ";":
            if i + 1 == len(buf) and not self.closed:
                return None
            if i + 1 < len(buf) and buf[i + 1] == ";":
                self._advance(2)
                self.finished = True
                return Token(TK.EOF, pos)
        raise LexError(f"Unexpected character {c!r}", pos)


def _chunks(source: Union[str, Iterable[str]]) -> Iterator[str]:
    if isinstance(source, str):
        return iter([source])
    return iter(source)


def lex(source: Union[str, Iterable[str]]) -> Iterator[Token]:
    """Tokens of ``source`` (a string or an iterable of text chunks), ending in EOF."""
    lexer = Lexer()
    chunks = _chunks(source)
    while True:
        tok = lexer.next_token()
        if tok is None:
            chunk = next(chunks, None)
            if chunk is None:
                lexer.close()
            else:
                lexer.feed(chunk)
            continue
        yield tok
        if tok.kind is TK.EOF:
            return


class Semantics(abc.ABC):
    """The abstract syntax of the language, as a set of semantic actions.

    ``repr``, ``fundecl``, ``defns``, ``topform`` and ``obs`` are whatever the
    implementation chooses; the parser only passes them around.
    """

    @abc.abstractmethod
    def int(self, n: int): ...

    @abc.abstractmethod
    def add(self, x, y): ...

    @abc.abstractmethod
    def var(self, name: str): ...

    @abc.abstractmethod
    def let_(self, name: str, bound, body): ...

    @abc.abstractmethod
    def call(self, name: str, args: list): ...

    @abc.abstractmethod
    def defun(self, name: str, params: list[str], body): ...

    @abc.abstractmethod
    def defn_empty(self): ...

    @abc.abstractmethod
    def defn_add(self, defns, decl): ...

    @abc.abstractmethod
    def let_fun(self, decl, body):
        """A function declaration nested inside an expression."""

    @abc.abstractmethod
    def top_exp(self, defns, body): ...

    @abc.abstractmethod
    def topf_observe(self, top): ...

    def observe(self, x):
        return self.topf_observe(self.top_exp(self.defn_empty(), x))


NEED_INPUT = object()
_NOTHING = object()


class Parser:
    """One program's worth of parsing. :meth:`program` is a generator."""

    def __init__(self, lexer: Lexer, sem: Semantics, events: Optional[EventLog] = None):
        self._lexer = lexer
        self._sem = sem
        self._events = events
        self._la: Optional[Token] = None
        self.pulled = 0

    def _peek(self):
        while self._la is None:
            tok = self._lexer.next_token()
            if tok is None:
                yield NEED_INPUT
                continue
            self._la = tok
            self.pulled += 1
            if self._events is not None:
                self._events.token(tok)
        return self._la

    def _take(self):
        tok = yield from self._peek()
        self._la = None
        return tok

    def _expect(self, kind: TK, what: str):
        tok = yield from self._take()
        if tok.kind is not kind:
            raise ParseError(f"Expected {what}, found {tok.describe()}", tok.pos)
        return tok

    def program(self):
        sem = self._sem
        defns = sem.defn_empty()
        first = _NOTHING
        while (yield from self._peek()).kind is TK.LET:
            yield from self._take()
            if (yield from self._peek()).kind is TK.FUN:
                yield from self._take()
                decl = yield from self._fundecl()
                defns = sem.defn_add(defns, decl)
                continue
            first = yield from self._let_rest()
            break
        body = yield from self._exp(first)
        tok = yield from self._take()
        if tok.kind is not TK.EOF:
            raise ParseError(f"Expected end of program, found {tok.describe()}", tok.pos)
        return sem.topf_observe(sem.top_exp(defns, body))

    def _fundecl(self):
        # LET FUN already consumed; consumes through IN
        name = (yield from self._expect(TK.IDENT, "function name")).value
        yield from self._expect(TK.LPAREN, "'('")
        params: list[str] = []
        if (yield from self._peek()).kind is not TK.RPAREN:
            while True:
                tok = yield from self._expect(TK.IDENT, "parameter name")
                if tok.value in params:
                    raise ParseError(f"Duplicate parameter {tok.value}", tok.pos)
                params.append(tok.value)
                if (yield from self._peek()).kind is not TK.COMMA:
                    break
                yield from self._take()
        yield from self._expect(TK.RPAREN, "')'")
        yield from self._expect(TK.EQ, "'='")
        body = yield from self._exp()
        yield from self._expect(TK.IN, "'in'")
        return self._sem.defun(name, params, body)

    def _exp(self, first=_NOTHING):
        left = (yield from self._term()) if first is _NOTHING else first
        while (yield from self._peek()).kind is TK.PLUS:
            yield from self._take()
            right = yield from self._term()
            left = self._sem.add(left, right)
        return left

    def _let_rest(self):
        # LET already consumed, and it is not followed by FUN
        name = (yield from self._expect(TK.IDENT, "variable name")).value
        yield from self._expect(TK.EQ, "'='")
        bound = yield from self._exp()
        yield from self._expect(TK.IN, "'in'")
        body = yield from self._exp()
        return self._sem.let_(name, bound, body)

    def _term(self):
        sem = self._sem
        tok = yield from self._take()
        kind = tok.kind
        if kind is TK.INT:
            return sem.int(tok.value)
        if kind is TK.IDENT:
            if (yield from self._peek()).kind is not TK.LPAREN:
                return sem.var(tok.value)
            yield from self._take()
            args = []
            if (yield from self._peek()).kind is not TK.RPAREN:
                while True:
                    args.append((yield from self._exp()))
                    if (yield from self._peek()).kind is not TK.COMMA:
                        break
                    yield from self._take()
            yield from self._expect(TK.RPAREN, "')'")
            return sem.call(tok.value, args)
        if kind is TK.LPAREN:
            e = yield from self._exp()
            yield from self._expect(TK.RPAREN, "')'")
            return e
        if kind is TK.LET:
            if (yield from self._peek()).kind is TK.FUN:
                yield from self._take()
                decl = yield from self._fundecl()
                body = yield from self._exp()
                return sem.let_fun(decl, body)
            return (yield from self._let_rest())
        raise ParseError(f"Expected expression, found {tok.describe()}", tok.pos)


def _drive(gen, lexer: Lexer, chunks: Iterator[str]):
    try:
        while True:
            gen.send(None)
            chunk = next(chunks, None)
            if chunk is None:
                lexer.close()
            else:
                lexer.feed(chunk)
    except StopIteration as stop:
        return stop.value


def parse_program(
    source: Union[str, Iterable[str]],
    sem: Semantics,
    events: Optional[EventLog] = None,
):
    """Parse one program, firing ``sem``'s actions eagerly; return its observation.

    ``source`` may be a lazy iterable of chunks (e.g. file lines): a chunk is
    only requested once everything before it has been consumed.
    """
    lexer = Lexer()
    gen = Parser(lexer, sem, events).program()
    return _drive(gen, lexer, _chunks(source))


class Repl:
    """Feeds a session line by line; a program ends at ``;;`` or end of stream.

    ``make_semantics(events)`` builds a fresh semantics for every program. An
    error discards the rest of the current program, up to the next ``;;``.
    """

    def __init__(self, make_semantics: Callable[[EventLog], Semantics], events: Optional[EventLog] = None):
        self.events = events if events is not None else EventLog()
        self._make = make_semantics
        self._lexer: Optional[Lexer] = None
        self._gen = None
        self._skipping = False
        self._line = 0
        self.results: list[Any] = []
        self.errors: list[FxError] = []

    @property
    def busy(self) -> bool:
        """True while a program is partially entered."""
        return self._gen is not None

    def feed(self, line: str) -> list[Event]:
        start = len(self.events)
        self._line += 1
        if not line.endswith("\n"):
            line += "\n"
        self._push(line, self._line)
        return list(self.events[start:])

    def close(self) -> list[Event]:
        start = len(self.events)
        if self._gen is not None:
            self._lexer.close()
            self._resume()
        return list(self.events[start:])

    def _push(self, text: str, line: int, column: int = 1) -> None:
        pending: Optional[str] = text
        while pending:
            if self._skipping:
                idx = pending.find(";;")
                if idx < 0:
                    return
                column += idx + 2
                pending = pending[idx + 2:]
                self._skipping = False
            if self._gen is None:
                if not pending.strip():
                    return
                self._lexer = Lexer(line=line, column=column)
                sem = self._make(self.events)
                self._gen = Parser(self._lexer, sem, self.events).program()
            self._lexer.feed(pending)
            pending = None
            if self._resume():
                pos = self._lexer.position
                pending = self._lexer.remainder()
                line, column = pos.line, pos.column
                self._lexer = None

    def _resume(self) -> bool:
        """Run the parser until it needs input. True when the program ended."""
        try:
            self._gen.send(None)
            return False
        except StopIteration as stop:
            self.results.append(stop.value)
            self._gen = None
            return True
        except FxError as err:
            self.events.error(err)
            self.errors.append(err)
            self._gen = None
            if not self._lexer.finished:
                self._skipping = True
            return True


def parse_repl_line(state: Optional[Repl], line: str, sem: Callable[[EventLog], Semantics]):
    """Functional face of :class:`Repl`: returns ``(state, events)``."""
    if state is None:
        state = Repl(sem)
    return state, state.feed(line)
