"""Observable timeline of a run: tokens pulled, values and code produced, errors."""

from __future__ import annotations

import enum
from collections.abc import Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional


class EventKind(enum.Enum):
    TOKEN = "TokenConsumed"
    INTERMEDIATE = "Intermediate"
    CODE = "CodeEmitted"
    ERROR = "ErrorReported"
    RESULT = "Result"


@dataclass(frozen=True)
class Event:
    seq: int
    kind: EventKind
    payload: str
    value: Any = None

    def format(self) -> str:
        return f"{self.seq} {self.kind.name} {self.payload}"


class EventLog(Sequence):
    """Append-only event log with strictly increasing sequence numbers.

    ``listener`` is called with each event as it is appended, which is how the
    REPL echoes output the moment it is produced.
    """

    def __init__(self, listener: Optional[Callable[[Event], None]] = None):
        self._events: list[Event] = []
        self._muted = 0
        self.listener = listener

    def __getitem__(self, index):
        return self._events[index]

    def __len__(self):
        return len(self._events)

    def emit(self, kind: EventKind, payload: str, value: Any = None) -> Optional[Event]:
        if self._muted:
            return None
        event = Event(len(self._events) + 1, kind, payload, value)
        self._events.append(event)
        if self.listener is not None:
            self.listener(event)
        return event

    @contextmanager
    def muted(self):
        """Drop events emitted inside the block (speculative evaluation)."""
        self._muted += 1
        try:
            yield
        finally:
            self._muted -= 1

    def token(self, tok):
        return self.emit(EventKind.TOKEN, f"{tok.pos.line}:{tok.pos.column} {tok.describe()}", tok)

    def intermediate(self, value: int):
        return self.emit(EventKind.INTERMEDIATE, str(value), value)

    def code(self, text: str, frag=None):
        return self.emit(EventKind.CODE, text, frag)

    def error(self, err):
        text = err.located() if hasattr(err, "located") else str(err)
        return self.emit(EventKind.ERROR, text, err)

    def result(self, text: str, value: Any = None):
        return self.emit(EventKind.RESULT, text, value)

    def of_kind(self, kind: EventKind) -> list[Event]:
        return [e for e in self._events if e.kind is kind]


def trace_dump(events: Iterable[Event]) -> str:
    """Serialize events in seq order, one ``<seq> <KIND> <payload>`` line each."""
    lines = [e.format() for e in sorted(events, key=lambda e: e.seq)]
    return "".join(line + "\n" for line in lines)
