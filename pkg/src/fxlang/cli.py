"""Command line driver.

    fxlang repl [--semantics S] [--trace]
    fxlang compile FILE [--semantics wasm|wasm-no-alloc] [-o OUT] [--trace] [--run]
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .compile import WasmSemantics
from .errors import FxError, LexError, ParseError
from .events import Event, EventKind, EventLog
from .interp import SEMANTICS
from .syntax import Repl, parse_program
from .wasm import emit, execute

SEMANTICS_NAMES = ["int", "env", "eff", "wasm", "wasm-no-alloc"]


def make_semantics(name: str):
    if name == "wasm":
        return lambda events: WasmSemantics(events, alloc=True)
    if name == "wasm-no-alloc":
        return lambda events: WasmSemantics(events, alloc=False)
    return SEMANTICS[name]


def _error_text(err: FxError) -> str:
    if isinstance(err, (LexError, ParseError)):
        return err.located()
    return err.message


def _printer(trace: bool, out, err):
    def show(event: Event):
        if trace:
            print(event.format(), file=out, flush=True)
            if event.kind is EventKind.ERROR:
                print(_error_text(event.value), file=err, flush=True)
            return
        if event.kind in (EventKind.INTERMEDIATE, EventKind.CODE):
            print(f"=> {event.payload}", file=out, flush=True)
        elif event.kind is EventKind.RESULT:
            print(event.payload, file=out, flush=True)
        elif event.kind is EventKind.ERROR:
            print(_error_text(event.value), file=err, flush=True)

    return show


def run_repl(semantics: str, trace: bool, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    events = EventLog(listener=_printer(trace, stdout, stderr))
    repl = Repl(make_semantics(semantics), events)
    for line in iter(stdin.readline, ""):
        repl.feed(line)
    repl.close()
    return 1 if repl.errors else 0


def run_compile(path: str, semantics: str, out_path: Optional[str], trace: bool, run: bool,
                stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    listener = _printer(True, stdout, stderr) if trace else None
    events = EventLog(listener=listener)
    sem = make_semantics(semantics)(events)
    src = sys.stdin if path == "-" else open(path, encoding="utf-8")
    try:
        result = parse_program(iter(src.readline, ""), sem, events)
    except FxError as err:
        if trace:
            events.error(err)
        else:
            print(_error_text(err), file=stderr)
        return 1
    finally:
        if src is not sys.stdin:
            src.close()
    text = emit(result.module, pretty=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif not trace:
        stdout.write(text)
    if run:
        print(execute(result.module), file=stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fxlang")
    sub = parser.add_subparsers(dest="command", required=True)

    repl = sub.add_parser("repl", help="read programs from stdin, ending each with ;;")
    repl.add_argument("--semantics", choices=SEMANTICS_NAMES, default="eff")
    repl.add_argument("--trace", action="store_true", help="print every event as it happens")

    comp = sub.add_parser("compile", help="compile a file to WebAssembly text")
    comp.add_argument("file", help="source file, or - for stdin")
    comp.add_argument("--semantics", choices=["wasm", "wasm-no-alloc"], default="wasm")
    comp.add_argument("-o", "--output", help="write the .wat here instead of stdout")
    comp.add_argument("--trace", action="store_true")
    comp.add_argument("--run", action="store_true", help="also execute the module and print its result")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "repl":
        return run_repl(args.semantics, args.trace)
    return run_compile(args.file, args.semantics, args.output, args.trace, args.run)


if __name__ == "__main__":
    sys.exit(main())
