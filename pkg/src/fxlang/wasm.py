"""A small WebAssembly subset: instruction fragments with holes, text
emission and parsing, a stack checker and a reference executor.

Only ``i32.const``, ``i32.add``, ``local.get``, ``local.set`` and ``call``
are modelled. A fragment is a tuple of instructions; the compiler builds
fragments that push exactly one i32.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Union

from .errors import FxError


class EmitError(FxError):
    pass


class WatSyntaxError(FxError):
    pass


class StackError(FxError):
    """A function body that does not type-check as ``[] -> [i32]``."""


class Trap(FxError):
    pass


class TrapStackUnderflow(Trap):
    pass


class TrapUnresolved(Trap):
    pass


# local symbols

@dataclass(frozen=True)
class Symbolic:
    binder: int


@dataclass(frozen=True)
class Resolved:
    name: str


@dataclass(frozen=True)
class Param:
    index: int


LocalSym = Union[Symbolic, Resolved, Param]


# instructions

@dataclass(frozen=True)
class I32Const:
    value: int


@dataclass(frozen=True)
class I32Add:
    pass


@dataclass(frozen=True)
class LocalGet:
    sym: LocalSym


@dataclass(frozen=True)
class LocalSet:
    sym: LocalSym


@dataclass(frozen=True)
class Call:
    fsym: str


@dataclass(frozen=True)
class Hole:
    var: str


Instr = Union[I32Const, I32Add, LocalGet, LocalSet, Call, Hole]
Frag = tuple

ADD = I32Add()


def to_i32(n: int) -> int:
    n &= 0xFFFFFFFF
    return n - 0x1_0000_0000 if n & 0x8000_0000 else n


def concat2(x: Frag, y: Frag, tail: Instr) -> Frag:
    return tuple(x) + tuple(y) + (tail,)


def substitute(f: Frag, var: str, replacement: Frag) -> Frag:
    """Replace every ``Hole(var)`` in ``f`` with the whole ``replacement``."""
    if not any(isinstance(i, Hole) and i.var == var for i in f):
        return tuple(f)
    out: list[Instr] = []
    for i in f:
        if isinstance(i, Hole) and i.var == var:
            out.extend(replacement)
        else:
            out.append(i)
    return tuple(out)


def fill_local(f: Frag, var: str, sym: LocalSym) -> Frag:
    get = LocalGet(sym)
    return tuple(get if isinstance(i, Hole) and i.var == var else i for i in f)


def holes(f: Frag) -> list[str]:
    """Hole names of ``f`` in order of first occurrence."""
    seen: dict[str, None] = {}
    for i in f:
        if isinstance(i, Hole):
            seen.setdefault(i.var)
    return list(seen)


@dataclass
class WasmFunction:
    body: Frag
    params: int = 0
    symbol: Optional[str] = None
    export: Optional[str] = None
    locals: list[str] = field(default_factory=list)


@dataclass
class WasmModule:
    functions: list[WasmFunction]

    def start(self) -> WasmFunction:
        starts = [f for f in self.functions if f.export == "start"]
        if len(starts) != 1:
            raise EmitError(f"module must export 'start' exactly once, found {len(starts)}")
        return starts[0]

    def function(self, symbol: str) -> WasmFunction:
        for f in self.functions:
            if f.symbol == symbol:
                return f
        raise TrapUnresolved(f"unknown function ${symbol}")


def _sym_text(sym: LocalSym, strict: bool) -> str:
    if isinstance(sym, Resolved):
        return f"${sym.name}"
    if isinstance(sym, Param):
        return str(sym.index)
    if strict:
        raise EmitError(f"unallocated local for binder {sym.binder}")
    return f"$?{sym.binder}"


def render_instr(i: Instr, strict: bool = True) -> str:
    if isinstance(i, I32Const):
        return f"i32.const {i.value}"
    if isinstance(i, I32Add):
        return "i32.add"
    if isinstance(i, LocalGet):
        return f"local.get {_sym_text(i.sym, strict)}"
    if isinstance(i, LocalSet):
        return f"local.set {_sym_text(i.sym, strict)}"
    if isinstance(i, Call):
        return f"call ${i.fsym}"
    if isinstance(i, Hole):
        if strict:
            raise EmitError(f"unfilled hole for {i.var}")
        return f"<{i.var}>"
    raise EmitError(f"not an instruction: {i!r}")


def render_frag(f: Frag, strict: bool = False) -> str:
    return " ".join(render_instr(i, strict) for i in f)


def _emit_function(fn: WasmFunction) -> tuple[str, str]:
    head = ["func"]
    if fn.symbol is not None:
        head.append(f"${fn.symbol}")
    if fn.export is not None:
        head.append(f'(export "{fn.export}")')
    head.extend(["(param i32)"] * fn.params)
    head.append("(result i32)")
    if len(set(fn.locals)) != len(fn.locals):
        raise EmitError(f"duplicate locals in {fn.symbol or fn.export}")
    head.extend(f"(local ${name} i32)" for name in fn.locals)
    return " ".join(head), render_frag(fn.body, strict=True)


def emit(m: WasmModule, pretty: bool = False) -> str:
    """WebAssembly text for ``m``. Fails on holes or unallocated locals."""
    m.start()
    parts = [_emit_function(fn) for fn in m.functions]
    if not pretty:
        funcs = " ".join(f"({head} {body})" if body else f"({head})" for head, body in parts)
        return f"(module {funcs})"
    lines = ["(module"]
    for head, body in parts:
        lines.append(f"  ({head}")
        lines.append(f"    {body})" if body else "  )")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


# reading text back

_TOKEN_RE = re.compile(r'\s*(?:(\()|(\))|("[^"]*")|([^\s()"]+))')

INSTRUCTIONS = {"i32.const", "i32.add", "local.get", "local.set", "call"}


def _tokenize(text: str) -> list[str]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise WatSyntaxError(f"cannot tokenize WAT near {text[pos:pos + 20]!r}")
        out.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
    return out


def wat_tokens(text: str) -> list[str]:
    """Tokens of WAT text with grouping parens around plain instructions removed.

    ``(i32.const 1)`` and ``i32.const 1`` compare equal; whitespace is ignored.
    """
    toks = _tokenize(text)
    out: list[str] = []
    i = 0
    while i < len(toks):
        if toks[i] == "(" and i + 1 < len(toks) and toks[i + 1] in INSTRUCTIONS:
            j = i + 1
            while j < len(toks) and toks[j] not in ("(", ")"):
                j += 1
            if j < len(toks) and toks[j] == ")":
                out.extend(toks[i + 1:j])
                i = j + 1
                continue
        out.append(toks[i])
        i += 1
    return out


def _sexprs(toks: list[str]):
    stack: list[list] = [[]]
    for t in toks:
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise WatSyntaxError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    if len(stack) != 1:
        raise WatSyntaxError("unbalanced '('")
    return stack[0]


def _parse_sym(text: str) -> LocalSym:
    if text.startswith("$"):
        return Resolved(text[1:])
    return Param(int(text))


def _parse_body(items: list) -> Frag:
    flat: list[str] = []
    for it in items:
        if isinstance(it, list):
            flat.extend(it)
        else:
            flat.append(it)
    body: list[Instr] = []
    i = 0
    while i < len(flat):
        op = flat[i]
        if op == "i32.add":
            body.append(ADD)
            i += 1
            continue
        if op not in INSTRUCTIONS or i + 1 >= len(flat):
            raise WatSyntaxError(f"unexpected {op!r} in function body")
        arg = flat[i + 1]
        if op == "i32.const":
            body.append(I32Const(int(arg)))
        elif op == "local.get":
            body.append(LocalGet(_parse_sym(arg)))
        elif op == "local.set":
            body.append(LocalSet(_parse_sym(arg)))
        else:
            body.append(Call(arg.lstrip("$")))
        i += 2
    return tuple(body)


def parse_wat(text: str) -> WasmModule:
    """Read back text in the subset produced by :func:`emit`."""
    top = _sexprs(_tokenize(text))
    if len(top) != 1 or not top[0] or top[0][0] != "module":
        raise WatSyntaxError("expected a single (module ...)")
    functions = []
    for item in top[0][1:]:
        if not isinstance(item, list) or not item or item[0] != "func":
            raise WatSyntaxError("expected (func ...)")
        fn = WasmFunction(body=())
        rest = item[1:]
        if rest and isinstance(rest[0], str) and rest[0].startswith("$"):
            fn.symbol = rest[0][1:]
            rest = rest[1:]
        while rest and isinstance(rest[0], list) and rest[0] and rest[0][0] in ("export", "param", "result", "local"):
            head = rest[0]
            if head[0] == "export":
                fn.export = head[1].strip('"')
            elif head[0] == "param":
                fn.params += len(head) - 1
            elif head[0] == "local":
                fn.locals.append(head[1][1:])
            rest = rest[1:]
        fn.body = _parse_body(rest)
        functions.append(fn)
    return WasmModule(functions)


# checking and running

def check_function(fn: WasmFunction, arities: dict[str, int]) -> None:
    """Abstractly run ``fn``: no underflow, locals set before read, ends with one i32."""
    depth = 0
    written: set = set()
    declared = set(fn.locals)
    for pc, i in enumerate(fn.body):
        if isinstance(i, I32Const):
            depth += 1
        elif isinstance(i, I32Add):
            if depth < 2:
                raise StackError(f"i32.add underflows at {pc}")
            depth -= 1
        elif isinstance(i, LocalGet):
            sym = i.sym
            if isinstance(sym, Param):
                if sym.index >= fn.params:
                    raise StackError(f"param {sym.index} out of range at {pc}")
            elif sym not in written:
                raise StackError(f"local {_sym_text(sym, False)} read before set at {pc}")
            depth += 1
        elif isinstance(i, LocalSet):
            if depth < 1:
                raise StackError(f"local.set underflows at {pc}")
            if isinstance(i.sym, Resolved) and i.sym.name not in declared:
                raise StackError(f"undeclared local ${i.sym.name}")
            written.add(i.sym)
            depth -= 1
        elif isinstance(i, Call):
            n = arities.get(i.fsym)
            if n is None:
                raise StackError(f"call to unknown ${i.fsym}")
            if depth < n:
                raise StackError(f"call ${i.fsym} underflows at {pc}")
            depth -= n - 1
        else:
            raise StackError(f"unexpected {render_instr(i, strict=False)} at {pc}")
    if depth != 1:
        raise StackError(f"function leaves {depth} values on the stack")


def check_module(m: WasmModule) -> None:
    arities = {f.symbol: f.params for f in m.functions if f.symbol is not None}
    for fn in m.functions:
        check_function(fn, arities)


def _run(fn: WasmFunction, args: list[int], m: WasmModule, depth: int) -> int:
    if depth > 1000:
        raise Trap("call stack exhausted")
    frame: dict = {Param(k): v for k, v in enumerate(args)}
    for name in fn.locals:
        frame[Resolved(name)] = 0
    stack: list[int] = []
    for i in fn.body:
        if isinstance(i, I32Const):
            stack.append(to_i32(i.value))
        elif isinstance(i, I32Add):
            if len(stack) < 2:
                raise TrapStackUnderflow("i32.add on short stack")
            b = stack.pop()
            stack[-1] = to_i32(stack[-1] + b)
        elif isinstance(i, LocalGet):
            if i.sym not in frame:
                raise TrapUnresolved(f"local.get of unknown {_sym_text(i.sym, False)}")
            stack.append(frame[i.sym])
        elif isinstance(i, LocalSet):
            if i.sym not in frame:
                raise TrapUnresolved(f"local.set of unknown {_sym_text(i.sym, False)}")
            if not stack:
                raise TrapStackUnderflow("local.set on empty stack")
            frame[i.sym] = stack.pop()
        elif isinstance(i, Call):
            callee = m.function(i.fsym)
            if len(stack) < callee.params:
                raise TrapStackUnderflow(f"call ${i.fsym} on short stack")
            cut = len(stack) - callee.params
            call_args = stack[cut:]
            del stack[cut:]
            stack.append(_run(callee, call_args, m, depth + 1))
        else:
            raise TrapUnresolved(f"cannot execute {render_instr(i, strict=False)}")
    if len(stack) != 1:
        raise TrapStackUnderflow(f"function returned with {len(stack)} values on the stack")
    return stack[0]


def execute(m: WasmModule) -> int:
    """Run the exported ``start`` function and return its i32 result."""
    return _run(m.start(), [], m, 0)
