"""Compilation to the Wasm subset, with variables as questions.

The answer domain is :data:`CodeVal`: a code fragment for variables, or a
:class:`FunVal` for functions. Two let strategies exist:

* :func:`inline_let` answers questions about the variable with its bound
  code, so every use re-computes it;
* :func:`alloc_let` answers them with a hole, counts the uses, and once the
  body is done either drops the binding, inlines it, or stores it in a local.

Locals are assigned after the whole program is compiled (:func:`run_allocation`),
from the conflicts each let handler reported.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import InternalError, OpenFunctionBody, UnboundName, check_arity
from .events import EventLog
from .syntax import Semantics, parse_program
from .varfx import NS, Denot, QName, Question, ans, handle, letv, lift, lift2, sequence, top_hand, var
from .wasm import (
    ADD,
    Call,
    Frag,
    Hole,
    I32Const,
    LocalGet,
    LocalSet,
    Param,
    Resolved,
    Symbolic,
    WasmFunction,
    WasmModule,
    concat2,
    emit,
    fill_local,
    holes,
    render_frag,
    substitute,
)


@dataclass(frozen=True)
class FragVal:
    frag: Frag


@dataclass(frozen=True)
class FunInfo:
    arity: int
    symbol: str


@dataclass(frozen=True)
class FunVal:
    """A function as seen from a call site.

    ``captures`` are the fragments to pass after the declared arguments, one
    per free variable occurrence the body lifted into an extra parameter.
    """

    info: FunInfo
    captures: tuple = ()

    @property
    def arity(self) -> int:
        return self.info.arity

    @property
    def symbol(self) -> str:
        return self.info.symbol


CodeVal = Union[FragVal, FunVal]


def _frag(v) -> Frag:
    if not isinstance(v, FragVal):
        raise InternalError(f"expected code, got {v!r}")
    return v.frag


def hole_key(name: str, binder: int) -> str:
    return f"{name}@{binder}"


def hole_binder(key: str) -> int:
    return int(key.rsplit("@", 1)[1])


@dataclass(frozen=True)
class AllocRequest:
    binder: int
    name: str
    conflicts: frozenset  # binder ids alive in the body
    names: tuple  # other variable names asked about, in first-seen order


@dataclass
class AllocLedger:
    requests: list[AllocRequest] = field(default_factory=list)
    # binder -> (source name, usage count), for every let handled
    usage: dict[int, tuple[str, int]] = field(default_factory=dict)
    # inlined binder -> binders its code mentions
    aliases: dict[int, frozenset] = field(default_factory=dict)
    assignment: dict[int, str] = field(default_factory=dict)
    _next: int = 0

    def new_binder(self) -> int:
        self._next += 1
        return self._next

    def expand(self, binders) -> set[int]:
        """Replace inlined binders by the binders their code refers to."""
        out: set[int] = set()
        todo = list(binders)
        seen: set[int] = set()
        while todo:
            b = todo.pop()
            if b in seen:
                continue
            seen.add(b)
            if b in self.aliases:
                todo.extend(self.aliases[b])
            else:
                out.add(b)
        return out


def inline_let(name: str, bound: Denot, body: Denot) -> Denot:
    q = QName.var(name)
    return lift(lambda v: letv(q, v, body), bound)


def alloc_let(name: str, bound: Denot, body: Denot, ledger: AllocLedger) -> Denot:
    binder = ledger.new_binder()
    q = QName.var(name)
    key = hole_key(name, binder)

    def letv_alloc(v):
        cnt = 0
        names: list[str] = []

        def lookup(m: QName):
            nonlocal cnt
            if m == q:
                cnt += 1
                return FragVal((Hole(key),))
            if m.ns is NS.VAR and m.name not in names:
                names.append(m.name)
            return None

        def ret(res):
            code = _frag(res)
            ledger.usage[binder] = (name, cnt)
            if cnt == 0:
                return ans(res)
            bound_code = _frag(v)
            if cnt == 1:
                ledger.aliases[binder] = frozenset(hole_binder(h) for h in holes(bound_code))
                return ans(FragVal(substitute(code, key, bound_code)))
            # outer binders used in the body are live across our local.set
            alive = {hole_binder(h) for h in holes(code) if h != key}
            # inner binders stored before our last use must not take our local
            last_use = max((i for i, ins in enumerate(code) if ins == Hole(key)), default=-1)
            alive.update(
                ins.sym.binder
                for ins in code[:last_use]
                if isinstance(ins, LocalSet) and isinstance(ins.sym, Symbolic)
            )
            ledger.requests.append(AllocRequest(binder, name, frozenset(alive), tuple(names)))
            sym = Symbolic(binder)
            return ans(FragVal(bound_code + (LocalSet(sym),) + fill_local(code, key, sym)))

        return handle(ret, lookup, body)

    return lift(letv_alloc, bound)


def run_allocation(ledger: AllocLedger) -> dict[int, str]:
    """First-fit over the requests, in the order the handlers completed."""
    graph: dict[int, set[int]] = defaultdict(set)
    for r in ledger.requests:
        for c in ledger.expand(r.conflicts):
            if c != r.binder:
                graph[r.binder].add(c)
                graph[c].add(r.binder)
    slots: dict[int, int] = {}
    for r in ledger.requests:
        taken = {slots[c] for c in graph[r.binder] if c in slots}
        k = 1
        while k in taken:
            k += 1
        slots[r.binder] = k
    ledger.assignment = {b: f"t_{k}" for b, k in slots.items()}
    return ledger.assignment


def _resolve(fn: WasmFunction, assignment: dict[int, str]) -> WasmFunction:
    def sym(s):
        if isinstance(s, Symbolic):
            return Resolved(assignment[s.binder])
        return s

    body = []
    names: set[str] = set()
    for i in fn.body:
        if isinstance(i, LocalGet):
            i = LocalGet(sym(i.sym))
        elif isinstance(i, LocalSet):
            i = LocalSet(sym(i.sym))
            if isinstance(i.sym, Resolved):
                names.add(i.sym.name)
        body.append(i)
    ordered = sorted(names, key=lambda n: int(n.split("_")[1]))
    return replace(fn, body=tuple(body), locals=ordered)


@dataclass(frozen=True)
class FunDecl:
    name: str
    params: tuple
    denot: Denot


@dataclass
class CompileResult:
    module: WasmModule
    text: str
    ledger: AllocLedger
    symbolic: WasmModule  # same module before local assignment


class WasmSemantics(Semantics):
    """Compiles to a Wasm module; ``alloc=False`` gives the pure inlining layer."""

    def __init__(self, events: Optional[EventLog] = None, alloc: bool = True):
        self.events = events if events is not None else EventLog()
        self.alloc = alloc
        self.ledger = AllocLedger()
        self.functions: list[WasmFunction] = []
        self._symbols: dict[str, int] = defaultdict(int)

    def _code(self, frag: Frag) -> FragVal:
        self.events.code(render_frag(frag), frag)
        return FragVal(frag)

    def int(self, n):
        return ans(FragVal((I32Const(n),)))

    def add(self, x, y):
        return lift2(lambda a, b: self._code(concat2(_frag(a), _frag(b), ADD)), x, y)

    def var(self, name):
        return var(QName.var(name))

    def let_(self, name, bound, body):
        if self.alloc:
            return alloc_let(name, bound, body, self.ledger)
        return inline_let(name, bound, body)

    def call(self, name, args):
        n = len(args)

        def invoke(fv):
            if not isinstance(fv, FunVal):
                raise InternalError(f"expected a function for {name}, got {fv!r}")
            check_arity(name, fv.arity, n)

            def assemble(values):
                code: Frag = ()
                for v in values:
                    code += _frag(v)
                for c in fv.captures:
                    code += c
                return ans(self._code(code + (Call(fv.symbol),)))

            return lift(assemble, sequence(args))

        return lift(invoke, var(QName.fun(name)))

    def _fresh_symbol(self, name: str) -> str:
        self._symbols[name] += 1
        return f"{name}_{self._symbols[name]}"

    def defun(self, name, params, body):
        params = tuple(params)
        arity = len(params)
        symbol = self._fresh_symbol(name)
        slots = {QName.var(p): FragVal((LocalGet(Param(i)),)) for i, p in enumerate(params)}
        captures: list[Frag] = []

        def lifted(code: Frag) -> Frag:
            # outer code cannot run inside this function: pass it as an argument
            code = tuple(code)
            if code not in captures:
                captures.append(code)
            return (LocalGet(Param(arity + captures.index(code))),)

        def relay(q, v):
            if isinstance(v, FragVal):
                return FragVal(lifted(v.frag))
            if isinstance(v, FunVal) and v.captures:
                return FunVal(v.info, tuple(lifted(c) for c in v.captures))
            return v

        def ret(res):
            self.functions.append(
                WasmFunction(body=_frag(res), params=arity + len(captures), symbol=symbol)
            )
            return ans(FunVal(FunInfo(arity, symbol), tuple(captures)))

        return FunDecl(name, params, handle(ret, slots.get, body, relay=relay))

    def defn_empty(self):
        return {}

    def defn_add(self, defns, decl):
        d = handle(ans, defns.get, decl.denot)
        if isinstance(d, Question):
            if d.name.ns is NS.VAR:
                raise OpenFunctionBody(decl.name, d.name.name)
            raise UnboundName(d.name)
        return {**defns, QName.fun(decl.name): d.value}

    def let_fun(self, decl, body):
        q = QName.fun(decl.name)
        return lift(lambda fv: letv(q, fv, body), decl.denot)

    def top_exp(self, defns, body):
        return handle(ans, defns.get, body)

    def topf_observe(self, top):
        main = _frag(top_hand(top))
        start = WasmFunction(body=main, export="start")
        symbolic = WasmModule(self.functions + [start])
        assignment = run_allocation(self.ledger)
        module = WasmModule([_resolve(fn, assignment) for fn in symbolic.functions])
        text = emit(module)
        self.events.result(text, module)
        return CompileResult(module, text, self.ledger, symbolic)


def compile_program(source, alloc: bool = True, events: Optional[EventLog] = None) -> CompileResult:
    events = events if events is not None else EventLog()
    return parse_program(source, WasmSemantics(events, alloc=alloc), events)
