import pytest

from fxlang import EventKind, EventLog, evaluate, parse_program
from fxlang.errors import ArityError, UnboundName, UnsupportedConstruct
from fxlang.interp import EffSemantics, EnvSemantics, desk_add


def inter(events):
    return [e.value for e in events.of_kind(EventKind.INTERMEDIATE)]


def run(src, semantics):
    events = EventLog()
    value = evaluate(src, semantics, events)
    return value, events


def test_desk_add():
    events = EventLog()
    assert desk_add(events, 1, 2) == 3
    assert inter(events) == [3]


def test_desk_programs():
    value, events = run("1+2+3", "int")
    assert value == 6 and inter(events) == [3, 6]
    assert events.of_kind(EventKind.RESULT)[0].payload == "6"
    value, events = run("7", "int")
    assert value == 7 and inter(events) == []


def test_desk_rejects_names():
    with pytest.raises(UnboundName):
        evaluate("1 + x", "int")
    with pytest.raises(UnsupportedConstruct):
        evaluate("let x = 1 in 2", "int")


def test_env_is_lazy():
    value, events = run("let x = 1+2 in x+x", "env")
    assert value == 6

    events = EventLog()
    sem = EnvSemantics(events)
    m12 = sem.add(sem.int(1), sem.int(2))
    assert inter(events) == []
    assert m12(()) == 3 and m12((("junk", 5),)) == 3


def test_env_unbound_at_observe():
    with pytest.raises(UnboundName, match="Variable x is unbound"):
        evaluate("(1+2)+x", "env")


def test_env_timing_relative_to_end():
    _, events = run("let x = 1+2 in x+x", "env")
    last_token = max(e.seq for e in events.of_kind(EventKind.TOKEN))
    assert all(e.seq > last_token for e in events.of_kind(EventKind.INTERMEDIATE))


def test_eff_prints_before_unbound_variable():
    events = EventLog()
    with pytest.raises(UnboundName):
        parse_program(["(1+2)\n", "+x\n"], EffSemantics(events), events)
    first_x = next(e.seq for e in events.of_kind(EventKind.TOKEN) if e.payload.endswith(" x"))
    (three,) = events.of_kind(EventKind.INTERMEDIATE)
    assert three.value == 3 and three.seq < first_x


def test_eff_nested_let_timeline():
    events = EventLog()
    value = evaluate(["let y = let x = 1 + 2 in\n", "x + x + 3 in\n", "y + 1;;\n"], "eff", events)
    assert value == 10
    assert inter(events) == [3, 6, 9, 10]
    line2_in = next(e.seq for e in events.of_kind(EventKind.TOKEN) if e.payload == "2:11 in")
    line3 = next(e.seq for e in events.of_kind(EventKind.TOKEN) if e.payload.startswith("3:"))
    six, nine = events.of_kind(EventKind.INTERMEDIATE)[1:3]
    assert line2_in < six.seq < nine.seq < line3


@pytest.mark.parametrize("semantics", ["eff", "env"])
@pytest.mark.parametrize("src, want", [
    ("let x = 1 in let fun f(y) = x + y in let x = 2 in f(2)", 3),
    ("let x = 1 in let fun f(y) = x + y in let fun g(x) = f(x) in g(2)", 3),
    ("let fun f(y) = y in f(5)", 5),
    ("let fun f(x) = x + 2 in let fun g(x,y) = f(y) + x in f(g(1,2))", 7),
    ("let fun f() = 4 in f() + f()", 8),
    ("let fun f(x) = x in let fun f(x) = x + 1 in f(1)", 2),
    ("let fun f(x) = x + 1 in let fun g(y) = f(y) in let fun f(x) = 100 in g(1)", 2),
])
def test_functions(semantics, src, want):
    assert evaluate(src, semantics) == want


@pytest.mark.parametrize("semantics", ["eff", "env"])
def test_arity(semantics):
    with pytest.raises(ArityError, match="Function f requires 1 arguments but was invoked with 2"):
        evaluate("let fun f(x) = x in f(1, 2)", semantics)


@pytest.mark.parametrize("semantics", ["eff", "env"])
def test_unknown_function(semantics):
    with pytest.raises(UnboundName, match="Function g is unbound"):
        evaluate("g(1)", semantics)


def test_eff_function_values_do_not_leak_events_from_definition():
    _, events = run("let fun f(y) = y + 1 + 2 in f(1)", "eff")
    # the body runs once, at the call
    assert inter(events) == [2, 4]


def test_desk_and_eff_agree_on_variable_free_programs():
    for src in ["1", "1+2", "(1+2)+(3+4)+5", "10 + (20 + (30 + 40))"]:
        _, a = run(src, "int")
        _, b = run(src, "eff")
        assert inter(a) == inter(b)
