import io
import subprocess
import sys

import pytest

from fxlang import EventLog, trace_dump
from fxlang.cli import main, run_compile, run_repl
from fxlang.wasm import execute, parse_wat, wat_tokens

TRIPLE = "let x = 1 + 2 in let y = x + 1 in let z = y + x in z + z + y\n"


def repl(text, semantics="eff", trace=False):
    out, err = io.StringIO(), io.StringIO()
    code = run_repl(semantics, trace, stdin=io.StringIO(text), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_repl_int_partial_sums():
    code, out, err = repl("1+2+3;;\n", "int")
    assert code == 0 and err == ""
    assert out.splitlines() == ["=> 3", "=> 6", "6"]


@pytest.mark.parametrize("semantics", ["eff", "env"])
def test_repl_same_final_values(semantics):
    _, out, _ = repl("let x = 1 in let fun f(y) = x + y in let x = 2 in f(2);;\n7;;\n", semantics)
    assert [line for line in out.splitlines() if not line.startswith("=>")] == ["3", "7"]


def test_repl_wasm_prints_code_and_module():
    code, out, _ = repl("1 + 2;;\n", "wasm")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "=> i32.const 1 i32.const 2 i32.add"
    assert execute(parse_wat(lines[-1])) == 3


def test_repl_error_reporting_and_exit_code():
    code, out, err = repl("1 + ;;\n2;;\n")
    assert code == 1
    assert err.startswith("line 1, column 5:")
    assert out.splitlines()[-1] == "2"


def test_repl_trace_arity_error_before_line_three():
    src = "let fun f(x) = x + 2 in\nlet fun g(y) = f(y,1) + y in\ng(1);;\n"
    code, out, err = repl(src, "wasm", trace=True)
    assert code == 1
    assert err.strip() == "Function f requires 1 arguments but was invoked with 2"
    lines = out.splitlines()
    error_at = next(i for i, line in enumerate(lines) if " ERROR " in line)
    assert not any(" TOKEN 3:" in line for line in lines[:error_at])


def test_repl_unbound_variable_message():
    _, _, err = repl("x + 1;;\n")
    assert err.strip() == "Variable x is unbound"


def test_compile_file(tmp_path, capsys):
    prog = tmp_path / "prog.fx"
    prog.write_text(TRIPLE)
    assert main(["compile", str(prog)]) == 0
    out = capsys.readouterr().out
    assert "(local $t_1 i32) (local $t_2 i32)" in out
    assert len(wat_tokens(out)) > 0


def test_compile_to_output_and_run(tmp_path, capsys):
    prog = tmp_path / "prog.fx"
    prog.write_text(TRIPLE)
    wat = tmp_path / "prog.wat"
    assert main(["compile", str(prog), "-o", str(wat), "--run"]) == 0
    assert capsys.readouterr().out.strip() == "18"
    assert execute(parse_wat(wat.read_text())) == 18


def test_compile_no_alloc(tmp_path, capsys):
    prog = tmp_path / "p.fx"
    prog.write_text("let x=10+11 in 1+x+x+3")
    assert main(["compile", str(prog), "--semantics", "wasm-no-alloc"]) == 0
    out = capsys.readouterr().out
    assert "local" not in out


def test_compile_errors(tmp_path):
    prog = tmp_path / "bad.fx"
    prog.write_text("let fun f(x) = x + 2 in\nlet fun g(y) = f(y,1) + y in\n(1XXX\n")
    out, err = io.StringIO(), io.StringIO()
    assert run_compile(str(prog), "wasm", None, False, False, stdout=out, stderr=err) == 1
    assert err.getvalue() == "Function f requires 1 arguments but was invoked with 2\n"
    assert out.getvalue() == ""

    prog.write_text("f(g(1XXX")
    err = io.StringIO()
    assert run_compile(str(prog), "wasm", None, False, False, stdout=io.StringIO(), stderr=err) == 1
    assert err.getvalue().strip() == "line 1, column 5: Invalid literal 1XXX"


def test_compile_trace(tmp_path):
    prog = tmp_path / "p.fx"
    prog.write_text("1 + 2\n")
    out = io.StringIO()
    assert run_compile(str(prog), "wasm", None, True, False, stdout=out, stderr=io.StringIO()) == 0
    lines = out.getvalue().splitlines()
    assert lines[0] == "1 TOKEN 1:1 1"
    assert " CODE i32.const 1 i32.const 2 i32.add" in lines[3]
    assert " RESULT (module" in lines[-1]


def test_usage_error_exit_code():
    proc = subprocess.run([sys.executable, "-m", "fxlang", "repl", "--semantics", "nope"],
                          capture_output=True, text=True, input="")
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "fxlang", "repl", "--semantics", "int"],
                          capture_output=True, text=True, input="1+2+3;;\n")
    assert proc.returncode == 0 and proc.stdout.splitlines() == ["=> 3", "=> 6", "6"]


def test_trace_dump():
    assert trace_dump([]) == ""
    log = EventLog()
    log.intermediate(3)
    assert trace_dump(log) == "1 INTERMEDIATE 3\n"


def test_trace_dumps_order_eff_before_env():
    _, eff, _ = repl("1+2\n+3\n;;\n", "eff", trace=True)
    _, env, _ = repl("1+2\n+3\n;;\n", "env", trace=True)

    def seq_of(dump, needle):
        return next(int(line.split()[0]) for line in dump.splitlines() if needle in line)

    assert seq_of(eff, "INTERMEDIATE 3") < seq_of(eff, "TOKEN 2:1")
    assert seq_of(env, "INTERMEDIATE 3") > seq_of(env, "TOKEN 3:1")
