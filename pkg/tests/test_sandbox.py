import random
import string

import numpy as np
import pytest

from motion_workbench.script import (
    BUILTIN_NAMES,
    Interpreter,
    Limits,
    ParseError,
    ToolError,
    builtin_call,
    parse,
)
from sandbox_cases import ERROR_CASES, OUTPUT_CASES


def run(source, **kw):
    return Interpreter(**kw).execute(source)


@pytest.mark.parametrize("name,source,expected", OUTPUT_CASES, ids=[c[0] for c in OUTPUT_CASES])
def test_output_case(name, source, expected):
    outcome = run(source)
    assert outcome.error is None, outcome.error
    assert outcome.printed_output == expected


@pytest.mark.parametrize("name,source,kind,fragment", ERROR_CASES, ids=[c[0] for c in ERROR_CASES])
def test_error_case(name, source, kind, fragment):
    outcome = run(source)
    assert outcome.error is not None
    assert outcome.error.kind == kind
    assert fragment in outcome.error.message


# ---------------------------------------------------------------------------
# parsing details


def test_parse_simple_assignment_ast():
    script = parse("x = 1 + 2")
    assert len(script.statements) == 1
    assert type(script.statements[0]).__name__ == "Assign"


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse("x = (1 +\n2))")
    assert err.value.line >= 1 and err.value.col >= 1


def test_brace_block_form_is_required():
    assert parse("if x > 0 { y = 1 }")
    with pytest.raises(ParseError):
        parse("if x > 0\n  y = 1")


def test_source_length_limit():
    outcome = run("x = 1\n" * 20000)  # 120k chars > default 32768
    assert outcome.error is not None and outcome.error.kind == "parse"
    assert "source exceeds" in outcome.error.message


def test_parser_fuzz_never_aborts():
    rng = random.Random(20240901)
    vocab = [
        "if", "elif", "else", "for", "in", "while", "and", "or", "not", "true", "false", "null",
        "x", "y", "print", "mean", "len", "(", ")", "[", "]", "{", "}", ",", ":",
        "+", "-", "*", "/", "%", "=", "==", "!=", "<", "<=", ">", ">=",
        "1", "2.5", '"s"', "\n", " ", "#c\n",
    ]
    printable = string.printable
    checked = 0
    for i in range(10_000):
        if i % 2 == 0:
            source = "".join(rng.choices(vocab, k=rng.randint(0, 40)))
        else:
            source = "".join(rng.choices(printable, k=rng.randint(0, 60)))
        try:
            parse(source)
        except ParseError:
            pass
        checked += 1
    assert checked == 10_000


# ---------------------------------------------------------------------------
# execution semantics


def test_budget_termination_counts_steps():
    outcome = run("while true { x = 1 }", limits=Limits(max_eval_steps=5000))
    assert outcome.error.kind == "limit"
    assert outcome.steps_used <= 5001


def test_environment_persists_across_executes():
    interp = Interpreter()
    interp.execute("x = 41")
    outcome = interp.execute("print(x + 1)")
    assert outcome.printed_output == "42\n"


def test_bindings_survive_runtime_error():
    interp = Interpreter()
    outcome = interp.execute("a = 7\nb = nonsense")
    assert outcome.error.kind == "runtime"
    followup = interp.execute("print(a)")
    assert followup.printed_output == "7\n"


def test_final_answer_halts_execution():
    outcome = run('final_answer("4", 4)\nprint("never")')
    assert outcome.final_answer is not None
    assert outcome.final_answer.text == "4"
    assert outcome.final_answer.value == 4.0
    assert outcome.printed_output == ""
    assert outcome.error is None


def test_final_answer_with_units():
    outcome = run('final_answer("1.2 m/s", 1.2, "m/s")')
    assert outcome.final_answer.units == "m/s"
    assert outcome.final_answer.value_kind() == "number"


def test_output_truncation_marker():
    outcome = run('s = "xxxxxxxxxx"\nfor i in range(100) { print(s) }', limits=Limits(max_output_chars=200))
    assert outcome.printed_output.endswith("[truncated]")
    assert len(outcome.printed_output) <= 200 + len("\n[truncated]")


def test_tool_dispatch_and_tool_error():
    def double(args):
        if len(args) != 1:
            raise ToolError("double(x) takes one argument")
        return args[0] * 2.0

    interp = Interpreter(tools={"double": double})
    assert interp.execute("print(double(21))").printed_output == "42\n"
    outcome = interp.execute("double(1, 2)")
    assert outcome.error.kind == "runtime"
    assert "double(x)" in outcome.error.message


def test_forbidden_tool_blocked_with_no_side_effects():
    calls = []

    def spy(args):
        calls.append(args)
        return None

    interp = Interpreter(tools={"get_activity_annotations": spy}, forbidden={"get_activity_annotations"})
    outcome = interp.execute('get_activity_annotations("T1")')
    assert outcome.error.kind == "forbidden_tool"
    assert "get_activity_annotations" in outcome.error.message
    assert calls == []


def test_forbidden_tool_error_is_recoverable():
    interp = Interpreter(tools={"secret": lambda a: 1.0}, forbidden={"secret"})
    interp.execute("x = 5\nsecret()")
    assert interp.execute("print(x)").printed_output == "5\n"


def test_deterministic_execution():
    source = "xs = sort([3, 1, 2])\nfor x in xs { print(x * 2) }\nprint(mean(xs))"
    a = run(source)
    b = run(source)
    assert a.printed_output == b.printed_output
    assert a.steps_used == b.steps_used
    assert a.elements_allocated == b.elements_allocated


def test_isolation_builtin_table_is_closed():
    # the only names callable without bindings are the documented builtins
    assert set(BUILTIN_NAMES) == {
        "len", "range", "abs", "sqrt", "floor", "round", "min", "max", "sum",
        "mean", "std", "argmin", "argmax", "diff", "sort", "zeros", "print",
        "str", "keys",
    }
    for suspicious in ("open", "exec", "eval", "import", "read", "write", "system"):
        outcome = run(f'{suspicious}("x")')
        assert outcome.error is not None


def test_builtin_call_direct():
    assert builtin_call("argmax", [[3.0, 9.0, 2.0]]) == 1.0
    assert list(builtin_call("diff", [[1.0, 4.0, 9.0]])) == [3.0, 5.0]
    assert builtin_call("std", [[2.0, 2.0, 2.0]]) == 0.0


def test_arrays_allocate_against_budget():
    outcome = run("a = zeros(1000)\nb = a + 1\nprint(len(b))")
    assert outcome.elements_allocated >= 2000
    assert outcome.printed_output == "1000\n"


def test_steps_used_reported():
    outcome = run("x = 1\ny = 2\nprint(x + y)")
    assert outcome.error is None
    assert outcome.steps_used > 3


def test_final_answer_and_error_never_both_set():
    outcome = run('final_answer("done")\n')
    assert outcome.final_answer is not None and outcome.error is None
    outcome = run("boom()")
    assert outcome.final_answer is None and outcome.error is not None
