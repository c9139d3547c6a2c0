"""Tree-walking interpreter with step/allocation/output budgets.

One interpreter instance backs one episode: the variable environment
persists across execute() calls, and after a runtime error every binding
made before the failing statement is retained. The only effects a script
can have are printed output, tool calls, and the final answer; there is no
file, network, or host access anywhere in the builtin or tool tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import parser as ast
from .parser import ParseError, Script, Span, parse
from .values import FinalAnswer, Value, display, is_num, type_name


@dataclass(frozen=True)
class Limits:
    max_eval_steps: int = 100_000
    max_array_elements: int = 1_000_000
    max_output_chars: int = 65_536
    max_source_chars: int = 32_768


@dataclass
class ExecError:
    kind: str  # parse | runtime | limit | forbidden_tool
    message: str
    span: Span | None = None


@dataclass
class ExecOutcome:
    printed_output: str = ""
    plots: list = field(default_factory=list)
    final_answer: FinalAnswer | None = None
    error: ExecError | None = None
    steps_used: int = 0
    elements_allocated: int = 0


class ScriptRuntimeError(Exception):
    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span


class LimitExceeded(Exception):
    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span


class ForbiddenToolCall(Exception):
    def __init__(self, tool: str, span: Span | None = None):
        super().__init__(f"tool '{tool}' is forbidden for this task")
        self.tool = tool
        self.span = span


class ToolError(Exception):
    """Raised by tool bindings; the message is shown to the agent verbatim."""


class _FinalAnswerSignal(Exception):
    def __init__(self, answer: FinalAnswer):
        self.answer = answer


BUILTIN_NAMES = (
    "len", "range", "abs", "sqrt", "floor", "round", "min", "max", "sum",
    "mean", "std", "argmin", "argmax", "diff", "sort", "zeros", "print",
    "str", "keys",
)


def _as_numeric_array(v: Value, context: str) -> np.ndarray:
    if isinstance(v, np.ndarray):
        return v
    if isinstance(v, list):
        if not all(is_num(x) for x in v):
            raise ScriptRuntimeError(f"{context}: list elements must all be numbers")
        return np.asarray(v, dtype=float)
    raise ScriptRuntimeError(f"{context}: expected an array or numeric list, got {type_name(v)}")


def _require_num(v: Value, context: str) -> float:
    if not is_num(v):
        raise ScriptRuntimeError(f"{context}: expected a number, got {type_name(v)}")
    return v


def _require_whole(v: Value, context: str) -> int:
    x = _require_num(v, context)
    if not float(x).is_integer():
        raise ScriptRuntimeError(f"{context}: expected a whole number, got {x}")
    return int(x)


class Interpreter:
    def __init__(
        self,
        tools: dict[str, Callable[[list], Value]] | None = None,
        forbidden: frozenset[str] | set[str] = frozenset(),
        limits: Limits = Limits(),
    ):
        self.tools = tools or {}
        self.forbidden = frozenset(forbidden)
        self.limits = limits
        self.env: dict[str, Value] = {}
        self._steps = 0
        self._allocated = 0
        self._out: list[str] = []
        self._out_len = 0
        self._truncated = False

    # -- budgets

    def _step(self, span: Span | None = None):
        self._steps += 1
        if self._steps > self.limits.max_eval_steps:
            raise LimitExceeded(f"evaluation budget of {self.limits.max_eval_steps} steps exceeded", span)

    def _alloc(self, count: int, span: Span | None = None):
        self._allocated += int(count)
        if self._allocated > self.limits.max_array_elements:
            raise LimitExceeded(
                f"array allocation budget of {self.limits.max_array_elements} elements exceeded", span
            )

    def _emit(self, text: str):
        if self._truncated:
            return
        room = self.limits.max_output_chars - self._out_len
        if len(text) > room:
            self._out.append(text[:room])
            self._out.append("\n[truncated]")
            self._truncated = True
            self._out_len = self.limits.max_output_chars
        else:
            self._out.append(text)
            self._out_len += len(text)

    # -- entry point

    def execute(self, source: str) -> ExecOutcome:
        self._steps = 0
        self._allocated = 0
        self._out = []
        self._out_len = 0
        self._truncated = False
        outcome = ExecOutcome()
        try:
            script = parse(source, max_source_chars=self.limits.max_source_chars)
        except ParseError as exc:
            outcome.error = ExecError(kind="parse", message=str(exc), span=(exc.line, exc.col))
            return outcome
        try:
            for stmt in script.statements:
                self._exec_stmt(stmt)
        except _FinalAnswerSignal as sig:
            outcome.final_answer = sig.answer
        except ForbiddenToolCall as exc:
            outcome.error = ExecError(kind="forbidden_tool", message=str(exc), span=exc.span)
        except LimitExceeded as exc:
            outcome.error = ExecError(kind="limit", message=exc.message, span=exc.span)
        except ScriptRuntimeError as exc:
            outcome.error = ExecError(kind="runtime", message=exc.message, span=exc.span)
        outcome.printed_output = "".join(self._out)
        outcome.steps_used = self._steps
        outcome.elements_allocated = self._allocated
        return outcome

    # -- statements

    def _exec_block(self, stmts: list):
        for stmt in stmts:
            self._exec_stmt(stmt)

    def _exec_stmt(self, stmt):
        self._step(getattr(stmt, "span", None))
        if isinstance(stmt, ast.Assign):
            value = self._eval(stmt.value)
            self._assign(stmt.target, value)
        elif isinstance(stmt, ast.ExprStmt):
            self._eval(stmt.expr)
        elif isinstance(stmt, ast.If):
            for cond, body in stmt.branches:
                if self._truth(cond):
                    self._exec_block(body)
                    return
            if stmt.orelse is not None:
                self._exec_block(stmt.orelse)
        elif isinstance(stmt, ast.For):
            items = self._iterable(self._eval(stmt.iterable), stmt.span)
            for item in items:
                self._step(stmt.span)
                self.env[stmt.var] = item
                self._exec_block(stmt.body)
        elif isinstance(stmt, ast.While):
            while self._truth(stmt.cond):
                self._exec_block(stmt.body)
        else:  # pragma: no cover - parser emits only the kinds above
            raise ScriptRuntimeError(f"unknown statement {type(stmt).__name__}")

    def _truth(self, cond_expr) -> bool:
        v = self._eval(cond_expr)
        if not isinstance(v, bool):
            raise ScriptRuntimeError(
                f"condition must be a bool, got {type_name(v)}", getattr(cond_expr, "span", None)
            )
        return v

    def _iterable(self, v: Value, span: Span) -> list:
        if isinstance(v, np.ndarray):
            if v.ndim == 1:
                return [float(x) for x in v]
            return [np.array(row) for row in v]
        if isinstance(v, list):
            return list(v)
        raise ScriptRuntimeError(f"cannot iterate over {type_name(v)}", span)

    def _assign(self, target, value: Value):
        if isinstance(target, ast.Name):
            self.env[target.id] = value
            return
        obj = self._eval(target.obj)
        idx = self._eval(target.index)
        span = target.span
        if isinstance(obj, dict):
            if not isinstance(idx, str):
                raise ScriptRuntimeError("map keys must be strings", span)
            obj[idx] = value
            return
        if isinstance(obj, list):
            i = self._list_index(idx, len(obj), span)
            obj[i] = value
            return
        if isinstance(obj, np.ndarray):
            i = self._list_index(idx, obj.shape[0], span)
            if obj.ndim == 1:
                obj[i] = _require_num(value, "array element assignment")
            else:
                row = _as_numeric_array(value, "array row assignment")
                if row.shape != obj[i].shape:
                    raise ScriptRuntimeError("array row assignment shape mismatch", span)
                obj[i] = row
            return
        raise ScriptRuntimeError(f"cannot index-assign into {type_name(obj)}", span)

    def _list_index(self, idx: Value, length: int, span: Span) -> int:
        i = _require_whole(idx, "index")
        if i < 0:
            i += length
        if not 0 <= i < length:
            raise ScriptRuntimeError(f"index {int(_require_num(idx, 'index'))} out of range for length {length}", span)
        return i

    # -- expressions

    def _eval(self, node) -> Value:
        self._step(getattr(node, "span", None))
        if isinstance(node, ast.Literal):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in self.env:
                return self.env[node.id]
            raise ScriptRuntimeError(f"unknown identifier '{node.id}'", node.span)
        if isinstance(node, ast.ListLit):
            return [self._eval(item) for item in node.items]
        if isinstance(node, ast.MapLit):
            out = {}
            for key_expr, value_expr in node.pairs:
                key = self._eval(key_expr)
                if not isinstance(key, str):
                    raise ScriptRuntimeError(f"map keys must be strings, got {type_name(key)}", node.span)
                out[key] = self._eval(value_expr)
            return out
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand)
            if is_num(v):
                return -v
            if isinstance(v, np.ndarray):
                self._alloc(v.size, node.span)
                return -v
            raise ScriptRuntimeError(f"cannot negate {type_name(v)}", node.span)
        if isinstance(node, ast.NotOp):
            v = self._eval(node.operand)
            if not isinstance(v, bool):
                raise ScriptRuntimeError(f"'not' needs a bool, got {type_name(v)}", node.span)
            return not v
        if isinstance(node, ast.BoolOp):
            left = self._eval(node.left)
            if not isinstance(left, bool):
                raise ScriptRuntimeError(f"'{node.op}' needs bools, got {type_name(left)}", node.span)
            if node.op == "and" and not left:
                return False
            if node.op == "or" and left:
                return True
            right = self._eval(node.right)
            if not isinstance(right, bool):
                raise ScriptRuntimeError(f"'{node.op}' needs bools, got {type_name(right)}", node.span)
            return right
        if isinstance(node, ast.Compare):
            return self._compare(node)
        if isinstance(node, ast.BinOp):
            return self._binop(node)
        if isinstance(node, ast.Call):
            return self._call(node)
        if isinstance(node, ast.Index):
            return self._index(node)
        if isinstance(node, ast.SliceExpr):
            return self._slice(node)
        raise ScriptRuntimeError(f"unknown expression {type(node).__name__}")  # pragma: no cover

    def _compare(self, node: ast.Compare) -> bool:
        left = self._eval(node.left)
        right = self._eval(node.right)
        op = node.op
        if is_num(left) and is_num(right):
            return {
                "==": left == right, "!=": left != right,
                "<": left < right, "<=": left <= right,
                ">": left > right, ">=": left >= right,
            }[op]
        if isinstance(left, str) and isinstance(right, str):
            return {
                "==": left == right, "!=": left != right,
                "<": left < right, "<=": left <= right,
                ">": left > right, ">=": left >= right,
            }[op]
        if op in ("==", "!="):
            eq = self._deep_equal(left, right)
            return eq if op == "==" else not eq
        raise ScriptRuntimeError(
            f"cannot order {type_name(left)} and {type_name(right)}", node.span
        )

    def _deep_equal(self, a: Value, b: Value) -> bool:
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            if not (isinstance(a, np.ndarray) and isinstance(b, np.ndarray)):
                return False
            return a.shape == b.shape and bool(np.array_equal(a, b))
        if isinstance(a, bool) or isinstance(b, bool):
            return a is b
        if isinstance(a, list) and isinstance(b, list):
            return len(a) == len(b) and all(self._deep_equal(x, y) for x, y in zip(a, b))
        if isinstance(a, dict) and isinstance(b, dict):
            return a.keys() == b.keys() and all(self._deep_equal(a[k], b[k]) for k in a)
        return type(a) is type(b) and a == b

    def _binop(self, node: ast.BinOp) -> Value:
        left = self._eval(node.left)
        right = self._eval(node.right)
        op = node.op
        span = node.span
        if op == "+" and isinstance(left, str) and isinstance(right, str):
            return left + right
        if op == "+" and isinstance(left, list) and isinstance(right, list):
            return left + right
        arrays = isinstance(left, np.ndarray) or isinstance(right, np.ndarray)
        if arrays:
            a = left if isinstance(left, np.ndarray) else _require_num(left, f"'{op}' operand")
            b = right if isinstance(right, np.ndarray) else _require_num(right, f"'{op}' operand")
            try:
                with np.errstate(all="ignore"):
                    result = {
                        "+": np.add, "-": np.subtract, "*": np.multiply,
                        "/": np.divide, "%": np.mod,
                    }[op](a, b)
            except ValueError:
                raise ScriptRuntimeError(f"array shape mismatch in '{op}'", span) from None
            result = np.asarray(result, dtype=float)
            self._alloc(result.size, span)
            return result
        if is_num(left) and is_num(right):
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if op == "/":
                with np.errstate(all="ignore"):
                    return float(np.divide(left, right))
            if op == "%":
                with np.errstate(all="ignore"):
                    return float(np.mod(left, right))
        raise ScriptRuntimeError(
            f"unsupported operands for '{op}': {type_name(left)} and {type_name(right)}", span
        )

    def _index(self, node: ast.Index) -> Value:
        obj = self._eval(node.obj)
        idx = self._eval(node.index)
        span = node.span
        if isinstance(obj, dict):
            if not isinstance(idx, str):
                raise ScriptRuntimeError(f"map keys must be strings, got {type_name(idx)}", span)
            if idx not in obj:
                raise ScriptRuntimeError(f"map has no key '{idx}'", span)
            return obj[idx]
        if isinstance(obj, list):
            return obj[self._list_index(idx, len(obj), span)]
        if isinstance(obj, str):
            return obj[self._list_index(idx, len(obj), span)]
        if isinstance(obj, np.ndarray):
            i = self._list_index(idx, obj.shape[0], span)
            if obj.ndim == 1:
                return float(obj[i])
            row = np.array(obj[i], dtype=float)
            self._alloc(row.size, span)
            return row
        raise ScriptRuntimeError(f"cannot index {type_name(obj)}", span)

    def _slice(self, node: ast.SliceExpr) -> Value:
        obj = self._eval(node.obj)
        lo = None if node.lo is None else _require_whole(self._eval(node.lo), "slice bound")
        hi = None if node.hi is None else _require_whole(self._eval(node.hi), "slice bound")
        if isinstance(obj, (list, str)):
            return obj[lo:hi]
        if isinstance(obj, np.ndarray):
            out = np.array(obj[lo:hi], dtype=float)
            self._alloc(out.size, node.span)
            return out
        raise ScriptRuntimeError(f"cannot slice {type_name(obj)}", node.span)

    # -- calls

    def _call(self, node: ast.Call) -> Value:
        name = node.func
        args = [self._eval(a) for a in node.args]
        if name == "final_answer":
            raise _FinalAnswerSignal(self._final_answer(args, node.span))
        if name in self.forbidden:
            raise ForbiddenToolCall(name, node.span)
        if name in self.tools:
            try:
                return self.tools[name](args)
            except ToolError as exc:
                raise ScriptRuntimeError(str(exc), node.span) from None
        if name in _BUILTINS:
            try:
                return _BUILTINS[name](self, args, node.span)
            except (TypeError, ValueError) as exc:
                raise ScriptRuntimeError(f"{name}: {exc}", node.span) from None
        raise ScriptRuntimeError(f"unknown function '{name}'", node.span)

    def _final_answer(self, args: list, span: Span) -> FinalAnswer:
        if not 1 <= len(args) <= 3:
            raise ScriptRuntimeError("final_answer(text, value?, units?) takes 1 to 3 arguments", span)
        text = args[0] if isinstance(args[0], str) else display(args[0])
        value = None
        units = None
        if len(args) >= 2 and args[1] is not None:
            if not (is_num(args[1]) or isinstance(args[1], str)):
                raise ScriptRuntimeError("final_answer value must be a number or a string", span)
            value = args[1]
        if len(args) == 3 and args[2] is not None:
            if not isinstance(args[2], str):
                raise ScriptRuntimeError("final_answer units must be a string", span)
            units = args[2]
        return FinalAnswer(text=text, value=value, units=units)


def builtin_call(name: str, args: list) -> Value:
    """Standalone builtin dispatch, mainly for conformance tests."""
    interp = Interpreter()
    if name not in _BUILTINS:
        raise ScriptRuntimeError(f"unknown function '{name}'")
    try:
        return _BUILTINS[name](interp, args, (0, 0))
    except (TypeError, ValueError) as exc:
        raise ScriptRuntimeError(f"{name}: {exc}") from None


# --- builtin implementations -------------------------------------------------


def _arity(args: list, low: int, high: int, name: str, signature: str):
    if not low <= len(args) <= high:
        raise ScriptRuntimeError(f"{name}{signature} takes {low}" + (f" to {high}" if high != low else "") + " arguments")


def _bi_len(interp, args, span):
    _arity(args, 1, 1, "len", "(value)")
    v = args[0]
    if isinstance(v, (str, list, dict)):
        return float(len(v))
    if isinstance(v, np.ndarray):
        return float(v.shape[0])
    raise ScriptRuntimeError(f"len(value): cannot take length of {type_name(v)}", span)


def _bi_range(interp, args, span):
    _arity(args, 1, 2, "range", "(stop) or range(start, stop)")
    if len(args) == 1:
        start, stop = 0, _require_whole(args[0], "range stop")
    else:
        start = _require_whole(args[0], "range start")
        stop = _require_whole(args[1], "range stop")
    count = max(0, stop - start)
    interp._alloc(count, span)
    return np.arange(start, stop, dtype=float)


def _elementwise(fn):
    def apply(interp, args, span):
        _arity(args, 1, 1, fn.__name__, "(value)")
        v = args[0]
        if is_num(v):
            return float(fn(v))
        arr = _as_numeric_array(v, fn.__name__)
        interp._alloc(arr.size, span)
        return np.asarray([fn(float(x)) for x in arr.ravel()], dtype=float).reshape(arr.shape)
    return apply


def _round_half_away(x: float) -> float:
    return math.floor(x + 0.5) if x >= 0 else math.ceil(x - 0.5)


def _bi_sqrt_scalar(x: float) -> float:
    if x < 0:
        raise ValueError("sqrt of a negative number")
    return math.sqrt(x)


def _reduction(name, fn):
    def apply(interp, args, span):
        if name in ("min", "max") and len(args) >= 2:
            for a in args:
                _require_num(a, name)
            return float(fn(args))
        _arity(args, 1, 1, name, "(values)")
        arr = _as_numeric_array(args[0], name)
        if arr.size == 0:
            raise ScriptRuntimeError(f"{name} of an empty sequence", span)
        return float(fn(arr.ravel()))
    return apply


def _bi_argminmax(name, fn):
    def apply(interp, args, span):
        _arity(args, 1, 1, name, "(values)")
        arr = _as_numeric_array(args[0], name)
        if arr.ndim != 1:
            raise ScriptRuntimeError(f"{name} needs a 1-D array", span)
        if arr.size == 0:
            raise ScriptRuntimeError(f"{name} of an empty sequence", span)
        return float(fn(arr))
    return apply


def _bi_diff(interp, args, span):
    _arity(args, 1, 1, "diff", "(values)")
    arr = _as_numeric_array(args[0], "diff")
    if arr.ndim != 1:
        raise ScriptRuntimeError("diff needs a 1-D array", span)
    out = np.diff(arr)
    interp._alloc(out.size, span)
    return out.astype(float)


def _bi_sort(interp, args, span):
    _arity(args, 1, 1, "sort", "(values)")
    arr = _as_numeric_array(args[0], "sort")
    if arr.ndim != 1:
        raise ScriptRuntimeError("sort needs a 1-D array", span)
    interp._alloc(arr.size, span)
    return np.sort(arr).astype(float)


def _bi_zeros(interp, args, span):
    _arity(args, 1, 2, "zeros", "(n) or zeros(rows, cols)")
    dims = [_require_whole(a, "zeros dimension") for a in args]
    if any(d < 0 for d in dims):
        raise ScriptRuntimeError("zeros dimensions must be non-negative", span)
    count = dims[0] * (dims[1] if len(dims) == 2 else 1)
    interp._alloc(count, span)
    return np.zeros(dims[0] if len(dims) == 1 else (dims[0], dims[1]), dtype=float)


def _bi_print(interp, args, span):
    interp._emit(" ".join(display(a) for a in args) + "\n")
    return None


def _bi_str(interp, args, span):
    _arity(args, 1, 1, "str", "(value)")
    return display(args[0])


def _bi_keys(interp, args, span):
    _arity(args, 1, 1, "keys", "(map)")
    if not isinstance(args[0], dict):
        raise ScriptRuntimeError(f"keys(map): got {type_name(args[0])}", span)
    return list(args[0].keys())


def _bi_mean(interp, args, span):
    _arity(args, 1, 1, "mean", "(values)")
    arr = _as_numeric_array(args[0], "mean")
    if arr.size == 0:
        raise ScriptRuntimeError("mean of an empty sequence", span)
    return float(np.mean(arr))


def _bi_std(interp, args, span):
    _arity(args, 1, 1, "std", "(values)")
    arr = _as_numeric_array(args[0], "std")
    if arr.size == 0:
        raise ScriptRuntimeError("std of an empty sequence", span)
    return float(np.std(arr))


_BUILTINS: dict[str, Callable] = {
    "len": _bi_len,
    "range": _bi_range,
    "abs": _elementwise(abs),
    "sqrt": _elementwise(_bi_sqrt_scalar),
    "floor": _elementwise(math.floor),
    "round": _elementwise(_round_half_away),
    "min": _reduction("min", min),
    "max": _reduction("max", max),
    "sum": _reduction("sum", np.sum),
    "mean": _bi_mean,
    "std": _bi_std,
    "argmin": _bi_argminmax("argmin", np.argmin),
    "argmax": _bi_argminmax("argmax", np.argmax),
    "diff": _bi_diff,
    "sort": _bi_sort,
    "zeros": _bi_zeros,
    "print": _bi_print,
    "str": _bi_str,
    "keys": _bi_keys,
}
