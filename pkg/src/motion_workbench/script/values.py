"""Runtime value model for the analysis scripting language.

Values map onto Python natives: Null=None, Bool=bool, Num=float (binary64),
Str=str, Array=1-D/2-D float ndarray, List=list, Map=str-keyed dict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Value = object  # None | bool | float | str | np.ndarray | list | dict


@dataclass
class FinalAnswer:
    """Terminal answer emitted by a script via final_answer(...)."""

    text: str
    value: float | str | None = None
    units: str | None = None

    def value_kind(self) -> str | None:
        if self.value is None:
            return None
        return "number" if isinstance(self.value, float) else "string"


def type_name(v: Value) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, float):
        return "num"
    if isinstance(v, str):
        return "str"
    if isinstance(v, np.ndarray):
        return "array"
    if isinstance(v, list):
        return "list"
    if isinstance(v, dict):
        return "map"
    return type(v).__name__


def is_num(v: Value) -> bool:
    return isinstance(v, float) and not isinstance(v, bool)


def format_number(x: float) -> str:
    if x != x:
        return "nan"
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def display(v: Value, quote_strings: bool = False) -> str:
    """Printable form; strings are quoted only inside containers."""
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_number(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"' if quote_strings else v
    if isinstance(v, np.ndarray):
        if v.ndim == 1:
            return "[" + ", ".join(format_number(float(x)) for x in v) + "]"
        return "[" + ", ".join(display(row) for row in v) + "]"
    if isinstance(v, list):
        return "[" + ", ".join(display(x, quote_strings=True) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f'"{k}": {display(x, quote_strings=True)}' for k, x in v.items()) + "}"
    return str(v)
