"""Sandboxed analysis scripting language: lexer, parser, interpreter."""

from .interpreter import (
    BUILTIN_NAMES,
    ExecError,
    ExecOutcome,
    ForbiddenToolCall,
    Interpreter,
    Limits,
    ToolError,
    builtin_call,
)
from .parser import ParseError, Script, parse
from .values import FinalAnswer, display

__all__ = [
    "BUILTIN_NAMES",
    "ExecError",
    "ExecOutcome",
    "FinalAnswer",
    "ForbiddenToolCall",
    "Interpreter",
    "Limits",
    "ParseError",
    "Script",
    "ToolError",
    "builtin_call",
    "display",
    "parse",
]
