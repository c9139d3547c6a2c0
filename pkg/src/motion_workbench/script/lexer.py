"""Tokenizer for the analysis scripting language.

Statements are newline-terminated; newlines inside parentheses and square
brackets are suppressed so call argument lists and array literals can span
lines. Curly braces are left alone because they delimit both blocks and map
literals; the parser skips newlines inside map literals itself.
"""

from __future__ import annotations

from dataclasses import dataclass


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col


KEYWORDS = {
    "if", "elif", "else", "for", "in", "while",
    "and", "or", "not", "true", "false", "null",
}

TWO_CHAR_OPS = ("==", "!=", "<=", ">=")
ONE_CHAR_OPS = "+-*/%=<>()[]{},:"


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER STRING NAME NEWLINE EOF, keyword, or operator lexeme
    text: str
    line: int
    col: int

    def __repr__(self):
        return f"{self.kind}({self.text!r})@{self.line}:{self.col}"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(source)
    paren_depth = 0

    def emit(kind: str, text: str, l: int, c: int):
        tokens.append(Token(kind, text, l, c))

    while i < n:
        ch = source[i]
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            if paren_depth == 0 and tokens and tokens[-1].kind != "NEWLINE":
                emit("NEWLINE", "\n", line, col)
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while True:
                if i >= n or source[i] == "\n":
                    raise LexError("unterminated string literal", start_line, start_col)
                c = source[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise LexError("unterminated string escape", line, col)
                    esc = source[i + 1]
                    mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
                    if mapped is None:
                        raise LexError(f"unknown escape \\{esc}", line, col)
                    buf.append(mapped)
                    i += 2
                    col += 2
                else:
                    buf.append(c)
                    i += 1
                    col += 1
            emit("STRING", "".join(buf), start_line, start_col)
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            start_line, start_col = line, col
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == ".":
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise LexError(f"malformed number {text!r}", start_line, start_col) from None
            emit("NUMBER", text, start_line, start_col)
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            emit(text if text in KEYWORDS else "NAME", text, line, col)
            col += j - i
            i = j
            continue
        two = source[i : i + 2]
        if two in TWO_CHAR_OPS:
            emit(two, two, line, col)
            i += 2
            col += 2
            continue
        if ch in ONE_CHAR_OPS:
            if ch in "([":
                paren_depth += 1
            elif ch in ")]":
                paren_depth = max(0, paren_depth - 1)
            emit(ch, ch, line, col)
            i += 1
            col += 1
            continue
        raise LexError(f"unexpected character {ch!r}", line, col)

    if tokens and tokens[-1].kind != "NEWLINE":
        emit("NEWLINE", "\n", line, col)
    emit("EOF", "", line, col)
    return tokens
