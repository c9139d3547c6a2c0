"""Recursive-descent parser producing the analysis-script AST.

Every parse either yields a Script or raises ParseError with the first
diagnostic (line, column, message, expected-token set). Expression nesting
is depth-capped so adversarial input cannot exhaust the host stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import LexError, Token, tokenize

MAX_EXPR_DEPTH = 60  # ~10 host stack frames per level; keep clear of the interpreter limit

Span = tuple[int, int]


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        detail = f"line {line}, col {col}: {message}"
        if expected:
            detail += " (expected " + " or ".join(sorted(expected)) + ")"
        super().__init__(detail)
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected


# --- expressions -----------------------------------------------------------


@dataclass
class Literal:
    value: object
    span: Span


@dataclass
class Name:
    id: str
    span: Span


@dataclass
class ListLit:
    items: list
    span: Span


@dataclass
class MapLit:
    pairs: list  # (key expr, value expr)
    span: Span


@dataclass
class BinOp:
    op: str
    left: object
    right: object
    span: Span


@dataclass
class UnaryOp:
    op: str
    operand: object
    span: Span


@dataclass
class BoolOp:
    op: str  # and | or
    left: object
    right: object
    span: Span


@dataclass
class NotOp:
    operand: object
    span: Span


@dataclass
class Compare:
    op: str
    left: object
    right: object
    span: Span


@dataclass
class Call:
    func: str
    args: list
    span: Span


@dataclass
class Index:
    obj: object
    index: object
    span: Span


@dataclass
class SliceExpr:
    obj: object
    lo: object | None
    hi: object | None
    span: Span


# --- statements -------------------------------------------------------------


@dataclass
class Assign:
    target: object  # Name or Index
    value: object
    span: Span


@dataclass
class ExprStmt:
    expr: object
    span: Span


@dataclass
class If:
    branches: list  # (condition, body statements)
    orelse: list | None
    span: Span


@dataclass
class For:
    var: str
    iterable: object
    body: list
    span: Span


@dataclass
class While:
    cond: object
    body: list
    span: Span


@dataclass
class Script:
    statements: list
    source: str = ""


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # -- token plumbing

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def check(self, kind: str) -> bool:
        return self.peek().kind == kind

    def match(self, *kinds: str) -> Token | None:
        if self.peek().kind in kinds:
            return self.advance()
        return None

    def expect(self, kind: str, context: str = "") -> Token:
        tok = self.peek()
        if tok.kind != kind:
            what = f"unexpected {tok.kind or 'end of input'}" + (f" in {context}" if context else "")
            raise ParseError(what, tok.line, tok.col, expected=(kind,))
        return self.advance()

    def skip_newlines(self):
        while self.check("NEWLINE"):
            self.advance()

    # -- statements

    def parse_program(self) -> list:
        stmts = []
        self.skip_newlines()
        while not self.check("EOF"):
            stmts.append(self.parse_statement())
            self.skip_newlines()
        return stmts

    def end_statement(self):
        if self.check("NEWLINE"):
            self.advance()
            return
        if self.check("}") or self.check("EOF"):
            return
        tok = self.peek()
        raise ParseError(f"unexpected {tok.kind} after statement", tok.line, tok.col, expected=("NEWLINE",))

    def parse_statement(self):
        tok = self.peek()
        if tok.kind == "if":
            return self.parse_if()
        if tok.kind == "for":
            return self.parse_for()
        if tok.kind == "while":
            return self.parse_while()
        expr = self.parse_expression()
        if self.check("="):
            eq = self.advance()
            if not isinstance(expr, (Name, Index)):
                raise ParseError("assignment target must be a name or an index", eq.line, eq.col)
            value = self.parse_expression()
            self.end_statement()
            return Assign(target=expr, value=value, span=(tok.line, tok.col))
        self.end_statement()
        return ExprStmt(expr=expr, span=(tok.line, tok.col))

    def parse_block(self) -> list:
        self.expect("{", "block")
        stmts = []
        self.skip_newlines()
        while not self.check("}"):
            if self.check("EOF"):
                tok = self.peek()
                raise ParseError("unterminated block", tok.line, tok.col, expected=("}",))
            stmts.append(self.parse_statement())
            self.skip_newlines()
        self.expect("}")
        return stmts

    def parse_if(self):
        start = self.expect("if")
        branches = [(self.parse_expression(), self.parse_block())]
        orelse = None
        while True:
            if self._block_continues():
                self.skip_newlines()
            if self.check("elif"):
                self.advance()
                branches.append((self.parse_expression(), self.parse_block()))
            elif self.check("else"):
                self.advance()
                orelse = self.parse_block()
                break
            else:
                break
        return If(branches=branches, orelse=orelse, span=(start.line, start.col))

    def _block_continues(self) -> bool:
        # allow `elif` / `else` on the line after a closing brace
        i = self.pos
        while self.tokens[i].kind == "NEWLINE":
            i += 1
        return self.tokens[i].kind in ("elif", "else")

    def parse_for(self):
        start = self.expect("for")
        var = self.expect("NAME", "for loop")
        self.expect("in", "for loop")
        iterable = self.parse_expression()
        body = self.parse_block()
        return For(var=var.text, iterable=iterable, body=body, span=(start.line, start.col))

    def parse_while(self):
        start = self.expect("while")
        cond = self.parse_expression()
        body = self.parse_block()
        return While(cond=cond, body=body, span=(start.line, start.col))

    # -- expressions

    def parse_expression(self):
        self.depth += 1
        if self.depth > MAX_EXPR_DEPTH:
            tok = self.peek()
            raise ParseError("expression nesting too deep", tok.line, tok.col)
        try:
            return self.parse_or()
        finally:
            self.depth -= 1

    def parse_or(self):
        left = self.parse_and()
        while self.check("or"):
            op = self.advance()
            right = self.parse_and()
            left = BoolOp(op="or", left=left, right=right, span=(op.line, op.col))
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.check("and"):
            op = self.advance()
            right = self.parse_not()
            left = BoolOp(op="and", left=left, right=right, span=(op.line, op.col))
        return left

    def parse_not(self):
        if self.check("not"):
            op = self.advance()
            return NotOp(operand=self.parse_not(), span=(op.line, op.col))
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        if self.peek().kind in ("==", "!=", "<", "<=", ">", ">="):
            op = self.advance()
            right = self.parse_additive()
            return Compare(op=op.kind, left=left, right=right, span=(op.line, op.col))
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            right = self.parse_multiplicative()
            left = BinOp(op=op.kind, left=left, right=right, span=(op.line, op.col))
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.peek().kind in ("*", "/", "%"):
            op = self.advance()
            right = self.parse_unary()
            left = BinOp(op=op.kind, left=left, right=right, span=(op.line, op.col))
        return left

    def parse_unary(self):
        if self.check("-"):
            op = self.advance()
            self.depth += 1
            if self.depth > MAX_EXPR_DEPTH:
                raise ParseError("expression nesting too deep", op.line, op.col)
            try:
                return UnaryOp(op="-", operand=self.parse_unary(), span=(op.line, op.col))
            finally:
                self.depth -= 1
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            if self.check("("):
                tok = self.peek()
                if not isinstance(expr, Name):
                    raise ParseError("only named functions can be called", tok.line, tok.col)
                self.advance()
                args = []
                if not self.check(")"):
                    args.append(self.parse_expression())
                    while self.match(","):
                        args.append(self.parse_expression())
                self.expect(")", "call")
                expr = Call(func=expr.id, args=args, span=expr.span)
            elif self.check("["):
                tok = self.advance()
                lo = None if self.check(":") else self.parse_expression()
                if self.match(":"):
                    hi = None if self.check("]") else self.parse_expression()
                    self.expect("]", "slice")
                    expr = SliceExpr(obj=expr, lo=lo, hi=hi, span=(tok.line, tok.col))
                else:
                    self.expect("]", "index")
                    expr = Index(obj=expr, index=lo, span=(tok.line, tok.col))
            else:
                return expr

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return Literal(value=float(tok.text), span=(tok.line, tok.col))
        if tok.kind == "STRING":
            self.advance()
            return Literal(value=tok.text, span=(tok.line, tok.col))
        if tok.kind == "true":
            self.advance()
            return Literal(value=True, span=(tok.line, tok.col))
        if tok.kind == "false":
            self.advance()
            return Literal(value=False, span=(tok.line, tok.col))
        if tok.kind == "null":
            self.advance()
            return Literal(value=None, span=(tok.line, tok.col))
        if tok.kind == "NAME":
            self.advance()
            return Name(id=tok.text, span=(tok.line, tok.col))
        if tok.kind == "(":
            self.advance()
            expr = self.parse_expression()
            self.expect(")", "parenthesised expression")
            return expr
        if tok.kind == "[":
            self.advance()
            items = []
            if not self.check("]"):
                items.append(self.parse_expression())
                while self.match(","):
                    if self.check("]"):
                        break
                    items.append(self.parse_expression())
            self.expect("]", "list literal")
            return ListLit(items=items, span=(tok.line, tok.col))
        if tok.kind == "{":
            self.advance()
            pairs = []
            self.skip_newlines()
            if not self.check("}"):
                pairs.append(self._parse_map_pair())
                while True:
                    self.skip_newlines()
                    if not self.match(","):
                        break
                    self.skip_newlines()
                    if self.check("}"):
                        break
                    pairs.append(self._parse_map_pair())
                self.skip_newlines()
            self.expect("}", "map literal")
            return MapLit(pairs=pairs, span=(tok.line, tok.col))
        raise ParseError(
            f"unexpected {tok.kind or 'end of input'}",
            tok.line,
            tok.col,
            expected=("NUMBER", "STRING", "NAME", "(", "[", "{"),
        )

    def _parse_map_pair(self):
        key = self.parse_expression()
        self.expect(":", "map literal")
        value = self.parse_expression()
        return (key, value)


def parse(source: str, max_source_chars: int | None = None) -> Script:
    """Parse a script or raise ParseError with the first diagnostic."""
    if max_source_chars is not None and len(source) > max_source_chars:
        raise ParseError(f"source exceeds {max_source_chars} characters", 1, 1)
    try:
        tokens = tokenize(source)
    except LexError as exc:
        raise ParseError(exc.message, exc.line, exc.col) from None
    parser = _Parser(tokens)
    statements = parser.parse_program()
    return Script(statements=statements, source=source)
