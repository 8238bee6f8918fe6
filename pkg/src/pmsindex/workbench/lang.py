"""Toy imperative language: tokens, AST, parser, and source rendering.

The language covers integers, strings, booleans, assignment, arithmetic,
string concat/contains/replace, if/else, while, function calls, and an
explicit ``print`` output statement.  Every executable statement receives
a stable integer ID in source order, starting at 1.  ``if``/``while``
headers are executable statements (the condition evaluation); function
headers and braces are not.

Grammar::

    program   := function*
    function  := "func" NAME "(" [NAME ("," NAME)*] ")" block
    block     := "{" statement* "}"
    statement := NAME "=" expr ";"
               | "if" "(" expr ")" block ["else" block]
               | "while" "(" expr ")" block
               | "print" expr ";"
               | "return" [expr] ";"
               | NAME "(" [expr ("," expr)*] ")" ";"
    expr      := or ["?" expr ":" expr]
    or        := and ("||" and)*
    and       := cmp ("&&" cmp)*
    cmp       := add (("=="|"!="|"<"|"<="|">"|">=") add)?
    add       := mul (("+"|"-") mul)*
    mul       := unary (("*"|"/") unary)*
    unary     := ("!"|"-") unary | primary
    primary   := INT | STRING | "true" | "false" | NAME
               | NAME "(" [expr ("," expr)*] ")" | "(" expr ")"

``contains(s, sub)`` and ``replace(s, old, new)`` are builtin calls; ``+``
concatenates when both operands are strings.  ``/`` is integer division
truncating toward zero.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ParseError

KEYWORDS = {"func", "if", "else", "while", "print", "return", "true", "false"}
BUILTINS = {"contains": 2, "replace": 3}
ARITH_OPS = ("+", "-", "*", "/")
REL_OPS = ("==", "!=", "<", "<=", ">", ">=")


# ---------------------------------------------------------------------------
# AST


@dataclass
class Expr:
    pass


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class StrLit(Expr):
    value: str


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class Var(Expr):
    name: str


@dataclass
class Unary(Expr):
    op: str  # "!" or "-"
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Ternary(Expr):
    cond: Expr
    then: Expr
    other: Expr


@dataclass
class Call(Expr):
    name: str
    args: list[Expr]


@dataclass
class Stmt:
    sid: int = field(default=0, init=False, compare=False)


@dataclass
class Assign(Stmt):
    name: str
    value: Expr


@dataclass
class Print(Stmt):
    value: Expr


@dataclass
class Return(Stmt):
    value: Expr | None


@dataclass
class ExprStmt(Stmt):
    call: Call


@dataclass
class If(Stmt):
    cond: Expr
    then: list[Stmt]
    other: list[Stmt] | None  # None = no else


@dataclass
class While(Stmt):
    cond: Expr
    body: list[Stmt]


@dataclass
class Function:
    name: str
    params: list[str]
    body: list[Stmt]


@dataclass
class Program:
    """Parsed program with dense statement IDs 1..l and a named entry."""

    functions: dict[str, Function]
    statements: dict[int, Stmt]  # sid -> statement node
    entry: str = "main"

    @property
    def l(self) -> int:
        return len(self.statements)

    def render(self) -> str:
        return render_program(self)


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*/<>!?:=(){},;])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass
class Token:
    kind: str
    value: str
    line: int
    col: int


def _unescape(raw: str, line: int, col: int) -> str:
    out, i = [], 1
    while i < len(raw) - 1:
        ch = raw[i]
        if ch == "\\":
            esc = raw[i + 1]
            if esc not in _ESCAPES:
                raise ParseError(f"bad escape \\{esc}", line, col)
            out.append(_ESCAPES[esc])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup or ""
        text = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            for i, ch in enumerate(text):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        elif kind == "comment":
            pass
        elif kind == "string":
            tokens.append(Token("string", _unescape(text, line, col), line, col))
        elif kind == "name" and text in KEYWORDS:
            tokens.append(Token(text, text, line, col))
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.next_sid = 1
        self.statements: dict[int, Stmt] = {}

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.value!r}", tok.line, tok.col)
        return self.advance()

    def _register(self, stmt: Stmt) -> Stmt:
        stmt.sid = self.next_sid
        self.next_sid += 1
        self.statements[stmt.sid] = stmt
        return stmt

    def parse_program(self) -> Program:
        functions: dict[str, Function] = {}
        while self.peek().kind != "eof":
            fn = self.parse_function()
            if fn.name in functions:
                tok = self.peek()
                raise ParseError(f"duplicate function {fn.name!r}", tok.line, tok.col)
            functions[fn.name] = fn
        if not functions:
            tok = self.peek()
            raise ParseError("program has no functions", tok.line, tok.col)
        entry = "main" if "main" in functions else next(iter(functions))
        return Program(functions=functions, statements=self.statements, entry=entry)

    def parse_function(self) -> Function:
        self.expect("func")
        name = self.expect("name").value
        self._expect_op("(")
        params: list[str] = []
        if not self._at_op(")"):
            params.append(self.expect("name").value)
            while self._at_op(","):
                self._expect_op(",")
                params.append(self.expect("name").value)
        self._expect_op(")")
        body = self.parse_block()
        if not body:
            body = [self._register(Return(value=None))]  # empty body still executes a return
        return Function(name=name, params=params, body=body)

    def _at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.value == op

    def _expect_op(self, op: str) -> Token:
        tok = self.peek()
        if tok.kind != "op" or tok.value != op:
            raise ParseError(f"expected {op!r}, found {tok.value!r}", tok.line, tok.col)
        return self.advance()

    def parse_block(self) -> list[Stmt]:
        self._expect_op("{")
        stmts: list[Stmt] = []
        while not self._at_op("}"):
            if self.peek().kind == "eof":
                tok = self.peek()
                raise ParseError("unbalanced braces: missing '}'", tok.line, tok.col)
            stmts.append(self.parse_statement())
        self._expect_op("}")
        return stmts

    def parse_statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "if":
            self.advance()
            stmt = If(cond=None, then=[], other=None)  # type: ignore[arg-type]
            self._register(stmt)  # header ID precedes body IDs
            self._expect_op("(")
            stmt.cond = self.parse_expr()
            self._expect_op(")")
            stmt.then = self.parse_block()
            if self.peek().kind == "else":
                self.advance()
                stmt.other = self.parse_block()
            return stmt
        if tok.kind == "while":
            self.advance()
            stmt_w = While(cond=None, body=[])  # type: ignore[arg-type]
            self._register(stmt_w)
            self._expect_op("(")
            stmt_w.cond = self.parse_expr()
            self._expect_op(")")
            stmt_w.body = self.parse_block()
            return stmt_w
        if tok.kind == "print":
            self.advance()
            value = self.parse_expr()
            self._expect_op(";")
            return self._register(Print(value=value))
        if tok.kind == "return":
            self.advance()
            value = None if self._at_op(";") else self.parse_expr()
            self._expect_op(";")
            return self._register(Return(value=value))
        if tok.kind == "name":
            if self.peek(1).kind == "op" and self.peek(1).value == "(":
                call = self.parse_primary()
                if not isinstance(call, Call):
                    raise ParseError("expected call statement", tok.line, tok.col)
                self._expect_op(";")
                return self._register(ExprStmt(call=call))
            name = self.advance().value
            self._expect_op("=")
            value = self.parse_expr()
            self._expect_op(";")
            return self._register(Assign(name=name, value=value))
        raise ParseError(f"unexpected token {tok.value!r}", tok.line, tok.col)

    def parse_expr(self) -> Expr:
        cond = self.parse_or()
        if self._at_op("?"):
            self._expect_op("?")
            then = self.parse_expr()
            self._expect_op(":")
            other = self.parse_expr()
            return Ternary(cond=cond, then=then, other=other)
        return cond

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self._at_op("||"):
            self._expect_op("||")
            left = Binary(op="||", left=left, right=self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_cmp()
        while self._at_op("&&"):
            self._expect_op("&&")
            left = Binary(op="&&", left=left, right=self.parse_cmp())
        return left

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        tok = self.peek()
        if tok.kind == "op" and tok.value in REL_OPS:
            self.advance()
            return Binary(op=tok.value, left=left, right=self.parse_add())
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.peek().kind == "op" and self.peek().value in ("+", "-"):
            op = self.advance().value
            left = Binary(op=op, left=left, right=self.parse_mul())
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind == "op" and self.peek().value in ("*", "/"):
            op = self.advance().value
            left = Binary(op=op, left=left, right=self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.value in ("!", "-"):
            self.advance()
            return Unary(op=tok.value, operand=self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLit(value=int(tok.value))
        if tok.kind == "string":
            self.advance()
            return StrLit(value=tok.value)
        if tok.kind == "true":
            self.advance()
            return BoolLit(value=True)
        if tok.kind == "false":
            self.advance()
            return BoolLit(value=False)
        if tok.kind == "name":
            name = self.advance().value
            if self._at_op("("):
                self._expect_op("(")
                args: list[Expr] = []
                if not self._at_op(")"):
                    args.append(self.parse_expr())
                    while self._at_op(","):
                        self._expect_op(",")
                        args.append(self.parse_expr())
                self._expect_op(")")
                return Call(name=name, args=args)
            return Var(name=name)
        if self._at_op("("):
            self._expect_op("(")
            inner = self.parse_expr()
            self._expect_op(")")
            return inner
        raise ParseError(f"unexpected token {tok.value!r}", tok.line, tok.col)


def parse_program(source: str) -> Program:
    """Parse toy-language source into a :class:`Program`.

    Raises :class:`~pmsindex.errors.ParseError` with line/column on any
    syntax problem, signalling an unusable fixture.
    """
    return _Parser(tokenize(source)).parse_program()


# ---------------------------------------------------------------------------
# Rendering (canonical source; parse(render(p)) preserves statement IDs)

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


def render_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return f'"{_escape(e.value)}"'
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        return f"{e.op}{render_expr(e.operand, 6)}"
    if isinstance(e, Binary):
        prec = _PRECEDENCE[e.op]
        text = f"{render_expr(e.left, prec)} {e.op} {render_expr(e.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(e, Ternary):
        text = f"{render_expr(e.cond, 1)} ? {render_expr(e.then)} : {render_expr(e.other)}"
        return f"({text})" if parent_prec > 0 else text
    if isinstance(e, Call):
        return f"{e.name}({', '.join(render_expr(a) for a in e.args)})"
    raise TypeError(f"unknown expression node {e!r}")


def render_stmt(s: Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Assign):
        return [f"{pad}{s.name} = {render_expr(s.value)};"]
    if isinstance(s, Print):
        return [f"{pad}print {render_expr(s.value)};"]
    if isinstance(s, Return):
        return [f"{pad}return;" if s.value is None else f"{pad}return {render_expr(s.value)};"]
    if isinstance(s, ExprStmt):
        return [f"{pad}{render_expr(s.call)};"]
    if isinstance(s, If):
        lines = [f"{pad}if ({render_expr(s.cond)}) {{"]
        for sub in s.then:
            lines.extend(render_stmt(sub, indent + 1))
        if s.other is None:
            lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}}} else {{")
            for sub in s.other:
                lines.extend(render_stmt(sub, indent + 1))
            lines.append(f"{pad}}}")
        return lines
    if isinstance(s, While):
        lines = [f"{pad}while ({render_expr(s.cond)}) {{"]
        for sub in s.body:
            lines.extend(render_stmt(sub, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"unknown statement node {s!r}")


def render_program(p: Program) -> str:
    lines: list[str] = []
    for fn in p.functions.values():
        lines.append(f"func {fn.name}({', '.join(fn.params)}) {{")
        for stmt in fn.body:
            lines.extend(render_stmt(stmt, 1))
        lines.append("}")
        lines.append("")
    return "\n".join(lines)
