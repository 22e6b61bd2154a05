"""
Tokenizer, recursive-descent parser and printer for kernel expressions.

Grammar (no implicit multiplication, names are case sensitive):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

'^' is right associative and binds tighter than unary minus, so -2^2 == -4.
"""
import re
from dataclasses import dataclass
from typing import List

from core.exceptions import ExprSyntaxError

from .models import BinOp, Call, Expr, Imaginary, Name, Neg, Number

FUNCTIONS = ("sin", "cos", "exp", "sqrt")

NUMBER = "number"
NAME = "name"
OP = "op"
LPAREN = "("
RPAREN = ")"
END = "end of input"

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^])"
    r"|(?P<lparen>\()"
    r"|(?P<rparen>\))"
)

_ATOM_START = (NUMBER, NAME, "'('", "'-'")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def _byte_offset(src: str, index: int) -> int:
    return len(src[:index].encode("utf-8"))


def tokenize(src: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        match = _TOKEN_RE.match(src, pos)
        if match is None:
            raise ExprSyntaxError(f"Unexpected character {src[pos]!r}", _byte_offset(src, pos))
        kind = match.lastgroup
        if kind == "number":
            tokens.append(Token(NUMBER, match.group(), _byte_offset(src, pos)))
        elif kind == "name":
            tokens.append(Token(NAME, match.group(), _byte_offset(src, pos)))
        elif kind == "op":
            tokens.append(Token(OP, match.group(), _byte_offset(src, pos)))
        elif kind == "lparen":
            tokens.append(Token(LPAREN, "(", _byte_offset(src, pos)))
        elif kind == "rparen":
            tokens.append(Token(RPAREN, ")", _byte_offset(src, pos)))
        pos = match.end()
    tokens.append(Token(END, "", _byte_offset(src, len(src))))
    return tokens


class Parser:
    def __init__(self, src: str, complex_mode: bool = True):
        self.src = src
        self.complex_mode = complex_mode
        self.tokens = tokenize(src)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _is_op(self, *ops: str) -> bool:
        return self.current.kind == OP and self.current.text in ops

    def _fail(self, expected) -> None:
        token = self.current
        found = "end of input" if token.kind == END else repr(token.text)
        raise ExprSyntaxError(f"Unexpected {found}", token.offset, expected)

    def parse(self) -> Expr:
        expr = self.expr()
        if self.current.kind != END:
            self._fail(("operator", "')'") if self.current.kind == RPAREN else ("operator", END))
        return expr

    def expr(self) -> Expr:
        node = self.term()
        while self._is_op("+", "-"):
            op = self._advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self._is_op("*", "/"):
            op = self._advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self._is_op("-"):
            self._advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self._is_op("^"):
            self._advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        token = self.current
        if token.kind == NUMBER:
            self._advance()
            return Number(float(token.text))
        if token.kind == NAME:
            self._advance()
            if self.current.kind == LPAREN:
                if token.text not in FUNCTIONS:
                    raise ExprSyntaxError(f"Unknown function '{token.text}'", token.offset, FUNCTIONS)
                self._advance()
                arg = self.expr()
                self._expect_rparen()
                return Call(token.text, arg)
            if token.text == "i" and self.complex_mode:
                return Imaginary()
            return Name(token.text)
        if token.kind == LPAREN:
            self._advance()
            inner = self.expr()
            self._expect_rparen()
            return inner
        self._fail(_ATOM_START)

    def _expect_rparen(self) -> None:
        if self.current.kind != RPAREN:
            self._fail(("')'", "operator"))
        self._advance()


def parse_expr(src: str, complex_mode: bool = True) -> Expr:
    return Parser(src, complex_mode).parse()


def format_expr(expr: Expr) -> str:
    """Fully parenthesized source that parses back to the same tree"""
    if isinstance(expr, Number):
        return repr(expr.value)
    if isinstance(expr, Imaginary):
        return "i"
    if isinstance(expr, Name):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-{format_expr(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({format_expr(expr.left)} {expr.op} {format_expr(expr.right)})"
    if isinstance(expr, Call):
        return f"{expr.func}({format_expr(expr.arg)})"
    raise TypeError(f"Not an expression node: {expr!r}")
