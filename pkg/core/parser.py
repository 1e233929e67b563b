"""
Recursive-descent parser for the expression grammar.

    expr     := ['+'|'-'] term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := ('-'|'+') factor | power
    power    := primary ('^' exponent)*
    exponent := ['-'|'+'] INT | '(' ['-'|'+'] INT ')'
    primary  := NUMBER | VARIABLE | FUNCTION '(' expr ')' | '(' expr ')'

A leading minus negates the whole first term, so ``-2*t`` is ``-(2*t)`` and
``-x^2`` is ``-(x^2)``. Integer literals are exact, decimals are floats, and a
quotient of two exact literals such as ``3/4`` is read as one rational
constant, which is how the printer writes rationals.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from core.expr import FUNCTIONS, VARIABLES, Add, Apply, Const, Div, Expr, Float, Mul, Neg, Pow, Var
from utils.errors import ExprSyntaxError, UnknownIdentifierError

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?|\.\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)
_TRAILING_SPACE = re.compile(r"\s*")


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "ident" | "op" | "end"
    text: str
    offset: int


def tokenize(source: str) -> List[Token]:
    """Split ``source`` into tokens carrying their byte offsets."""
    tokens: List[Token] = []
    pos = 0
    while True:
        pos = _TRAILING_SPACE.match(source, pos).end()
        if pos >= len(source):
            break
        match = _TOKEN.match(source, pos)
        if match is None or match.end() == pos:
            raise ExprSyntaxError(
                f"unexpected character {source[pos]!r}", _byte_offset(source, pos), source
            )
        kind = match.lastgroup or "op"
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), _byte_offset(source, start)))
        pos = match.end()
    tokens.append(Token("end", "", len(source.encode("utf-8"))))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class Parser:
    """Single-use parser over one source string."""

    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _accept(self, text: str) -> Optional[Token]:
        if self.current.kind == "op" and self.current.text == text:
            return self._advance()
        return None

    def _expect(self, text: str) -> Token:
        token = self._accept(text)
        if token is None:
            raise self._error(f"expected {text!r}")
        return token

    def _error(self, message: str) -> ExprSyntaxError:
        token = self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        return ExprSyntaxError(f"{message}, found {found}", token.offset, self.source)

    def parse(self) -> Expr:
        if self.current.kind == "end":
            raise self._error("empty expression")
        tree = self.expr()
        if self.current.kind != "end":
            raise self._error("unexpected token")
        return tree

    def expr(self) -> Expr:
        terms: List[Expr] = []
        if self._accept("-"):
            terms.append(Neg(self.term()))
        else:
            self._accept("+")
            terms.append(self.term())
        while True:
            if self._accept("+"):
                terms.append(self.term())
            elif self._accept("-"):
                terms.append(Neg(self.term()))
            else:
                break
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self) -> Expr:
        pending: List[Expr] = [self.factor()]
        while True:
            if self._accept("*"):
                pending.append(self.factor())
            elif self._accept("/"):
                numerator = pending[0] if len(pending) == 1 else Mul(tuple(pending))
                pending = [_divide(numerator, self.factor())]
            else:
                break
        return pending[0] if len(pending) == 1 else Mul(tuple(pending))

    def factor(self) -> Expr:
        if self._accept("-"):
            return Neg(self.factor())
        if self._accept("+"):
            return self.factor()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        while self._accept("^"):
            base = Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        parenthesized = self._accept("(") is not None
        sign = -1 if self._accept("-") else 1
        if sign == 1:
            self._accept("+")
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise self._error("exponent must be an integer literal")
        self._advance()
        if parenthesized:
            self._expect(")")
        return sign * int(token.text)

    def primary(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            if "." in token.text:
                return Float(float(token.text))
            return Const(Fraction(int(token.text)))
        if token.kind == "ident":
            self._advance()
            if token.text in VARIABLES:
                return Var(token.text)
            if token.text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Apply(token.text, arg)
            raise UnknownIdentifierError(token.text, token.offset, self.source)
        if self._accept("("):
            inner = self.expr()
            self._expect(")")
            return inner
        raise self._error("expected a number, variable, function or '('")


def _divide(num: Expr, den: Expr) -> Expr:
    if isinstance(num, Const) and isinstance(den, Const) and den.value != 0:
        return Const(num.value / den.value)
    return Div(num, den)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    return Parser(source).parse()
