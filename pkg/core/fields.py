"""Pydantic field types for expressions and exact rationals."""

from fractions import Fraction
from typing import Annotated, Any

from pydantic import BeforeValidator, PlainSerializer

from core.expr import Expr, const
from core.parser import parse
from core.printer import to_string
from utils.errors import UsageError


def parse_rational(value: Any) -> Fraction:
    """Exact rational from an int, Fraction or text such as ``-3``, ``1/2``, ``0.25``."""
    if isinstance(value, bool):
        raise UsageError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"not a rational number: {value!r}") from e
    raise UsageError(f"not a rational number: {value!r}")


def coerce_expr(value: Any) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, Fraction, float)) and not isinstance(value, bool):
        return const(value)
    raise UsageError(f"cannot read an expression from {value!r}")


ExprField = Annotated[
    Expr,
    BeforeValidator(coerce_expr),
    PlainSerializer(to_string, return_type=str),
]

Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(str, return_type=str),
]
