"""Canonical printer: emits the same grammar the parser reads."""

from fractions import Fraction
from typing import Tuple

import numpy as np

from core.expr import Add, Apply, Const, Div, Expr, Float, Mul, Neg, Pow, Var

# Binding strength of the printed text; higher binds tighter.
SUM, NEG, PROD, POW, ATOM = 1, 2, 3, 4, 5


def to_string(e: Expr) -> str:
    """Render ``e`` in the expression grammar."""
    return _render(e)[0]


def _wrap(e: Expr, minimum: int) -> str:
    text, prec = _render(e)
    return text if prec >= minimum else f"({text})"


def _number(value: Fraction) -> Tuple[str, int]:
    magnitude = abs(value)
    if magnitude.denominator == 1:
        text, prec = str(magnitude.numerator), ATOM
    else:
        text, prec = f"{magnitude.numerator}/{magnitude.denominator}", PROD
    if value < 0:
        return "-" + text, NEG
    return text, prec


def _float(value: float) -> Tuple[str, int]:
    text = np.format_float_positional(abs(value), trim="0")
    if value < 0 or (value == 0 and np.signbit(value)):
        return "-" + text, NEG
    return text, ATOM


def _render(e: Expr) -> Tuple[str, int]:
    if isinstance(e, Const):
        return _number(e.value)
    if isinstance(e, Float):
        return _float(e.value)
    if isinstance(e, Var):
        return e.name, ATOM
    if isinstance(e, Apply):
        return f"{e.func}({to_string(e.arg)})", ATOM
    if isinstance(e, Pow):
        exponent = str(e.exponent) if e.exponent >= 0 else f"(-{-e.exponent})"
        return f"{_wrap(e.base, ATOM)}^{exponent}", POW
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, PROD), NEG
    if isinstance(e, Mul):
        if not e.factors:
            return "1", ATOM
        return "*".join(_wrap(f, POW) for f in e.factors), PROD
    if isinstance(e, Div):
        return f"{_wrap(e.num, PROD)}/{_wrap(e.den, POW)}", PROD
    if isinstance(e, Add):
        if not e.terms:
            return "0", ATOM
        parts = [_wrap(e.terms[0], NEG)]
        for term in e.terms[1:]:
            if isinstance(term, Neg):
                parts.append(" - " + _wrap(term.arg, PROD))
            else:
                parts.append(" + " + _wrap(term, PROD))
        return "".join(parts), SUM
    raise TypeError(f"cannot print {type(e).__name__}")
