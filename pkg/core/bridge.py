"""Conversion of expression trees to sympy, for exact linear algebra."""

from functools import singledispatch

import sympy

from core.expr import Add, Apply, Const, Div, Expr, Float, Mul, Neg, Pow, Var

SYMBOLS = {name: sympy.Symbol(name) for name in ("t", "x", "u")}

_FUNCTIONS = {"exp": sympy.exp, "sin": sympy.sin, "cos": sympy.cos, "sqrt": sympy.sqrt}


@singledispatch
def to_sympy(e: Expr) -> sympy.Expr:
    """The sympy expression of ``e``; rationals stay exact."""
    raise TypeError(f"cannot convert {type(e).__name__}")


@to_sympy.register
def _(e: Const) -> sympy.Expr:
    return sympy.Rational(e.value.numerator, e.value.denominator)


@to_sympy.register
def _(e: Float) -> sympy.Expr:
    return sympy.Float(e.value)


@to_sympy.register
def _(e: Var) -> sympy.Expr:
    return SYMBOLS[e.name]


@to_sympy.register
def _(e: Neg) -> sympy.Expr:
    return -to_sympy(e.arg)


@to_sympy.register
def _(e: Add) -> sympy.Expr:
    return sympy.Add(*(to_sympy(term) for term in e.terms))


@to_sympy.register
def _(e: Mul) -> sympy.Expr:
    return sympy.Mul(*(to_sympy(factor) for factor in e.factors))


@to_sympy.register
def _(e: Div) -> sympy.Expr:
    return to_sympy(e.num) / to_sympy(e.den)


@to_sympy.register
def _(e: Pow) -> sympy.Expr:
    return to_sympy(e.base) ** e.exponent


@to_sympy.register
def _(e: Apply) -> sympy.Expr:
    return _FUNCTIONS[e.func](to_sympy(e.arg))
