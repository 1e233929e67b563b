"""Exact differentiation and substitution."""

from functools import lru_cache, singledispatch
from typing import Dict, Mapping

from config.settings import settings
from core.expr import (
    ONE,
    TWO,
    VARIABLES,
    ZERO,
    Add,
    Apply,
    Const,
    Div,
    Expr,
    ExprLike,
    Float,
    Mul,
    Neg,
    Pow,
    Var,
    as_expr,
    free_variables,
)
from core.simplify import simplify
from utils.errors import UsageError


@singledispatch
def _derivative(e: Expr, v: str) -> Expr:
    raise TypeError(f"cannot differentiate {type(e).__name__}")


@_derivative.register(Const)
@_derivative.register(Float)
def _(e: Expr, v: str) -> Expr:
    return ZERO


@_derivative.register
def _(e: Var, v: str) -> Expr:
    return ONE if e.name == v else ZERO


@_derivative.register
def _(e: Neg, v: str) -> Expr:
    return Neg(_d(e.arg, v))


@_derivative.register
def _(e: Add, v: str) -> Expr:
    return Add(tuple(_d(term, v) for term in e.terms))


@_derivative.register
def _(e: Mul, v: str) -> Expr:
    terms = []
    for i, factor in enumerate(e.factors):
        df = _d(factor, v)
        if df == ZERO:
            continue
        terms.append(Mul(e.factors[:i] + (df,) + e.factors[i + 1:]))
    return Add(tuple(terms))


@_derivative.register
def _(e: Div, v: str) -> Expr:
    dn, dd = _d(e.num, v), _d(e.den, v)
    return Div(Add((Mul((dn, e.den)), Neg(Mul((e.num, dd))))), Pow(e.den, 2))


@_derivative.register
def _(e: Pow, v: str) -> Expr:
    if e.exponent == 0:
        return ZERO
    return Mul((Const(e.exponent), Pow(e.base, e.exponent - 1), _d(e.base, v)))


@_derivative.register
def _(e: Apply, v: str) -> Expr:
    da = _d(e.arg, v)
    if e.func == "exp":
        return Mul((e, da))
    if e.func == "sin":
        return Mul((Apply("cos", e.arg), da))
    if e.func == "cos":
        return Neg(Mul((Apply("sin", e.arg), da)))
    # d sqrt(A) = A' sqrt(A) / (2A) keeps the radical out of denominators
    return Div(Mul((da, e)), Mul((TWO, e.arg)))


def _d(e: Expr, v: str) -> Expr:
    if v not in free_variables(e):
        return ZERO
    return _derivative(e, v)


@lru_cache(maxsize=settings.DIFF_CACHE_SIZE)
def _diff_once(e: Expr, v: str) -> Expr:
    return simplify(_d(e, v))


@lru_cache(maxsize=settings.DIFF_CACHE_SIZE)
def diff(e: Expr, v: str, order: int = 1) -> Expr:
    """
    Exact derivative of ``e`` with respect to ``v``, simplified.

    Args:
        e: Expression
        v: One of "t", "x", "u"
        order: Number of differentiations; 0 returns ``e`` unchanged

    Returns:
        Canonical derivative
    """
    if v not in VARIABLES:
        raise UsageError(f"cannot differentiate with respect to {v!r}")
    if isinstance(order, bool) or not isinstance(order, int) or order < 0:
        raise UsageError(f"derivative order must be a non-negative integer, got {order!r}")
    if order == 0:
        return e
    return _diff_once(diff(e, v, order - 1), v)


def substitute(e: Expr, mapping: Mapping[str, ExprLike]) -> Expr:
    """Replace variables by expressions; the result is not simplified."""
    table = {name: as_expr(value) for name, value in mapping.items()}
    unknown = set(table) - set(VARIABLES)
    if unknown:
        raise UsageError(f"cannot substitute for {sorted(unknown)}")
    memo: Dict[Expr, Expr] = {}

    def walk(node: Expr) -> Expr:
        if free_variables(node).isdisjoint(table):
            return node
        if node in memo:
            return memo[node]
        if isinstance(node, Var):
            result = table[node.name]
        elif isinstance(node, Neg):
            result = Neg(walk(node.arg))
        elif isinstance(node, Add):
            result = Add(tuple(walk(term) for term in node.terms))
        elif isinstance(node, Mul):
            result = Mul(tuple(walk(factor) for factor in node.factors))
        elif isinstance(node, Div):
            result = Div(walk(node.num), walk(node.den))
        elif isinstance(node, Pow):
            result = Pow(walk(node.base), node.exponent)
        elif isinstance(node, Apply):
            result = Apply(node.func, walk(node.arg))
        else:
            result = node
        memo[node] = result
        return result

    return walk(e)
