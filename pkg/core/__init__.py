"""Expression engine: trees, grammar, canonical forms, calculus and evaluation."""

from core.bridge import to_sympy
from core.calculus import diff, substitute
from core.evaluate import Evaluation, evaluate, evaluate_grid
from core.expr import (
    ONE,
    TWO,
    ZERO,
    Add,
    Apply,
    Const,
    Div,
    Expr,
    Float,
    Mul,
    Neg,
    Pow,
    T,
    U,
    Var,
    X,
    const,
    cos,
    exp,
    free_variables,
    sin,
    sqrt,
)
from core.matrix import columns, det3
from core.parser import parse
from core.printer import to_string
from core.simplify import collect, constant_value, is_zero, numerator_denominator, polynomial_terms, simplify

__all__ = [
    "Add",
    "Apply",
    "Const",
    "Div",
    "Evaluation",
    "Expr",
    "Float",
    "Mul",
    "Neg",
    "ONE",
    "Pow",
    "T",
    "TWO",
    "U",
    "Var",
    "X",
    "ZERO",
    "collect",
    "columns",
    "const",
    "constant_value",
    "cos",
    "det3",
    "diff",
    "evaluate",
    "evaluate_grid",
    "exp",
    "free_variables",
    "is_zero",
    "numerator_denominator",
    "parse",
    "polynomial_terms",
    "simplify",
    "sin",
    "sqrt",
    "substitute",
    "to_string",
    "to_sympy",
]
