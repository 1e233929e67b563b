"""Small symbolic determinants."""

from typing import Sequence

from core.expr import Add, Expr, Mul, Neg
from core.simplify import simplify
from utils.errors import UsageError


def det3(rows: Sequence[Sequence[Expr]]) -> Expr:
    """Cofactor expansion of a 3x3 matrix of expressions, simplified."""
    if len(rows) != 3 or any(len(row) != 3 for row in rows):
        raise UsageError("det3 needs a 3x3 matrix")
    (a, b, c), (d, e, f), (g, h, i) = rows
    return simplify(
        Add(
            (
                Mul((a, Add((Mul((e, i)), Neg(Mul((f, h))))))),
                Neg(Mul((b, Add((Mul((d, i)), Neg(Mul((f, g)))))))),
                Mul((c, Add((Mul((d, h)), Neg(Mul((e, g))))))),
            )
        )
    )


def columns(*cols: Sequence[Expr]) -> Sequence[Sequence[Expr]]:
    """Rows of the matrix whose columns are ``cols``."""
    return [list(row) for row in zip(*cols)]
