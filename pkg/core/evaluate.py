"""
Numeric evaluation of expressions.

``evaluate_grid`` works on whole numpy arrays at once and returns a validity
mask alongside the values: a point is invalid when any quotient along the way
has a denominator smaller than the exclusion threshold, a square root sees a
negative argument, or the value stops being finite. ``evaluate`` is the strict
scalar form and raises instead of masking.
"""

from typing import Dict, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from core.expr import Add, Apply, Const, Div, Expr, Float, Mul, Neg, Pow, Var
from utils.errors import DomainError, MissingBindingError

ArrayPair = Tuple[np.ndarray, np.ndarray]

_UNARY = {"exp": np.exp, "sin": np.sin, "cos": np.cos}


class Evaluation(NamedTuple):
    values: np.ndarray
    valid: np.ndarray


class _Evaluator:
    """One evaluation pass; memoizes shared subtrees."""

    def __init__(self, env: Dict[str, np.ndarray], shape: Tuple[int, ...], threshold: float, strict: bool):
        self.env = env
        self.shape = shape
        self.threshold = threshold
        self.strict = strict
        self.memo: Dict[Expr, ArrayPair] = {}
        self.all_valid = np.ones(shape, dtype=bool)

    def _fail(self, bad: np.ndarray, node: Expr, message: str) -> None:
        if self.strict and np.any(bad):
            raise DomainError(message, node)

    def run(self, node: Expr) -> ArrayPair:
        cached = self.memo.get(node)
        if cached is not None:
            return cached
        result = self._eval(node)
        self.memo[node] = result
        return result

    def _eval(self, node: Expr) -> ArrayPair:
        if isinstance(node, (Const, Float)):
            return np.full(self.shape, float(node.value)), self.all_valid
        if isinstance(node, Var):
            if node.name not in self.env:
                raise MissingBindingError(node.name)
            return self.env[node.name], self.all_valid
        if isinstance(node, Neg):
            values, valid = self.run(node.arg)
            return -values, valid
        if isinstance(node, (Add, Mul)):
            parts = node.terms if isinstance(node, Add) else node.factors
            if not parts:
                return np.full(self.shape, 0.0 if isinstance(node, Add) else 1.0), self.all_valid
            values, valid = self.run(parts[0])
            for part in parts[1:]:
                other, other_valid = self.run(part)
                values = values + other if isinstance(node, Add) else values * other
                valid = valid & other_valid
            return values, valid
        if isinstance(node, Div):
            num, num_valid = self.run(node.num)
            den, den_valid = self.run(node.den)
            bad = np.abs(den) <= self.threshold if self.strict else np.abs(den) < self.threshold
            self._fail(bad, node.den, "division by zero")
            values = np.divide(num, np.where(bad, 1.0, den))
            return values, num_valid & den_valid & ~bad
        if isinstance(node, Pow):
            base, valid = self.run(node.base)
            if node.exponent < 0:
                bad = np.abs(base) <= self.threshold if self.strict else np.abs(base) < self.threshold
                self._fail(bad, node.base, "division by zero")
                safe = np.where(bad, 1.0, base)
                return np.power(safe, float(node.exponent)), valid & ~bad
            return np.power(base, node.exponent), valid
        if isinstance(node, Apply):
            arg, valid = self.run(node.arg)
            if node.func == "sqrt":
                bad = arg < 0
                self._fail(bad, node.arg, "square root of a negative number")
                return np.sqrt(np.where(bad, 0.0, arg)), valid & ~bad
            return _UNARY[node.func](arg), valid
        raise TypeError(f"cannot evaluate {type(node).__name__}")


def _broadcast(bindings: Mapping[str, object]) -> Tuple[Dict[str, np.ndarray], Tuple[int, ...]]:
    names = list(bindings)
    arrays = np.broadcast_arrays(*(np.asarray(bindings[n], dtype=float) for n in names)) if names else []
    shape = arrays[0].shape if names else ()
    return dict(zip(names, arrays)), shape


def evaluate_grid(e: Expr, bindings: Mapping[str, object], threshold: float = 1e-6) -> Evaluation:
    """
    Evaluate ``e`` over broadcast arrays of coordinates.

    Args:
        e: Expression
        bindings: Arrays (or scalars) per variable name
        threshold: Denominator magnitude below which a point is excluded

    Returns:
        Values and the mask of points where they are meaningful
    """
    env, shape = _broadcast(bindings)
    with np.errstate(all="ignore"):
        values, valid = _Evaluator(env, shape, threshold, strict=False).run(e)
        values = np.broadcast_to(values, shape)
        valid = np.broadcast_to(valid, shape) & np.isfinite(values)
    return Evaluation(values, valid)


def evaluate(e: Expr, point: Mapping[str, float], threshold: Optional[float] = None) -> float:
    """
    Strict scalar evaluation.

    Raises:
        DomainError: Zero denominator, negative square root or non-finite value
        MissingBindingError: A variable of ``e`` is not bound by ``point``
    """
    env, shape = _broadcast(point)
    with np.errstate(all="ignore"):
        values, _ = _Evaluator(env, shape, threshold or 0.0, strict=True).run(e)
    value = float(np.asarray(values))
    if not np.isfinite(value):
        raise DomainError("expression is not finite at this point", e)
    return value
