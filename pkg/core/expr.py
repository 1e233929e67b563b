"""
Immutable expression trees over the variables t, x and u.

Nodes are hashable and compare structurally; every transformation returns a
new tree. Rational constants are exact (``fractions.Fraction``); floating
constants appear only when a caller injects them.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import FrozenSet, Tuple, Union

from utils.errors import UsageError

VARIABLES: Tuple[str, ...] = ("t", "x", "u")
FUNCTIONS: Tuple[str, ...] = ("exp", "sin", "cos", "sqrt")

Number = Union[int, Fraction, float]


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ()

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if other.__class__ is not self.__class__:
            return False
        return hash(self) == hash(other) and self._fields() == other._fields()

    def __ne__(self, other: object) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __str__(self) -> str:
        from core.printer import to_string

        return to_string(self)

    # Arithmetic builds raw trees; call simplify() for the canonical form.
    def __add__(self, other: "ExprLike") -> "Expr":
        return Add((self, as_expr(other)))

    def __radd__(self, other: "ExprLike") -> "Expr":
        return Add((as_expr(other), self))

    def __sub__(self, other: "ExprLike") -> "Expr":
        return Add((self, Neg(as_expr(other))))

    def __rsub__(self, other: "ExprLike") -> "Expr":
        return Add((as_expr(other), Neg(self)))

    def __mul__(self, other: "ExprLike") -> "Expr":
        return Mul((self, as_expr(other)))

    def __rmul__(self, other: "ExprLike") -> "Expr":
        return Mul((as_expr(other), self))

    def __truediv__(self, other: "ExprLike") -> "Expr":
        return Div(self, as_expr(other))

    def __rtruediv__(self, other: "ExprLike") -> "Expr":
        return Div(as_expr(other), self)

    def __neg__(self) -> "Expr":
        return Neg(self)

    def __pow__(self, exponent: int) -> "Expr":
        return Pow(self, exponent)


ExprLike = Union[Expr, Number]


def _seal(node: Expr, *key: object) -> None:
    object.__setattr__(node, "_hash", hash((node.__class__.__name__,) + key))


@dataclass(frozen=True, eq=False, repr=False)
class Const(Expr):
    """Exact rational constant."""

    value: Fraction
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))
        _seal(self, self.value)

    def _fields(self) -> tuple:
        return (self.value,)

    def __repr__(self) -> str:
        return f"Const({self.value})"


@dataclass(frozen=True, eq=False, repr=False)
class Float(Expr):
    """Floating-point constant injected by the user."""

    value: float
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(self.value))
        _seal(self, self.value)

    def _fields(self) -> tuple:
        return (self.value,)

    def __repr__(self) -> str:
        return f"Float({self.value!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Var(Expr):
    """One of the coordinates t, x, u."""

    name: str
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.name not in VARIABLES:
            raise UsageError(f"unknown variable {self.name!r}")
        _seal(self, self.name)

    def _fields(self) -> tuple:
        return (self.name,)

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Neg(Expr):
    arg: Expr
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _seal(self, self.arg)

    def _fields(self) -> tuple:
        return (self.arg,)

    def __repr__(self) -> str:
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Add(Expr):
    terms: Tuple[Expr, ...]
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        _seal(self, self.terms)

    def _fields(self) -> tuple:
        return self.terms

    def __repr__(self) -> str:
        return f"Add({list(self.terms)!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Mul(Expr):
    factors: Tuple[Expr, ...]
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        _seal(self, self.factors)

    def _fields(self) -> tuple:
        return self.factors

    def __repr__(self) -> str:
        return f"Mul({list(self.factors)!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Div(Expr):
    num: Expr
    den: Expr
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _seal(self, self.num, self.den)

    def _fields(self) -> tuple:
        return (self.num, self.den)

    def __repr__(self) -> str:
        return f"Div({self.num!r}, {self.den!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Pow(Expr):
    """Integer power; the exponent is part of the node, not a subtree."""

    base: Expr
    exponent: int
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, int):
            raise UsageError(f"power exponent must be an integer, got {self.exponent!r}")
        _seal(self, self.base, self.exponent)

    def _fields(self) -> tuple:
        return (self.base, self.exponent)

    def __repr__(self) -> str:
        return f"Pow({self.base!r}, {self.exponent})"


@dataclass(frozen=True, eq=False, repr=False)
class Apply(Expr):
    """exp, sin, cos or sqrt applied to a single argument."""

    func: str
    arg: Expr
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.func not in FUNCTIONS:
            raise UsageError(f"unknown function {self.func!r}")
        _seal(self, self.func, self.arg)

    def _fields(self) -> tuple:
        return (self.func, self.arg)

    def __repr__(self) -> str:
        return f"Apply({self.func!r}, {self.arg!r})"


T = Var("t")
X = Var("x")
U = Var("u")
ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
TWO = Const(Fraction(2))


def const(value: Number) -> Expr:
    """Wrap a Python number: rationals stay exact, floats become Float."""
    if isinstance(value, bool):
        raise UsageError("booleans are not numbers here")
    if isinstance(value, (int, Fraction, Rational)):
        return Const(Fraction(value))
    if isinstance(value, float):
        return Float(value)
    raise UsageError(f"cannot make a constant from {value!r}")


def as_expr(value: ExprLike) -> Expr:
    return value if isinstance(value, Expr) else const(value)


def exp(arg: ExprLike) -> Expr:
    return Apply("exp", as_expr(arg))


def sin(arg: ExprLike) -> Expr:
    return Apply("sin", as_expr(arg))


def cos(arg: ExprLike) -> Expr:
    return Apply("cos", as_expr(arg))


def sqrt(arg: ExprLike) -> Expr:
    return Apply("sqrt", as_expr(arg))


def children(e: Expr) -> Tuple[Expr, ...]:
    """Direct subtrees of a node."""
    if isinstance(e, (Neg, Apply)):
        return (e.arg,)
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, Pow):
        return (e.base,)
    return ()


@lru_cache(maxsize=65536)
def free_variables(e: Expr) -> FrozenSet[str]:
    """Names of the variables occurring in ``e``."""
    if isinstance(e, Var):
        return frozenset((e.name,))
    found: FrozenSet[str] = frozenset()
    for child in children(e):
        found = found | free_variables(child)
    return found


def is_constant(e: Expr) -> bool:
    return not free_variables(e)


def node_count(e: Expr) -> int:
    return 1 + sum(node_count(child) for child in children(e))
