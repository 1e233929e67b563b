"""
Canonical forms and simplification.

An expression is brought to a ``Form``: a numerator polynomial over a
factored denominator. Polynomials are sparse maps from monomials to exact
(or float) coefficients. A monomial is a product of atoms raised to positive
integer powers times at most one ``exp(A)``; atoms are the variables and the
applications of sin, cos and sqrt to canonical arguments. Exponentials are
units, so they never stay in a denominator, and ``exp(A)*exp(B)`` merges into
``exp(A + B)``.

Denominators are kept as products of monic, content-free factors with
multiplicities. Sums are taken over the least common multiple of the two
factor multisets, and numerators are cancelled against denominator factors by
exact division where it succeeds. This is complete on the polynomial
fragment (zero is recognised exactly) and best-effort elsewhere: identities
such as sin^2 + cos^2 = 1 are not attempted.
"""

import math
from collections import defaultdict
from fractions import Fraction
from functools import cmp_to_key, lru_cache, singledispatch
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple, Union

from config.settings import settings
from core.expr import (
    ONE,
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
    Var,
    const,
    free_variables,
)
from core.printer import to_string
from utils.errors import DomainError

Coeff = Union[Fraction, float]


@lru_cache(maxsize=65536)
def atom_key(atom: Expr) -> str:
    """Sort key of an atom or exponent argument."""
    return to_string(atom)


class Monomial(NamedTuple):
    """Product of atom powers and an optional ``exp(exp_arg)``."""

    powers: Tuple[Tuple[Expr, int], ...] = ()
    exp_arg: Optional[Expr] = None

    @property
    def degree(self) -> int:
        return sum(p for _, p in self.powers)

    def power_of(self, atom: Expr) -> int:
        for candidate, p in self.powers:
            if candidate == atom:
                return p
        return 0


UNIT = Monomial()


def _sorted_powers(powers: Dict[Expr, int]) -> Tuple[Tuple[Expr, int], ...]:
    return tuple(sorted(((a, p) for a, p in powers.items() if p), key=lambda item: atom_key(item[0])))


def _exp_sum(a: Optional[Expr], b: Optional[Expr]) -> Optional[Expr]:
    if a is None:
        return b
    if b is None:
        return a
    combined = simplify(Add((a, b)))
    return None if combined == ZERO else combined


def _exp_neg(a: Optional[Expr]) -> Optional[Expr]:
    return None if a is None else simplify(Neg(a))


def monomial_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if m1 == UNIT:
        return m2
    if m2 == UNIT:
        return m1
    powers = dict(m1.powers)
    for atom, p in m2.powers:
        powers[atom] = powers.get(atom, 0) + p
    return Monomial(_sorted_powers(powers), _exp_sum(m1.exp_arg, m2.exp_arg))


def monomial_div(m1: Monomial, m2: Monomial) -> Optional[Monomial]:
    """``m1 / m2`` when the atom part divides, else None."""
    powers = dict(m1.powers)
    for atom, p in m2.powers:
        have = powers.get(atom, 0)
        if have < p:
            return None
        powers[atom] = have - p
    return Monomial(_sorted_powers(powers), _exp_sum(m1.exp_arg, _exp_neg(m2.exp_arg)))


def _compare(m1: Monomial, m2: Monomial) -> int:
    # graded lexicographic on atoms, ties broken by the exponential argument
    d1, d2 = m1.degree, m2.degree
    if d1 != d2:
        return -1 if d1 < d2 else 1
    for (a1, p1), (a2, p2) in zip(m1.powers, m2.powers):
        k1, k2 = atom_key(a1), atom_key(a2)
        if k1 != k2:
            return 1 if k1 < k2 else -1
        if p1 != p2:
            return -1 if p1 < p2 else 1
    e1 = "" if m1.exp_arg is None else atom_key(m1.exp_arg)
    e2 = "" if m2.exp_arg is None else atom_key(m2.exp_arg)
    return (e1 > e2) - (e1 < e2)


monomial_order = cmp_to_key(_compare)


class Poly:
    """Sparse polynomial over atoms with exponential units."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[Dict[Monomial, Coeff]] = None):
        self.terms: Dict[Monomial, Coeff] = {m: c for m, c in (terms or {}).items() if c != 0}
        self._hash: Optional[int] = None

    @classmethod
    def constant(cls, value: Coeff) -> "Poly":
        return cls({UNIT: value})

    @classmethod
    def atom(cls, atom: Expr) -> "Poly":
        return cls({Monomial(((atom, 1),)): Fraction(1)})

    @classmethod
    def exponential(cls, arg: Expr) -> "Poly":
        return cls({Monomial((), arg): Fraction(1)})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self) -> Optional[Coeff]:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and UNIT in self.terms:
            return self.terms[UNIT]
        return None

    def __add__(self, other: "Poly") -> "Poly":
        acc = dict(self.terms)
        for m, c in other.terms.items():
            acc[m] = acc.get(m, 0) + c
        return Poly(acc)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, factor: Coeff) -> "Poly":
        return Poly({m: c * factor for m, c in self.terms.items()})

    def mul_term(self, mono: Monomial, coeff: Coeff) -> "Poly":
        acc: Dict[Monomial, Coeff] = defaultdict(int)
        for m, c in self.terms.items():
            acc[monomial_mul(m, mono)] += c * coeff
        return Poly(acc)

    def __mul__(self, other: "Poly") -> "Poly":
        if len(other) == 1:
            (mono, coeff), = other.terms.items()
            return self.mul_term(mono, coeff)
        if len(self) == 1:
            (mono, coeff), = self.terms.items()
            return other.mul_term(mono, coeff)
        acc: Dict[Monomial, Coeff] = defaultdict(int)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                acc[monomial_mul(m1, m2)] += c1 * c2
        return Poly(acc)

    def __pow__(self, n: int) -> "Poly":
        result = ONE_POLY
        base = self
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def leading(self) -> Tuple[Monomial, Coeff]:
        mono = max(self.terms, key=monomial_order)
        return mono, self.terms[mono]

    def ordered_terms(self) -> List[Tuple[Monomial, Coeff]]:
        return sorted(self.terms.items(), key=lambda item: monomial_order(item[0]), reverse=True)

    def atoms(self) -> Iterable[Expr]:
        seen = set()
        for m in self.terms:
            for atom, _ in m.powers:
                if atom not in seen:
                    seen.add(atom)
                    yield atom


ZERO_POLY = Poly()
ONE_POLY = Poly.constant(Fraction(1))


def try_divide(a: Poly, d: Poly) -> Optional[Poly]:
    """Exact quotient ``a / d`` or None; bounded, so a None is not a proof."""
    if d.is_zero():
        return None
    if a.is_zero():
        return ZERO_POLY
    if len(d) == 1:
        (dm, dc), = d.terms.items()
        acc: Dict[Monomial, Coeff] = {}
        for m, c in a.terms.items():
            q = monomial_div(m, dm)
            if q is None:
                return None
            acc[q] = acc.get(q, 0) + c / dc
        return Poly(acc)
    lead_m, lead_c = d.leading()
    remainder = a
    quotient: Dict[Monomial, Coeff] = defaultdict(int)
    limit = 4 * (len(a) + 1) * (len(d) + 1) + 32
    for _ in range(limit):
        if remainder.is_zero():
            return Poly(quotient)
        rm, rc = remainder.leading()
        qm = monomial_div(rm, lead_m)
        if qm is None:
            return None
        qc = rc / lead_c
        quotient[qm] += qc
        remainder = remainder - d.mul_term(qm, qc)
    return None


def _split_content(p: Poly) -> Tuple[Coeff, Monomial, Poly]:
    """Write ``p = lc * content * primitive`` with ``primitive`` monic."""
    monos = list(p.terms)
    common: Dict[Expr, int] = dict(monos[0].powers)
    for m in monos[1:]:
        for atom in list(common):
            common[atom] = min(common[atom], m.power_of(atom))
    exp_args = {m.exp_arg for m in monos}
    content = Monomial(_sorted_powers(common), exp_args.pop() if len(exp_args) == 1 else None)
    if content != UNIT:
        stripped: Dict[Monomial, Coeff] = {}
        for m, c in p.terms.items():
            q = monomial_div(m, content)
            stripped[q] = stripped.get(q, 0) + c
        p = Poly(stripped)
    _, lc = p.leading()
    return lc, content, p.scale(1 / lc) if lc != 1 else p


def _is_atom_factor(p: Poly) -> bool:
    if len(p) != 1:
        return False
    (m, c), = p.terms.items()
    return c == 1 and m.exp_arg is None and len(m.powers) == 1 and m.powers[0][1] == 1


def _absorb(den: Dict[Poly, int], p: Poly) -> Poly:
    """Move ``p`` into the factored denominator; return what the numerator gains."""
    lc, content, primitive = _split_content(p)
    multiplier = Poly({Monomial((), _exp_neg(content.exp_arg)): 1 / lc})
    for atom, k in content.powers:
        factor = Poly.atom(atom)
        den[factor] = den.get(factor, 0) + k
    if primitive.constant_value() is not None:
        return multiplier
    for existing in list(den):
        if len(existing) < 2 or existing == primitive:
            continue
        quotient = try_divide(primitive, existing)
        if quotient is not None:
            den[existing] += 1
            return multiplier * _absorb(den, quotient)
    den[primitive] = den.get(primitive, 0) + 1
    return multiplier


def _expand(den: Dict[Poly, int]) -> Poly:
    result = ONE_POLY
    for factor, k in den.items():
        if k > 0:
            result = result * (factor ** k)
    return result


@lru_cache(maxsize=65536)
def _factor_key(p: Poly) -> str:
    return to_string(poly_to_expr(p))


class Form:
    """``num / prod(factor ** k)``, the canonical shape of an expression."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Tuple[Tuple[Poly, int], ...] = ()):
        self.num = num
        self.den = den
        self._hash: Optional[int] = None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Form) and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def constant_value(self) -> Optional[Coeff]:
        return self.num.constant_value() if not self.den else None

    def __add__(self, other: "Form") -> "Form":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        mine, theirs = dict(self.den), dict(other.den)
        if mine == theirs:
            return _cancel(self.num + other.num, mine)
        lcm = {f: max(mine.get(f, 0), theirs.get(f, 0)) for f in set(mine) | set(theirs)}
        num = self.num * _expand({f: k - mine.get(f, 0) for f, k in lcm.items()}) + other.num * _expand(
            {f: k - theirs.get(f, 0) for f, k in lcm.items()}
        )
        return _cancel(num, lcm)

    def __neg__(self) -> "Form":
        return Form(-self.num, self.den)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, other: "Form") -> "Form":
        if self.is_zero() or other.is_zero():
            return ZERO_FORM
        den = dict(self.den)
        for f, k in other.den:
            den[f] = den.get(f, 0) + k
        return _cancel(self.num * other.num, den)

    def inverse(self) -> "Form":
        if self.is_zero():
            raise DomainError("division by an expression that is identically zero")
        den: Dict[Poly, int] = {}
        multiplier = _absorb(den, self.num)
        return _cancel(_expand(dict(self.den)) * multiplier, den)

    def __pow__(self, n: int) -> "Form":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return ONE_FORM
        return Form(self.num ** n, tuple((f, k * n) for f, k in self.den))


def _cancel(num: Poly, den: Dict[Poly, int]) -> Form:
    if num.is_zero():
        return ZERO_FORM
    den = {f: k for f, k in den.items() if k > 0}
    for factor in list(den):
        if _is_atom_factor(factor):
            atom = next(iter(factor.terms)).powers[0][0]
            shared = min(m.power_of(atom) for m in num.terms)
            cut = min(den[factor], shared)
            if cut:
                num = Poly(
                    {
                        monomial_div(m, Monomial(((atom, cut),))): c  # type: ignore[misc]
                        for m, c in num.terms.items()
                    }
                )
                den[factor] -= cut
        else:
            while den[factor] > 0:
                quotient = try_divide(num, factor)
                if quotient is None:
                    break
                num = quotient
                den[factor] -= 1
    ordered = sorted(((f, k) for f, k in den.items() if k > 0), key=lambda item: _factor_key(item[0]))
    return Form(num, tuple(ordered))


ZERO_FORM = Form(ZERO_POLY)
ONE_FORM = Form(ONE_POLY)


def _poly_form(p: Poly) -> Form:
    return Form(p)


@singledispatch
def _form_of(e: Expr) -> Form:
    raise TypeError(f"no canonical form for {type(e).__name__}")


@_form_of.register
def _(e: Const) -> Form:
    return _poly_form(Poly.constant(e.value))


@_form_of.register
def _(e: Float) -> Form:
    return _poly_form(Poly.constant(e.value))


@_form_of.register
def _(e: Var) -> Form:
    return _poly_form(Poly.atom(e))


@_form_of.register
def _(e: Neg) -> Form:
    return -to_form(e.arg)


@_form_of.register
def _(e: Add) -> Form:
    total = ZERO_FORM
    for term in e.terms:
        total = total + to_form(term)
    return total


@_form_of.register
def _(e: Mul) -> Form:
    product = ONE_FORM
    for factor in e.factors:
        product = product * to_form(factor)
        if product.is_zero():
            return ZERO_FORM
    return product


@_form_of.register
def _(e: Div) -> Form:
    numerator = to_form(e.num)
    if numerator.is_zero():
        # still reject a zero denominator
        _inverse_form(e.den)
        return ZERO_FORM
    return numerator * _inverse_form(e.den)


@_form_of.register
def _(e: Pow) -> Form:
    if e.exponent < 0:
        return _inverse_form(e.base) ** (-e.exponent)
    return to_form(e.base) ** e.exponent


_FLOAT_FUNCS = {"exp": math.exp, "sin": math.sin, "cos": math.cos, "sqrt": math.sqrt}


def _leading_negative(arg: Expr) -> bool:
    f = to_form(arg)
    return not f.is_zero() and f.num.leading()[1] < 0


def _exact_sqrt(value: Fraction) -> Optional[Fraction]:
    if value < 0:
        return None
    p, q = value.numerator, value.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


@_form_of.register
def _(e: Apply) -> Form:
    arg = simplify(e.arg)
    if isinstance(arg, Float):
        if e.func == "sqrt" and arg.value < 0:
            raise DomainError("square root of a negative constant", e)
        return _poly_form(Poly.constant(_FLOAT_FUNCS[e.func](arg.value)))
    if e.func == "exp":
        if arg == ZERO:
            return ONE_FORM
        return _poly_form(Poly.exponential(arg))
    if e.func == "sqrt":
        if isinstance(arg, Const):
            root = _exact_sqrt(arg.value)
            if root is not None:
                return _poly_form(Poly.constant(root))
        return _poly_form(Poly.atom(Apply("sqrt", arg)))
    if arg == ZERO:
        return ZERO_FORM if e.func == "sin" else ONE_FORM
    if _leading_negative(arg):
        flipped = Apply(e.func, simplify(Neg(arg)))
        sign = Fraction(-1) if e.func == "sin" else Fraction(1)
        return _poly_form(Poly({Monomial(((flipped, 1),)): sign}))
    return _poly_form(Poly.atom(Apply(e.func, arg)))


@lru_cache(maxsize=settings.SIMPLIFY_CACHE_SIZE)
def to_form(e: Expr) -> Form:
    """Canonical form of ``e``."""
    return _form_of(e)


@lru_cache(maxsize=settings.SIMPLIFY_CACHE_SIZE)
def _inverse_form(e: Expr) -> Form:
    # Descend through products and powers so factor structure survives.
    if isinstance(e, Mul):
        result = ONE_FORM
        for factor in e.factors:
            result = result * _inverse_form(factor)
        return result
    if isinstance(e, Pow):
        if e.exponent < 0:
            return to_form(e.base) ** (-e.exponent)
        return _inverse_form(e.base) ** e.exponent
    if isinstance(e, Neg):
        return -_inverse_form(e.arg)
    if isinstance(e, Div):
        return to_form(e.den) * _inverse_form(e.num)
    return to_form(e).inverse()


def _coeff_expr(value: Coeff) -> Expr:
    return const(value)


def _monomial_factors(m: Monomial) -> List[Expr]:
    factors: List[Expr] = [atom if p == 1 else Pow(atom, p) for atom, p in m.powers]
    if m.exp_arg is not None:
        factors.append(Apply("exp", m.exp_arg))
    return factors


def _term_expr(m: Monomial, c: Coeff) -> Expr:
    factors = _monomial_factors(m)
    magnitude = abs(c)
    if not factors:
        body = _coeff_expr(magnitude)
    elif magnitude == 1:
        body = factors[0] if len(factors) == 1 else Mul(tuple(factors))
    else:
        body = Mul((_coeff_expr(magnitude),) + tuple(factors))
    return Neg(body) if c < 0 else body


@lru_cache(maxsize=65536)
def poly_to_expr(p: Poly) -> Expr:
    if p.is_zero():
        return ZERO
    terms = [_term_expr(m, c) for m, c in p.ordered_terms()]
    return terms[0] if len(terms) == 1 else Add(tuple(terms))


@lru_cache(maxsize=65536)
def form_to_expr(f: Form) -> Expr:
    numerator = poly_to_expr(f.num)
    if not f.den:
        return numerator
    factors = [poly_to_expr(p) if k == 1 else Pow(poly_to_expr(p), k) for p, k in f.den]
    denominator = factors[0] if len(factors) == 1 else Mul(tuple(factors))
    return Div(numerator, denominator)


@lru_cache(maxsize=settings.SIMPLIFY_CACHE_SIZE)
def simplify(e: Expr) -> Expr:
    """
    Canonical simplification: constant folding, 0/1 absorption, flattening,
    like-term collection and cancellation. Idempotent.
    """
    return form_to_expr(to_form(e))


def is_zero(e: Expr) -> bool:
    """True when ``e`` simplifies to exactly zero."""
    return to_form(e).is_zero()


def constant_value(e: Expr) -> Optional[Coeff]:
    """The value of ``e`` when it simplifies to a plain number."""
    return to_form(e).constant_value()


def numerator_denominator(e: Expr) -> Tuple[Expr, Expr]:
    """Canonical numerator and denominator of ``e``."""
    f = to_form(e)
    if not f.den:
        return poly_to_expr(f.num), ONE
    return poly_to_expr(f.num), form_to_expr(Form(ONE_POLY, f.den))


def collect(e: Expr, name: str) -> Optional[Dict[int, Expr]]:
    """
    Coefficients of ``e`` as a polynomial in the variable ``name``.

    Returns None when ``name`` occurs in a denominator, inside a function
    argument, or in an exponential.
    """
    target = Var(name)
    f = to_form(e)
    for factor, _ in f.den:
        if name in free_variables(poly_to_expr(factor)):
            return None
    groups: Dict[int, Dict[Monomial, Coeff]] = defaultdict(dict)
    for m, c in f.num.terms.items():
        power = 0
        rest: Dict[Expr, int] = {}
        for atom, p in m.powers:
            if atom == target:
                power = p
            elif name in free_variables(atom):
                return None
            else:
                rest[atom] = p
        if m.exp_arg is not None and name in free_variables(m.exp_arg):
            return None
        groups[power][Monomial(_sorted_powers(rest), m.exp_arg)] = c
    return {power: form_to_expr(_cancel(Poly(terms), dict(f.den))) for power, terms in sorted(groups.items())}


def polynomial_terms(e: Expr) -> Optional[Dict[Tuple[Tuple[str, int], ...], Coeff]]:
    """
    Coefficients of ``e`` when it is a plain polynomial in t, x, u.

    Keys are sorted ``(variable, power)`` tuples; None for anything that is not
    a polynomial in the coordinates.
    """
    f = to_form(e)
    if f.den:
        return None
    result: Dict[Tuple[Tuple[str, int], ...], Coeff] = {}
    for m, c in f.num.terms.items():
        if m.exp_arg is not None:
            return None
        key = []
        for atom, p in m.powers:
            if not isinstance(atom, Var):
                return None
            key.append((atom.name, p))
        result[tuple(sorted(key))] = c
    return result


__all__ = [
    "Form",
    "Monomial",
    "Poly",
    "collect",
    "constant_value",
    "is_zero",
    "numerator_denominator",
    "polynomial_terms",
    "simplify",
    "to_form",
    "try_divide",
]
