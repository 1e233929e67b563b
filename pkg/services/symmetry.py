"""
Lie symmetries of the Burgers equation and of the linear heat equation.

g^B is spanned by P_t, D, K, P_x, G; g^h by their hatted counterparts plus the
scaling I = v*d_v. Heat vector fields act on the dependent variable v, which is
carried by the coordinate u of the expression engine.
"""

import logging
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import sympy
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.settings import settings
from core.bridge import SYMBOLS, to_sympy
from core.calculus import diff, substitute
from core.evaluate import evaluate_grid
from core.expr import T, U, X, Add, Div, Expr, Mul, Neg, Pow, const
from core.fields import Rational, parse_rational
from core.printer import to_string
from core.simplify import simplify
from services.burgers import BurgersSolution, Provenance, ProvenanceKind, hopf_cole
from services.heat import HeatSolution
from services.reduction import OperatorClass, ReductionOperator
from services.verify import Grid, Status, VerificationReport, run_residual
from utils.errors import InvalidTransformationError, SpanMismatchError, UsageError

logger = logging.getLogger(__name__)

BASIS_NAMES = ("P_t", "D", "K", "P_x", "G")
HEAT_BASIS_NAMES = ("P^_t", "D^", "K^", "P^_x", "G^")


class VectorField(NamedTuple):
    """tau*d_t + xi*d_x + eta*d_u with coefficients in (t, x, u)."""

    tau: Expr
    xi: Expr
    eta: Expr

    def apply(self, f: Expr) -> Expr:
        """The derivation tau*f_t + xi*f_x + eta*f_u."""
        return simplify(
            Add((Mul((self.tau, diff(f, "t"))), Mul((self.xi, diff(f, "x"))), Mul((self.eta, diff(f, "u")))))
        )

    def payload(self) -> Dict[str, str]:
        return {"tau": to_string(self.tau), "xi": to_string(self.xi), "eta": to_string(self.eta)}


class GBElement(BaseModel):
    """c0*P_t + c1*D + c2*K + c3*P_x + c4*G."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    c0: Rational = Field(default=Fraction(0), description="P_t = d_t")
    c1: Rational = Field(default=Fraction(0), description="D = 2t*d_t + x*d_x - u*d_u")
    c2: Rational = Field(default=Fraction(0), description="K = t^2*d_t + tx*d_x + (x - tu)*d_u")
    c3: Rational = Field(default=Fraction(0), description="P_x = d_x")
    c4: Rational = Field(default=Fraction(0), description="G = t*d_x + d_u")

    @classmethod
    def of(cls, *coefficients: object) -> "GBElement":
        if len(coefficients) != 5:
            raise UsageError(f"an element of g^B has five coordinates, got {len(coefficients)}")
        return cls(**{f"c{i}": parse_rational(c) for i, c in enumerate(coefficients)})

    @classmethod
    def basis(cls) -> List["GBElement"]:
        return [cls.of(*(1 if j == i else 0 for j in range(5))) for i in range(5)]

    @property
    def coefficients(self) -> Tuple[Fraction, ...]:
        return (self.c0, self.c1, self.c2, self.c3, self.c4)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def __add__(self, other: "GBElement") -> "GBElement":
        return GBElement.of(*(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self) -> "GBElement":
        return GBElement.of(*(-a for a in self.coefficients))

    def __sub__(self, other: "GBElement") -> "GBElement":
        return self + (-other)

    def __mul__(self, factor: Fraction) -> "GBElement":
        factor = parse_rational(factor)
        return GBElement.of(*(factor * a for a in self.coefficients))

    __rmul__ = __mul__

    def __str__(self) -> str:
        parts = [f"{c}*{name}" for c, name in zip(self.coefficients, BASIS_NAMES) if c != 0]
        return " + ".join(parts) or "0"


class GHElement(BaseModel):
    """c0*P^_t + c1*D^ + c2*K^ + c3*P^_x + c4*G^ - mu*I."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    c0: Rational = Field(default=Fraction(0), description="P^_t = d_t")
    c1: Rational = Field(default=Fraction(0), description="D^ = 2t*d_t + x*d_x")
    c2: Rational = Field(default=Fraction(0), description="K^ = t^2*d_t + tx*d_x + (x^2/4 - t/2)v*d_v")
    c3: Rational = Field(default=Fraction(0), description="P^_x = d_x")
    c4: Rational = Field(default=Fraction(0), description="G^ = t*d_x + (x/2)v*d_v")
    mu: Rational = Field(default=Fraction(0), description="Coefficient of -I, I = v*d_v")

    @property
    def coefficients(self) -> Tuple[Fraction, ...]:
        return (self.c0, self.c1, self.c2, self.c3, self.c4)

    def __str__(self) -> str:
        parts = [f"{c}*{name}" for c, name in zip(self.coefficients, HEAT_BASIS_NAMES) if c != 0]
        if self.mu:
            parts.append(f"{-self.mu}*I")
        return " + ".join(parts) or "0"


def _tau_xi(c: Sequence[Fraction]) -> Tuple[Expr, Expr]:
    c0, c1, c2, c3, c4 = c
    tau = simplify(c0 + 2 * c1 * T + c2 * Pow(T, 2))
    xi = simplify(c1 * X + c2 * T * X + c3 + c4 * T)
    return tau, xi


def as_vector_field(e: GBElement) -> VectorField:
    """tau = c0 + 2c1*t + c2*t^2, xi = c1*x + c2*tx + c3 + c4*t, eta = -c1*u + c2*(x - ut) + c4."""
    tau, xi = _tau_xi(e.coefficients)
    eta = simplify(-e.c1 * U + e.c2 * (X - U * T) + e.c4)
    return VectorField(tau, xi, eta)


def bracket(a: VectorField, b: VectorField) -> VectorField:
    """[A, B] with components A(B^i) - B(A^i)."""
    return VectorField(*(simplify(a.apply(bi) - b.apply(ai)) for ai, bi in zip(a, b)))


_UNKNOWNS = sympy.symbols("c0:5")


def _generic_field() -> Tuple[sympy.Expr, sympy.Expr, sympy.Expr]:
    c0, c1, c2, c3, c4 = _UNKNOWNS
    t, x, u = SYMBOLS["t"], SYMBOLS["x"], SYMBOLS["u"]
    return (
        c0 + 2 * c1 * t + c2 * t**2,
        c1 * x + c2 * t * x + c3 + c4 * t,
        -c1 * u + c2 * (x - u * t) + c4,
    )


def _coefficient_equations(expression: sympy.Expr) -> List[sympy.Expr]:
    """Coefficients of a polynomial in t, x, u whose coefficients are linear in the unknowns."""
    numerator, _ = sympy.fraction(sympy.together(expression))
    numerator = sympy.expand(numerator)
    if numerator == 0:
        return []
    variables = [SYMBOLS[name] for name in ("t", "x", "u")]
    if not numerator.is_polynomial(*variables):
        raise SpanMismatchError(f"{numerator} is not polynomial in t, x, u")
    return sympy.Poly(numerator, *variables).coeffs()


def _to_fraction(value: sympy.Expr) -> Fraction:
    if not value.is_Rational:
        raise SpanMismatchError(f"non-rational coordinate {value}")
    return Fraction(int(value.p), int(value.q))


def match_vector_field(tau: Expr, xi: Expr, eta: Expr) -> GBElement:
    """
    Coordinates of tau*d_t + xi*d_x + eta*d_u over the basis of g^B, by an
    exact rational linear solve.

    Raises:
        SpanMismatchError: the field is not in g^B
    """
    equations: List[sympy.Expr] = []
    for generic, target in zip(_generic_field(), (tau, xi, eta)):
        equations.extend(_coefficient_equations(generic - to_sympy(target)))
    if not equations:
        return GBElement()
    matrix, rhs = sympy.linear_eq_to_matrix(equations, _UNKNOWNS)
    try:
        solution, free = matrix.gauss_jordan_solve(rhs)
    except ValueError as e:
        raise SpanMismatchError(
            f"({to_string(tau)}, {to_string(xi)}, {to_string(eta)}) lies outside g^B"
        ) from e
    if free.shape[0]:
        raise SpanMismatchError("basis of g^B is not independent")
    return GBElement.of(*(_to_fraction(value) for value in solution))


def commutator(a: GBElement, b: GBElement) -> GBElement:
    """[a, b] in coordinates of g^B."""
    return match_vector_field(*bracket(as_vector_field(a), as_vector_field(b)))


def commutator_table() -> List[List[GBElement]]:
    """Brackets of every ordered pair of basis elements."""
    basis = GBElement.basis()
    return [[commutator(a, b) for b in basis] for a in basis]


def lie_case_to_algebra(operator: ReductionOperator) -> GBElement:
    """
    The element of g^B proportional to a Lie-case operator, normalized so that
    its t-coefficient c2*t^2 + 2c1*t + c0 is monic in t.

    Raises:
        UsageError: operator is not a Lie-case operator
        SpanMismatchError: no element of g^B is proportional to it
    """
    if operator.kind != OperatorClass.LIE_CASE:
        raise UsageError(f"expected a Lie-case operator, got {operator.kind.value}")
    tau, xi, eta = _generic_field()
    equations = []
    for generic, target in ((xi, operator.xi()), (eta, operator.eta())):
        equations.extend(_coefficient_equations(generic - tau * to_sympy(target)))
    matrix, _ = sympy.linear_eq_to_matrix(equations, _UNKNOWNS)
    null = matrix.nullspace()
    if len(null) != 1:
        raise SpanMismatchError(f"{len(null)}-dimensional family of g^B elements matches {operator}")
    vector = null[0]
    c0, c1, c2 = vector[0], vector[1], vector[2]
    scale = c2 if c2 != 0 else (2 * c1 if c1 != 0 else c0)
    if scale == 0:
        raise SpanMismatchError(f"matching element of g^B has no d_t component for {operator}")
    return GBElement.of(*(_to_fraction(value / scale) for value in vector))


class PointTransformation(BaseModel):
    """
    t~ = (alpha*t + beta)/(gamma*t + delta), x~ = (kappa*x + mu1*t + mu0)/(gamma*t + delta),
    u~ = [kappa*(gamma*t + delta)*u - kappa*gamma*x + mu1*delta - mu0*gamma]/(alpha*delta - beta*gamma).
    """

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    alpha: Rational
    beta: Rational
    gamma: Rational
    delta: Rational
    kappa: Rational
    mu0: Rational
    mu1: Rational

    @model_validator(mode="after")
    def _check_invariant(self) -> "PointTransformation":
        if self.kappa == 0 or self.determinant != self.kappa * self.kappa:
            raise ValueError(
                f"alpha*delta - beta*gamma = {self.determinant} must equal kappa^2 = {self.kappa * self.kappa} > 0"
            )
        return self

    @property
    def determinant(self) -> Fraction:
        return self.alpha * self.delta - self.beta * self.gamma

    @property
    def params(self) -> Tuple[Fraction, ...]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.kappa, self.mu0, self.mu1)

    @classmethod
    def of(cls, *params: object) -> "PointTransformation":
        """
        From (alpha, beta, gamma, delta, kappa, mu0, mu1).

        Raises:
            InvalidTransformationError: wrong arity or alpha*delta - beta*gamma != kappa^2
        """
        names = ("alpha", "beta", "gamma", "delta", "kappa", "mu0", "mu1")
        if len(params) != len(names):
            raise InvalidTransformationError(f"a point transformation has seven parameters, got {len(params)}")
        try:
            return cls(**dict(zip(names, (parse_rational(p) for p in params))))
        except ValidationError as e:
            raise InvalidTransformationError(e.errors()[0]["msg"]) from e

    @classmethod
    def identity(cls) -> "PointTransformation":
        return cls.of(1, 0, 0, 1, 1, 0, 0)


def apply_point_transformation(g: PointTransformation, u: "BurgersSolution | Expr") -> BurgersSolution:
    """
    The image of u under g, written in the new coordinates (renamed back to t, x).

    The old coordinates follow from the new ones by
    t = (delta*t~ - beta)/(alpha - gamma*t~), gamma*t + delta = D/(alpha - gamma*t~),
    x = (x~*(gamma*t + delta) - mu1*t - mu0)/kappa.
    """
    solution = u if isinstance(u, BurgersSolution) else None
    expression = solution.u if solution else u
    alpha, beta, gamma, delta, kappa, mu0, mu1 = (const(p) for p in g.params)
    determinant = const(g.determinant)

    old_t = Div(delta * T - beta, alpha - gamma * T)
    factor = Div(determinant, alpha - gamma * T)
    old_x = Div(X * factor - mu1 * old_t - mu0, kappa)
    pulled = substitute(expression, {"t": old_t, "x": old_x})
    image = simplify(
        Div(kappa * factor * pulled - kappa * gamma * old_x + mu1 * delta - mu0 * gamma, determinant)
    )
    logger.debug(f"Point transformation {[str(p) for p in g.params]}: {to_string(expression)} -> {to_string(image)}")

    origin = solution.provenance if solution else None
    return BurgersSolution(
        expression=image,
        provenance=Provenance(
            kind=ProvenanceKind.CLOSED_FORM,
            label="point_transformation" if origin is None else f"point_transformation of {origin.label or origin.kind.value}",
            heat=origin.heat if origin else None,
            constants=list(g.params),
        ),
        singular_locus_hint="image of " + (solution.singular_locus_hint if solution else "the input's singular locus"),
        backward_time=bool(solution and solution.backward_time),
    )


def corresponding_heat_operator(e: GBElement, mu: Fraction) -> GHElement:
    """The hat map on the fixed bases, with mu stored."""
    return GHElement(c0=e.c0, c1=e.c1, c2=e.c2, c3=e.c3, c4=e.c4, mu=parse_rational(mu))


def _heat_multiplier(gh: GHElement) -> Expr:
    """f - mu with f = c2*(x^2/4 - t/2) + c4*x/2, the coefficient of v*d_v."""
    return simplify(
        gh.c2 * (Pow(X, 2) / 4 - T / 2) + gh.c4 * X / 2 - gh.mu
    )


def heat_vector_field(gh: GHElement) -> VectorField:
    """The g^h element as a vector field, with v in the place of u."""
    tau, xi = _tau_xi(gh.coefficients)
    return VectorField(tau, xi, simplify(Mul((_heat_multiplier(gh), U))))


def heat_characteristic(gh: GHElement, v: Expr) -> Expr:
    """Q^_mu[v] = (f - mu)*v - tau*v_t - xi*v_x."""
    tau, xi = _tau_xi(gh.coefficients)
    return simplify(
        Add((Mul((_heat_multiplier(gh), v)), Neg(Mul((tau, diff(v, "t")))), Neg(Mul((xi, diff(v, "x"))))))
    )


def burgers_characteristic(e: GBElement, u: Expr) -> Expr:
    """Q[u] = eta - tau*u_t - xi*u_x with u(t, x) substituted."""
    field = as_vector_field(e)
    eta = substitute(field.eta, {"u": u})
    return simplify(Add((eta, Neg(Mul((field.tau, diff(u, "t")))), Neg(Mul((field.xi, diff(u, "x")))))))


def hopf_cole_intertwining_residual(e: GBElement, v: Expr) -> Expr:
    """Q[2v_x/v] - 2*(Q^[v]/v)_x; vanishes for every v."""
    u = simplify(Div(Mul((const(2), diff(v, "x"))), v))
    heat = heat_characteristic(corresponding_heat_operator(e, 0), v)
    return simplify(burgers_characteristic(e, u) - 2 * diff(simplify(Div(heat, v)), "x"))


def _heat_operator(f: Expr) -> Expr:
    return simplify(diff(f, "t") + diff(f, "x", 2))


def heat_commutation_residual(e: GBElement, mu: Fraction, v: Expr) -> Expr:
    """T*Q^_mu[v] - Q^_mu[Tv] + 2*(c2*t + c1)*Tv with T = D_t + D_x^2; vanishes for every v."""
    gh = corresponding_heat_operator(e, mu)
    tv = _heat_operator(v)
    return simplify(
        _heat_operator(heat_characteristic(gh, v))
        - heat_characteristic(gh, tv)
        + 2 * (e.c2 * T + e.c1) * tv
    )


class HeatInvarianceReport(BaseModel):
    """Both sides of the heat/Burgers invariance correspondence on one grid."""

    model_config = ConfigDict(extra="forbid")

    heat: VerificationReport = Field(description="Q^_mu[v] on the grid")
    burgers: VerificationReport = Field(description="Q[u] for u = 2v_x/v")
    fitted_mu: Optional[float] = Field(default=None, description="Least-squares mu making Q^_mu[v] smallest")
    invariant: bool = Field(description="Both residuals small")
    status: Status = Field(description="pass when both sides agree, fail when they disagree")


def check_heat_invariance(
    v: "HeatSolution | Expr",
    e: GBElement,
    mu: Fraction,
    grid: Optional[Grid] = None,
    small: Optional[float] = None,
    large: float = 1e-2,
) -> HeatInvarianceReport:
    """
    v is Q^_mu-invariant if and only if u = 2v_x/v is Q-invariant.

    Passes when both residuals are at most ``small`` or both at least ``large``;
    fails when one side is small and the other large.
    """
    heat_solution = v if isinstance(v, HeatSolution) else HeatSolution(label=to_string(v), expression=v)
    if grid is None:
        grid = Grid().backward() if heat_solution.backward_time else Grid()
    small = settings.DEFAULT_TOLERANCE if small is None else small
    u = hopf_cole(heat_solution).u
    gh = corresponding_heat_operator(e, mu)

    heat_residual = heat_characteristic(gh, heat_solution.v)
    heat_report = run_residual(heat_residual, grid, small, guards=[heat_solution.v, u], label=f"{gh} on {heat_solution.label}")
    burgers_report = run_residual(
        burgers_characteristic(e, u), grid, small, guards=[heat_solution.v, u], label=f"{e} on {to_string(u)}"
    )

    mesh = grid.mesh()
    q = evaluate_grid(heat_characteristic(corresponding_heat_operator(e, 0), heat_solution.v), mesh, grid.exclusion_threshold)
    w = evaluate_grid(heat_solution.v, mesh, grid.exclusion_threshold)
    valid = q.valid & w.valid
    norm = float(np.sum(w.values[valid] ** 2))
    fitted_mu = float(np.sum(q.values[valid] * w.values[valid]) / norm) if norm > 0 else None

    sides = (heat_report.max_abs_residual, burgers_report.max_abs_residual)
    if Status.INCONCLUSIVE in (heat_report.status, burgers_report.status):
        status = Status.INCONCLUSIVE
    elif all(r <= small for r in sides) or all(r >= large for r in sides):
        status = Status.PASS
    elif any(r <= small for r in sides) and any(r >= large for r in sides):
        status = Status.FAIL
    else:
        status = Status.INCONCLUSIVE
    logger.info(
        f"Invariance correspondence for {heat_solution.label}: heat {sides[0]:.3e}, Burgers {sides[1]:.3e}, {status.value}"
    )
    return HeatInvarianceReport(
        heat=heat_report,
        burgers=burgers_report,
        fitted_mu=fitted_mu,
        invariant=all(r <= small for r in sides),
        status=status,
    )
