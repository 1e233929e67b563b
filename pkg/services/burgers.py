"""Solutions of the Burgers equation u_t + u*u_x + u_xx = 0."""

import logging
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.calculus import diff
from core.evaluate import evaluate_grid
from core.expr import ONE, TWO, T, X, Add, Div, Expr, Mul, Neg, const, free_variables
from core.fields import ExprField, Rational, parse_rational
from core.simplify import is_zero, simplify
from services.heat import HeatSolution, HeatTriple
from services.verify import Grid, VerificationReport, random_points, run_residual, run_residuals
from utils.errors import DegenerateInputError, GenericityError, UsageError

logger = logging.getLogger(__name__)


class ProvenanceKind(str, Enum):
    HOPF_COLE = "hopf_cole"
    INVARIANT_FAMILY = "invariant_family"
    CLOSED_FORM = "closed_form"


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    kind: ProvenanceKind = Field(description="How the solution was produced")
    heat: Optional[List[str]] = Field(default=None, description="Heat labels it was built from")
    constants: Optional[List[Rational]] = Field(default=None, description="Family constants")
    label: Optional[str] = Field(default=None, description="Name of a closed-form family")


class BurgersSolution(BaseModel):
    """A solution u(t, x) of the Burgers equation with its origin."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    expression: ExprField = Field(description="u(t, x)")
    provenance: Provenance = Field(description="Hopf-Cole image, invariant family or closed form")
    singular_locus_hint: str = Field(default="none", description="Where u is undefined")
    backward_time: bool = Field(default=False, description="Defined only for t < 0")

    @property
    def u(self) -> Expr:
        return self.expression

    def default_grid(self) -> Grid:
        return Grid().backward() if self.backward_time else Grid()


def burgers_operator(u: Expr) -> Expr:
    """L[u] = u_t + u*u_x + u_xx, simplified."""
    return simplify(Add((diff(u, "t"), Mul((u, diff(u, "x"))), diff(u, "x", 2))))


def _closed_form(u: Expr, label: str, constants: List[Fraction], hint: str = "none") -> BurgersSolution:
    return BurgersSolution(
        expression=u,
        provenance=Provenance(kind=ProvenanceKind.CLOSED_FORM, label=label, constants=constants),
        singular_locus_hint=hint,
    )


def hopf_cole(v: HeatSolution) -> BurgersSolution:
    """
    u = 2*v_x/v.

    Raises:
        DegenerateInputError: v is identically zero
    """
    if is_zero(v.v):
        raise DegenerateInputError("Hopf-Cole image of the zero function is undefined")
    u = simplify(Div(Mul((TWO, diff(v.v, "x"))), v.v))
    hint = "zeros of v" if v.singular_locus_hint == "none" else f"zeros of v; {v.singular_locus_hint}"
    logger.debug(f"Hopf-Cole image of {v.label}: {u}")
    return BurgersSolution(
        expression=u,
        provenance=Provenance(kind=ProvenanceKind.HOPF_COLE, heat=[v.label]),
        singular_locus_hint=hint,
        backward_time=v.backward_time,
    )


def _combination(vs: List[Expr], constants: Tuple[Fraction, ...], order: int) -> Expr:
    return simplify(Add(tuple(Mul((const(c), diff(v, "x", order))) for c, v in zip(constants, vs) if c != 0)))


def invariant_family(triple: HeatTriple, c1: Fraction, c2: Fraction, c3: Fraction) -> BurgersSolution:
    """
    u = 2*(c . v_x)/(c . v), the solutions invariant under the no-go operator
    generated by the triple.

    Raises:
        UsageError: all constants zero
    """
    constants = tuple(parse_rational(c) for c in (c1, c2, c3))
    if all(c == 0 for c in constants):
        raise UsageError("invariant family constants must not all vanish")
    denominator = _combination(triple.vs, constants, 0)
    if is_zero(denominator):
        raise DegenerateInputError("the combination c1*v1 + c2*v2 + c3*v3 vanishes identically")
    u = simplify(Div(Mul((TWO, _combination(triple.vs, constants, 1))), denominator))
    return BurgersSolution(
        expression=u,
        provenance=Provenance(
            kind=ProvenanceKind.INVARIANT_FAMILY,
            heat=triple.labels,
            constants=list(constants),
        ),
        singular_locus_hint="zeros of c1*v1 + c2*v2 + c3*v3",
        backward_time=triple.backward_time,
    )


def lie_rational_solution(c0: Fraction, c1: Fraction) -> BurgersSolution:
    """u = (x + c1)/(t + c0)."""
    c0, c1 = parse_rational(c0), parse_rational(c1)
    u = simplify((X + c1) / (T + c0))
    return _closed_form(u, "lie_rational", [c0, c1], f"t = {-c0}")


def q1_reduced_system(alpha: Expr, beta: Expr) -> Tuple[Expr, Expr]:
    """alpha_t + alpha^2 and beta_t + alpha*beta."""
    return (
        simplify(Add((diff(alpha, "t"), Mul((alpha, alpha))))),
        simplify(Add((diff(beta, "t"), Mul((alpha, beta))))),
    )


def q1_reduced_system_residual(
    alpha: Expr,
    beta: Expr,
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """Residual of the reduced system for the ansatz u = alpha(t)*x + beta(t)."""
    if free_variables(alpha) - {"t"} or free_variables(beta) - {"t"}:
        raise UsageError("alpha and beta depend on t only")
    return run_residuals(
        q1_reduced_system(alpha, beta),
        grid or Grid(),
        tolerance,
        guards=[alpha, beta],
        label="reduced system of u = alpha*x + beta",
    )


def q1_linear_ansatz_solution(c0: Fraction, c1: Fraction) -> BurgersSolution:
    """
    Closed-form solution of the reduced system: alpha = 1/(t + c0),
    beta = c1/(t + c0), u = alpha*x + beta.
    """
    c0, c1 = parse_rational(c0), parse_rational(c1)
    alpha = simplify(ONE / (T + c0))
    beta = simplify(const(c1) / (T + c0))
    if not all(is_zero(r) for r in q1_reduced_system(alpha, beta)):
        raise GenericityError("alpha, beta do not solve the reduced system")
    u = simplify(alpha * X + beta)
    return _closed_form(u, "q1_linear_ansatz", [c0, c1], f"t = {-c0}")


def q1_constant_solution(c: Fraction) -> BurgersSolution:
    """The constant branch alpha = 0, beta = c."""
    c = parse_rational(c)
    return _closed_form(const(c), "q1_constant", [c])


def ansatz_integrals(triple: HeatTriple, u: "BurgersSolution | Expr") -> Tuple[Expr, Expr]:
    """
    zeta = (v1*u - 2*v1_x)/(v3*u - 2*v3_x) and omega = (v2*u - 2*v2_x)/(v3*u - 2*v3_x).

    Raises:
        GenericityError: the common denominator vanishes identically
            (u = 2*v3_x/v3); renumber the triple
    """
    expression = u.u if isinstance(u, BurgersSolution) else u
    v1, v2, v3 = triple.vs

    def integral_part(v: Expr) -> Expr:
        return simplify(Add((Mul((v, expression)), Neg(Mul((TWO, diff(v, "x")))))))

    denominator = integral_part(v3)
    if is_zero(denominator):
        raise GenericityError("ansatz integrals undefined: u = 2*v3_x/v3, renumber the triple")
    zeta = simplify(Div(integral_part(v1), denominator))
    omega = simplify(Div(integral_part(v2), denominator))
    return zeta, omega


class AffineFit(BaseModel):
    """The line a*zeta + b*omega + c = 0 through the sampled (omega, zeta) pairs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    coefficients: Tuple[float, float, float] = Field(description="(a, b, c), unit norm")
    slope: Optional[float] = Field(default=None, description="A in zeta = A*omega + B")
    intercept: Optional[float] = Field(default=None, description="B in zeta = A*omega + B")
    max_residual: float = Field(description="Largest deviation from the fitted line")
    sample_count: int = Field(description="Points used")
    passed: bool = Field(description="max_residual within tolerance")


def affine_law(
    triple: HeatTriple,
    u: "BurgersSolution | Expr",
    samples: int = 20,
    seed: Optional[int] = None,
    tolerance: float = 1e-9,
    bound: float = 1e4,
) -> AffineFit:
    """
    Sample zeta and omega at random non-singular points and fit a line.

    Along a solution of the reduced equation phi_ww = 0 the pair (omega, zeta)
    stays on a straight line. The fit is the null vector of [zeta, omega, 1];
    the residual is measured in zeta when the line is not vertical, in omega
    otherwise. Points where |zeta| or |omega| exceed ``bound`` are dropped.
    """
    expression = u.u if isinstance(u, BurgersSolution) else u
    zeta, omega = ansatz_integrals(triple, expression)
    grid = triple.default_grid()
    points = random_points(grid, 8 * samples, seed, guards=[expression, zeta, omega])
    z = evaluate_grid(zeta, points, grid.exclusion_threshold)
    w = evaluate_grid(omega, points, grid.exclusion_threshold)
    keep = z.valid & w.valid & (np.abs(z.values) <= bound) & (np.abs(w.values) <= bound)
    z_values, w_values = z.values[keep][:samples], w.values[keep][:samples]
    if z_values.size < 3:
        raise GenericityError("too few non-singular sample points for the affine fit")

    matrix = np.column_stack([z_values, w_values, np.ones_like(z_values)])
    _, _, vt = np.linalg.svd(matrix)
    a, b, c = vt[-1]
    if abs(a) >= abs(b):
        slope, intercept = -b / a, -c / a
        residual = np.max(np.abs(z_values - slope * w_values - intercept))
    else:
        slope, intercept = None, None
        residual = np.max(np.abs(w_values + (a * z_values + c) / b))
    fit = AffineFit(
        coefficients=(float(a), float(b), float(c)),
        slope=None if slope is None else float(slope),
        intercept=None if intercept is None else float(intercept),
        max_residual=float(residual),
        sample_count=int(z_values.size),
        passed=bool(residual <= tolerance),
    )
    logger.info(f"Affine law: residual {fit.max_residual:.3e} over {fit.sample_count} points")
    return fit


def burgers_residual(
    u: "BurgersSolution | Expr",
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """max |u_t + u*u_x + u_xx| over non-excluded grid points."""
    solution = u if isinstance(u, BurgersSolution) else None
    expression = solution.u if solution else u
    if "u" in free_variables(expression):
        raise UsageError("a Burgers solution depends on t and x only")
    if grid is None:
        grid = solution.default_grid() if solution else Grid()
    return run_residual(
        burgers_operator(expression),
        grid,
        tolerance,
        guards=[expression],
        label=f"Burgers residual of {expression}",
    )

