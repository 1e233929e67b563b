"""
Reduction operators Q = tau*d_t + xi*d_x + eta*d_u of the Burgers equation
and the determining systems they must satisfy.

Regular operators are gauged to tau = 1 and split by the u-coefficient xi1 of
xi = xi1*u + xi0: xi1 = 1 is the trivial operator d_t + u*d_x, xi1 = 0 the
Lie case, xi1 = -1/2 the no-go case. Singular operators have tau = 0, xi = 1.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from core.calculus import diff, substitute
from core.expr import ONE, ZERO, T, U, X, Add, Const, Div, Expr, Mul, Neg, Pow, const, free_variables
from core.fields import ExprField, Rational, parse_rational
from core.matrix import columns, det3
from core.printer import to_string
from core.simplify import collect, constant_value, is_zero, simplify
from config.settings import settings
from services.burgers import BurgersSolution, burgers_operator
from services.heat import HeatSolution, HeatTriple, wronskian
from services.verify import Grid, Grid3D, VerificationReport, run_residual, run_residuals
from utils.errors import DegenerateInputError, LinearDependenceError, UsageError

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


class OperatorClass(str, Enum):
    SINGULAR = "singular"
    TRIVIAL = "trivial"
    LIE_CASE = "lie"
    NOGO = "nogo"


class ReductionOperator(BaseModel):
    """
    tau*d_t + (xi1*u + xi0)*d_x + eta*d_u.

    ``eta_coeffs`` holds the coefficients of u^0..u^3; the singular class
    carries a general ``eta_general`` in (t, x, u) instead.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True, populate_by_name=True)

    kind: OperatorClass = Field(alias="class", description="singular, trivial, lie or nogo")
    tau: int = Field(description="0 or 1")
    xi1: Optional[Rational] = Field(default=None, description="u-coefficient of xi: 1, 0, -1/2, or none")
    xi0: ExprField = Field(default=ZERO, description="u-free part of xi")
    eta_coeffs: Optional[List[ExprField]] = Field(default=None, description="eta0..eta3, coefficients of u^0..u^3")
    eta_general: Optional[ExprField] = Field(default=None, description="eta(t, x, u) of a singular operator")
    backward_time: bool = Field(default=False, description="Coefficients defined only for t < 0")

    @model_validator(mode="after")
    def _check_shape(self) -> "ReductionOperator":
        if self.tau not in (0, 1):
            raise ValueError(f"tau must be 0 or 1, got {self.tau}")
        if self.eta_coeffs is not None:
            if len(self.eta_coeffs) != 4:
                raise ValueError("eta_coeffs needs four entries, u^0..u^3")
            if any("u" in free_variables(c) for c in self.eta_coeffs):
                raise ValueError("eta coefficients depend on t and x only")
        if "u" in free_variables(self.xi0):
            raise ValueError("xi0 depends on t and x only")
        if (self.eta_coeffs is None) == (self.eta_general is None):
            raise ValueError("give exactly one of eta_coeffs and eta_general")
        if self.tau == 0 and is_zero(self.xi()):
            raise ValueError("tau and xi vanish simultaneously")

        kind = self.kind
        if kind == OperatorClass.SINGULAR:
            if self.tau != 0 or self.xi1 is not None or not is_zero(self.xi0 - ONE):
                raise ValueError("a singular operator has tau = 0 and xi = 1")
        elif self.tau != 1 or self.eta_coeffs is None:
            raise ValueError(f"a {kind.value} operator has tau = 1 and polynomial eta")
        elif kind == OperatorClass.TRIVIAL:
            if self.xi1 != 1 or not is_zero(self.xi0) or not all(is_zero(c) for c in self.eta_coeffs):
                raise ValueError("the trivial operator is exactly d_t + u*d_x")
        elif kind == OperatorClass.LIE_CASE:
            if self.xi1 != 0 or not is_zero(self.eta_coeffs[2]) or not is_zero(self.eta_coeffs[3]):
                raise ValueError("a Lie-case operator has xi1 = 0 and eta linear in u")
        elif kind == OperatorClass.NOGO:
            if self.xi1 != -HALF:
                raise ValueError("a no-go operator has xi1 = -1/2")
            if not is_zero(self.eta_coeffs[3] - QUARTER) or not is_zero(self.eta_coeffs[2] + self.xi0 / 2):
                raise ValueError("a no-go operator has eta3 = 1/4 and eta2 = -xi0/2")
        return self

    def xi(self) -> Expr:
        """xi(t, x, u)."""
        if self.xi1 is None or self.xi1 == 0:
            return self.xi0
        return simplify(Add((Mul((const(self.xi1), U)), self.xi0)))

    def eta(self) -> Expr:
        """eta(t, x, u)."""
        if self.eta_general is not None:
            return self.eta_general
        return simplify(Add(tuple(Mul((c, Pow(U, k))) for k, c in enumerate(self.eta_coeffs or []))))

    @computed_field  # type: ignore[misc]
    @property
    def expressions(self) -> Dict[str, str]:
        return {"tau": str(self.tau), "xi": to_string(self.xi()), "eta": to_string(self.eta())}

    def payload(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)

    @classmethod
    def from_payload(cls, data: dict) -> "ReductionOperator":
        """Inverse of ``payload``; the derived ``expressions`` entry is ignored."""
        return cls.model_validate({k: v for k, v in data.items() if k != "expressions"})

    def __str__(self) -> str:
        parts = []
        if self.tau:
            parts.append("d_t")
        parts.append(f"({to_string(self.xi())})*d_x")
        parts.append(f"({to_string(self.eta())})*d_u")
        return " + ".join(parts)


class NogoCoefficients(BaseModel):
    """xi0, eta1, eta0 of a no-go operator."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    xi0: ExprField
    eta1: ExprField
    eta0: ExprField

    def as_tuple(self) -> Tuple[Expr, Expr, Expr]:
        return self.xi0, self.eta1, self.eta0


def nogo_from_heat_triple(triple: HeatTriple) -> NogoCoefficients:
    """
    xi0 = W_x/W, eta1 = |v, v_xx, v_xxx|/W, eta0 = -2*|v_x, v_xx, v_xxx|/W
    with W = |v, v_x, v_xx| for the triple v = (v1, v2, v3).
    """
    vs = triple.vs
    w = simplify(triple.wronskian)
    if is_zero(w):
        raise LinearDependenceError(f"Wronskian of ({','.join(triple.labels)}) vanishes identically")
    xi0 = simplify(Div(diff(w, "x"), w))
    eta1 = simplify(Div(wronskian(vs, (0, 2, 3)), w))
    eta0 = simplify(Div(Mul((Const(-2), wronskian(vs, (1, 2, 3)))), w))
    logger.info(f"No-go coefficients of ({','.join(triple.labels)}): xi0={xi0}, eta1={eta1}, eta0={eta0}")
    return NogoCoefficients(xi0=xi0, eta1=eta1, eta0=eta0)


def burgers_units(u: Expr) -> Tuple[Expr, Expr]:
    """y = 2*u_x + u^2 and z = 4*u_xx + 6*u*u_x + u^3."""
    ux = diff(u, "x")
    y = simplify(Add((Mul((Const(2), ux)), Pow(u, 2))))
    z = simplify(Add((Mul((Const(4), diff(u, "x", 2))), Mul((Const(6), u, ux)), Pow(u, 3))))
    return y, z


def nogo_from_burgers_triple(u1: "BurgersSolution | Expr", u2: "BurgersSolution | Expr", u3: "BurgersSolution | Expr") -> NogoCoefficients:
    """
    The same coefficients from three Burgers solutions:
    xi0 = |e,u,z|/(2D), eta1 = |e,y,z|/(4D), eta0 = -|u,y,z|/(4D), D = |e,u,y|.

    Raises:
        LinearDependenceError: D vanishes identically
    """
    us = [s.u if isinstance(s, BurgersSolution) else s for s in (u1, u2, u3)]
    ys, zs = zip(*(burgers_units(u) for u in us))
    es = [ONE, ONE, ONE]
    denominator = det3(columns(es, us, ys))
    if is_zero(denominator):
        raise LinearDependenceError("|e, u, y| vanishes identically for these solutions")
    xi0 = simplify(Div(det3(columns(es, us, zs)), Mul((Const(2), denominator))))
    eta1 = simplify(Div(det3(columns(es, ys, zs)), Mul((Const(4), denominator))))
    eta0 = simplify(Div(Neg(det3(columns(us, ys, zs))), Mul((Const(4), denominator))))
    return NogoCoefficients(xi0=xi0, eta1=eta1, eta0=eta0)


def assemble_nogo(xi0: Expr, eta1: Expr, eta0: Expr) -> ReductionOperator:
    """d_t + (-u/2 + xi0)*d_x + (u^3/4 - (xi0/2)*u^2 + eta1*u + eta0)*d_u."""
    xi0, eta1, eta0 = simplify(xi0), simplify(eta1), simplify(eta0)
    return ReductionOperator(
        kind=OperatorClass.NOGO,
        tau=1,
        xi1=-HALF,
        xi0=xi0,
        eta_coeffs=[eta0, eta1, simplify(Neg(Div(xi0, Const(2)))), Const(QUARTER)],
    )


def trivial_operator() -> ReductionOperator:
    """d_t + u*d_x."""
    return ReductionOperator(kind=OperatorClass.TRIVIAL, tau=1, xi1=Fraction(1), xi0=ZERO, eta_coeffs=[ZERO] * 4)


class LieCaseCoefficients(BaseModel):
    """xi0 = xi01(t)*x + xi00(t) and the eta it determines."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    constants: Tuple[Rational, Rational, Rational, Rational, Rational]
    denominator: ExprField = Field(description="c2*t^2 + 2*c1*t + c0")
    xi01: ExprField
    xi00: ExprField
    eta1: ExprField
    eta0: ExprField

    @property
    def xi0(self) -> Expr:
        return simplify(Add((Mul((self.xi01, X)), self.xi00)))


def _lie_constants(constants: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
    if len(constants) != 5:
        raise UsageError(f"the Lie case needs five constants c0..c4, got {len(constants)}")
    cs = tuple(parse_rational(c) for c in constants)
    if cs[0] == 0 and cs[1] == 0 and cs[2] == 0:
        raise UsageError("(c0, c1, c2) must not all vanish")
    return cs


def lie_case_coefficients(*constants: Fraction) -> LieCaseCoefficients:
    """
    xi01 = (c2*t + c1)/Dn, xi00 = (c4*t + c3)/Dn with Dn = c2*t^2 + 2*c1*t + c0,
    eta1 = -xi0_x and eta0 = xi0_t + 2*xi0*xi0_x + 3*xi0_xx.
    """
    c0, c1, c2, c3, c4 = _lie_constants(constants)
    dn = simplify(c2 * Pow(T, 2) + 2 * c1 * T + c0)
    xi01 = simplify(Div(c2 * T + c1, dn))
    xi00 = simplify(Div(c4 * T + c3, dn))
    xi0 = simplify(Add((Mul((xi01, X)), xi00)))
    xi0_x = diff(xi0, "x")
    eta1 = simplify(Neg(xi0_x))
    eta0 = simplify(Add((diff(xi0, "t"), Mul((Const(2), xi0, xi0_x)), Mul((Const(3), diff(xi0, "x", 2))))))
    return LieCaseCoefficients(
        constants=(c0, c1, c2, c3, c4), denominator=dn, xi01=xi01, xi00=xi00, eta1=eta1, eta0=eta0
    )


def lie_case_operator(*constants: Fraction) -> ReductionOperator:
    """
    d_t + [((c2*t + c1)*x + c4*t + c3)/Dn]*d_x + [(-(c2*t + c1)*u + c2*x + c4)/Dn]*d_u.

    Raises:
        UsageError: (c0, c1, c2) = (0, 0, 0)
    """
    c0, c1, c2, c3, c4 = _lie_constants(constants)
    dn = simplify(c2 * Pow(T, 2) + 2 * c1 * T + c0)
    xi0 = simplify(Div((c2 * T + c1) * X + c4 * T + c3, dn))
    eta1 = simplify(Div(Neg(c2 * T + c1), dn))
    eta0 = simplify(Div(c2 * X + c4, dn))
    return ReductionOperator(
        kind=OperatorClass.LIE_CASE,
        tau=1,
        xi1=Fraction(0),
        xi0=xi0,
        eta_coeffs=[eta0, eta1, ZERO, ZERO],
    )


def lie_case_reduced_residual(
    *constants: Fraction,
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """
    Residuals of xi01_tt + 6*xi01*xi01_t + 4*xi01^3 = 0,
    xi00_tt + 4*xi01*xi00_t + 2*xi01_t*xi00 + 4*xi01^2*xi00 = 0,
    and of the operator's coefficients against eta1, eta0 derived from xi0.
    """
    coefficients = lie_case_coefficients(*constants)
    operator = lie_case_operator(*constants)
    f, g = coefficients.xi01, coefficients.xi00
    f_t, g_t = diff(f, "t"), diff(g, "t")
    residuals = [
        Add((diff(f, "t", 2), Mul((Const(6), f, f_t)), Mul((Const(4), Pow(f, 3))))),
        Add((diff(g, "t", 2), Mul((Const(4), f, g_t)), Mul((Const(2), f_t, g)), Mul((Const(4), Pow(f, 2), g)))),
        operator.xi0 - coefficients.xi0,
        operator.eta_coeffs[1] - coefficients.eta1,
        operator.eta_coeffs[0] - coefficients.eta0,
    ]
    return run_residuals(
        [simplify(r) for r in residuals],
        grid or Grid(),
        settings.DETERMINING_TOLERANCE if tolerance is None else tolerance,
        guards=[Div(ONE, coefficients.denominator)],
        label=f"Lie-case reduced system {tuple(str(c) for c in coefficients.constants)}",
    )


def singular_operator(phi: Expr) -> ReductionOperator:
    """
    d_x - (Phi_x/Phi_u)*d_u for the family Phi(t, x, u) = const.

    Raises:
        DegenerateInputError: Phi_u vanishes identically
    """
    phi_u = diff(phi, "u")
    if is_zero(phi_u):
        raise DegenerateInputError(f"Phi_u vanishes identically for Phi = {phi}")
    eta = simplify(Neg(Div(diff(phi, "x"), phi_u)))
    return ReductionOperator(kind=OperatorClass.SINGULAR, tau=0, xi1=None, xi0=ONE, eta_general=eta)


def singular_determining_expression(eta: Expr) -> Expr:
    """eta_t + u*eta_x + eta^2 + eta_xx + 2*eta*eta_xu + eta^2*eta_uu."""
    eta_x = diff(eta, "x")
    return simplify(
        Add(
            (
                diff(eta, "t"),
                Mul((U, eta_x)),
                Pow(eta, 2),
                diff(eta, "x", 2),
                Mul((Const(2), eta, diff(eta_x, "u"))),
                Mul((Pow(eta, 2), diff(eta, "u", 2))),
            )
        )
    )


def _grid3(grid: Optional[Grid]) -> Grid3D:
    if grid is None:
        return Grid3D()
    return grid if isinstance(grid, Grid3D) else grid.with_u()


def singular_determining_residual(
    eta: Expr,
    grid3: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """The single determining equation of singular operators d_x + eta*d_u."""
    return run_residual(
        singular_determining_expression(eta),
        _grid3(grid3),
        settings.DETERMINING_TOLERANCE if tolerance is None else tolerance,
        guards=[eta],
        label=f"singular determining equation for eta = {eta}",
    )


def nogo_determining_system(xi0: Expr, eta1: Expr, eta0: Expr) -> List[Expr]:
    """
    R1 = xi0_t + 2*xi0*xi0_x + xi0_xx - 2*eta1_x
    R2 = eta1_t + 2*xi0_x*eta1 + eta1_xx + eta0_x
    R3 = eta0_t + 2*xi0_x*eta0 + eta0_xx
    """
    xi0_x = diff(xi0, "x")
    r1 = Add((diff(xi0, "t"), Mul((Const(2), xi0, xi0_x)), diff(xi0, "x", 2), Neg(Mul((Const(2), diff(eta1, "x"))))))
    r2 = Add((diff(eta1, "t"), Mul((Const(2), xi0_x, eta1)), diff(eta1, "x", 2), diff(eta0, "x")))
    r3 = Add((diff(eta0, "t"), Mul((Const(2), xi0_x, eta0)), diff(eta0, "x", 2)))
    return [simplify(r) for r in (r1, r2, r3)]


def nogo_determining_residual(
    xi0: Expr,
    eta1: Expr,
    eta0: Expr,
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """Worst of the three no-go determining residuals."""
    return run_residuals(
        nogo_determining_system(xi0, eta1, eta0),
        grid or Grid(),
        tolerance,
        guards=[xi0, eta1, eta0],
        label="no-go determining system",
    )


def general_determining_system(xi: Expr, eta: Expr) -> List[Expr]:
    """The four equations on xi(t, x, u), eta(t, x, u) for operators with tau = 1."""
    xi_u, xi_x = diff(xi, "u"), diff(xi, "x")
    eta_x = diff(eta, "x")
    e1 = diff(xi, "u", 2)
    e2 = Add(
        (
            Neg(Mul((Const(2), diff(xi_x, "u")))),
            Neg(Mul((Const(2), xi_u, xi))),
            Mul((Const(2), U, xi_u)),
            diff(eta, "u", 2),
        )
    )
    e3 = Add(
        (
            Mul((Const(2), diff(eta_x, "u"))),
            Mul((Const(2), xi_u, eta)),
            eta,
            Neg(diff(xi, "t")),
            Mul((U, xi_x)),
            Neg(diff(xi, "x", 2)),
            Neg(Mul((Const(2), xi_x, xi))),
        )
    )
    e4 = Add((diff(eta, "t"), Mul((U, eta_x)), diff(eta, "x", 2), Mul((Const(2), xi_x, eta))))
    return [simplify(e) for e in (e1, e2, e3, e4)]


def general_determining_residual(
    operator: ReductionOperator,
    grid3: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """
    Worst of the four determining residuals.

    Raises:
        UsageError: operator is singular (tau = 0)
    """
    if operator.tau != 1:
        raise UsageError("the general determining system applies to operators with tau = 1")
    xi, eta = operator.xi(), operator.eta()
    return run_residuals(
        general_determining_system(xi, eta),
        _grid3(grid3),
        settings.DETERMINING_TOLERANCE if tolerance is None else tolerance,
        guards=[xi, eta],
        label=f"determining system of {operator.kind.value} operator",
    )


def third_order_constraint(v: Expr, xi0: Expr, eta1: Expr, eta0: Expr) -> Expr:
    """v_xxx - xi0*v_xx + eta1*v_x + eta0*v/2."""
    return simplify(
        Add(
            (
                diff(v, "x", 3),
                Neg(Mul((xi0, diff(v, "x", 2)))),
                Mul((eta1, diff(v, "x"))),
                Mul((Const(HALF), eta0, v)),
            )
        )
    )


def third_order_constraint_residual(
    v: "HeatSolution | Expr",
    xi0: Expr,
    eta1: Expr,
    eta0: Expr,
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """The linear third-order equation each member of a generating triple satisfies."""
    expression = v.v if isinstance(v, HeatSolution) else v
    if grid is None:
        grid = Grid().backward() if isinstance(v, HeatSolution) and v.backward_time else Grid()
    return run_residual(
        third_order_constraint(expression, xi0, eta1, eta0),
        grid,
        settings.DETERMINING_TOLERANCE if tolerance is None else tolerance,
        guards=[expression, xi0, eta1, eta0],
        label=f"third-order constraint on {expression}",
    )


def characteristic(operator: ReductionOperator, u: Expr) -> Expr:
    """Q[u] = eta - tau*u_t - xi*u_x with u(t, x) substituted into xi and eta."""
    xi = substitute(operator.xi(), {"u": u})
    eta = substitute(operator.eta(), {"u": u})
    terms = [eta, Neg(Mul((xi, diff(u, "x"))))]
    if operator.tau:
        terms.append(Neg(diff(u, "t")))
    return simplify(Add(tuple(terms)))


def invariant_surface_residual(
    operator: ReductionOperator,
    u: "BurgersSolution | Expr",
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """max |eta - tau*u_t - xi*u_x| along u."""
    solution = u if isinstance(u, BurgersSolution) else None
    expression = solution.u if solution else u
    if grid is None:
        grid = solution.default_grid() if solution else Grid()
    return run_residual(
        characteristic(operator, expression),
        grid,
        tolerance,
        guards=[expression],
        label=f"invariant surface condition of {operator.kind.value} operator on {expression}",
    )


def generalized_symmetry_residual(
    operator: ReductionOperator,
    u: "BurgersSolution | Expr",
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """
    L[u] + Q[u] along u. For the trivial operator this is u_xx, whose
    vanishing gives the ansatz u = alpha(t)*x + beta(t).
    """
    solution = u if isinstance(u, BurgersSolution) else None
    expression = solution.u if solution else u
    residual = simplify(Add((burgers_operator(expression), characteristic(operator, expression))))
    return run_residual(
        residual,
        grid or (solution.default_grid() if solution else Grid()),
        tolerance,
        guards=[expression],
        label=f"generalized symmetry L[u] + Q[u] on {expression}",
    )


def operator_from_expressions(xi: Expr, eta: Expr) -> ReductionOperator:
    """
    Classify d_t + xi*d_x + eta*d_u with xi linear in u and eta a cubic in u.

    Raises:
        UsageError: xi or eta does not have that shape, or xi1 is not 1, 0, -1/2
    """
    xi_parts = collect(simplify(xi), "u")
    eta_parts = collect(simplify(eta), "u")
    if xi_parts is None or eta_parts is None or max(xi_parts, default=0) > 1 or max(eta_parts, default=0) > 3:
        raise UsageError("xi must be linear and eta cubic in u with coefficients in t, x")
    xi1 = xi_parts.get(1, ZERO)
    value = constant_value(xi1)
    if value is None or isinstance(value, float):
        raise UsageError(f"the u-coefficient of xi must be a rational constant, got {to_string(xi1)}")
    coeffs = [eta_parts.get(k, ZERO) for k in range(4)]
    xi0 = xi_parts.get(0, ZERO)
    if value == 1:
        kind = OperatorClass.TRIVIAL
    elif value == 0:
        kind = OperatorClass.LIE_CASE
    elif value == -HALF:
        kind = OperatorClass.NOGO
    else:
        raise UsageError(f"xi1 must be 1, 0 or -1/2, got {xi1}")
    return ReductionOperator(kind=kind, tau=1, xi1=value, xi0=xi0, eta_coeffs=coeffs)
