"""Exact solutions of the backward heat equation v_t + v_xx = 0."""

import logging
import re
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config.settings import settings
from core.calculus import diff
from core.evaluate import evaluate_grid
from core.expr import ONE, T, X, Add, Expr, Mul, Neg, Pow, cos, exp, free_variables, sqrt
from core.fields import ExprField, parse_rational
from core.matrix import det3
from core.parser import parse
from core.simplify import is_zero, simplify
from services.verify import Grid, Point, Status, VerificationReport, run_residual
from utils.errors import CatalogBoundError, LinearDependenceError, UnknownLabelError, UsageError

logger = logging.getLogger(__name__)


class HeatSolution(BaseModel):
    """A solution of v_t + v_xx = 0 in (t, x)."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    label: str = Field(description="Catalog label, or the expression text for ad-hoc input")
    expression: ExprField = Field(description="v(t, x)")
    singular_locus_hint: str = Field(default="none", description="Where v or its derivatives are undefined")
    backward_time: bool = Field(default=False, description="Defined only for t < 0")

    @property
    def v(self) -> Expr:
        return self.expression


class HeatTriple(BaseModel):
    """Three heat solutions with a point where their Wronskian is nonzero."""

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    members: Tuple[HeatSolution, HeatSolution, HeatSolution] = Field(description="v1, v2, v3")
    wronskian: ExprField = Field(description="W = |v, v_x, v_xx|")
    certificate: Point = Field(description="Grid point with |W| above the certificate threshold")

    @property
    def vs(self) -> List[Expr]:
        return [m.v for m in self.members]

    @property
    def labels(self) -> List[str]:
        return [m.label for m in self.members]

    @property
    def backward_time(self) -> bool:
        return any(m.backward_time for m in self.members)

    def default_grid(self) -> Grid:
        return Grid().backward() if self.backward_time else Grid()


def heat_residual(v: Expr) -> Expr:
    """v_t + v_xx, simplified."""
    return simplify(Add((diff(v, "t"), diff(v, "x", 2))))


def heat_polynomial(n: int) -> HeatSolution:
    """
    Heat polynomial h_n, the n-th Taylor coefficient (times n!) of
    exp(a*x - a^2*t) in a.

    Raises:
        CatalogBoundError: n outside 0..HEAT_CATALOG_BOUND
    """
    if isinstance(n, bool) or not isinstance(n, int) or not 0 <= n <= settings.HEAT_CATALOG_BOUND:
        raise CatalogBoundError(f"heat polynomial index must lie in 0..{settings.HEAT_CATALOG_BOUND}, got {n!r}")
    previous, current = ONE, X
    if n == 0:
        current = ONE
    for k in range(1, n):
        previous, current = current, simplify(
            Add((Mul((X, current)), Neg(Mul((Fraction(2 * k) * T, previous)))))
        )
    return HeatSolution(label=f"h{n}", expression=current)


def exp_solution(a: Fraction) -> HeatSolution:
    """exp(a*x - a^2*t)."""
    a = parse_rational(a)
    v = simplify(exp(a * X - a * a * T))
    return HeatSolution(label=f"e({a})", expression=v)


def trig_solution(a: Fraction, phase: Fraction) -> HeatSolution:
    """exp(a^2*t) * cos(a*x + phase)."""
    a, phase = parse_rational(a), parse_rational(phase)
    v = simplify(Mul((exp(a * a * T), cos(a * X + phase))))
    return HeatSolution(label=f"trig({a},{phase})", expression=v)


def kernel_solution() -> HeatSolution:
    """The backward kernel (-t)^(-1/2) * exp(x^2/(4t)), defined for t < 0."""
    v = simplify(Mul((sqrt(Neg(T)), exp(Pow(X, 2) / (4 * T)))) / Neg(T))
    return HeatSolution(
        label="kernel",
        expression=v,
        singular_locus_hint="t >= 0 excluded",
        backward_time=True,
    )


def validate_heat(
    v: "HeatSolution | Expr",
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """
    Check v_t + v_xx = 0 on the grid.

    Points where v or the residual cannot be evaluated are exclusions.
    """
    solution = v if isinstance(v, HeatSolution) else None
    expression = solution.v if solution else v
    if "u" in free_variables(expression):
        raise UsageError("a heat solution depends on t and x only")
    if grid is None:
        grid = Grid().backward() if solution and solution.backward_time else Grid()
    tolerance = settings.HEAT_TOLERANCE if tolerance is None else tolerance
    label = f"heat residual of {solution.label if solution else expression}"
    return run_residual(heat_residual(expression), grid, tolerance, guards=[expression], label=label)


def wronskian(vs: Sequence[Expr], orders: Tuple[int, int, int] = (0, 1, 2)) -> Expr:
    """|v, v_(k1), v_(k2)| with x-derivatives of the given orders as columns."""
    return det3([[diff(v, "x", k) for k in orders] for v in vs])


def make_triple(
    v1: HeatSolution,
    v2: HeatSolution,
    v3: HeatSolution,
    grid: Optional[Grid] = None,
) -> HeatTriple:
    """
    Validate three heat solutions and certify their Wronskian at one grid point.

    A member whose heat check is inconclusive is kept with a warning.

    Raises:
        UsageError: A member fails the heat check
        LinearDependenceError: No grid point has |W| above the certificate threshold
    """
    members = (v1, v2, v3)
    if grid is None:
        grid = Grid().backward() if any(m.backward_time for m in members) else Grid()
    for member in members:
        report = validate_heat(member, grid)
        if report.status == Status.FAIL:
            raise UsageError(f"{member.label} does not solve the heat equation (residual {report.max_abs_residual:.3e})")
        if report.status == Status.INCONCLUSIVE:
            logger.warning(
                f"Heat check of {member.label} is inconclusive: {report.excluded_count}/{report.total_count} grid points excluded"
            )

    labels = ",".join(m.label for m in members)
    w = wronskian([m.v for m in members])
    if is_zero(w):
        raise LinearDependenceError(f"Wronskian of ({labels}) vanishes identically")

    mesh = grid.mesh()
    evaluation = evaluate_grid(w, mesh, grid.exclusion_threshold)
    magnitude = np.where(evaluation.valid, np.abs(evaluation.values), 0.0)
    index = int(np.argmax(magnitude))
    best = float(magnitude.reshape(-1)[index])
    if best <= settings.CERTIFICATE_THRESHOLD:
        raise LinearDependenceError(f"no grid point certifies the Wronskian of ({labels})")

    certificate = Point(**{name: float(array.reshape(-1)[index]) for name, array in mesh.items()})
    logger.info(f"Certified triple ({labels}): |W| = {best:.3e} at t={certificate.t}, x={certificate.x}")
    return HeatTriple(members=members, wronskian=w, certificate=certificate)


class HeatCatalog:
    """Heat solutions addressed by stable labels."""

    LABEL_PATTERNS = {
        "polynomial": re.compile(r"^h(\d+)$"),
        "exponential": re.compile(r"^e\(([^(),]+)\)$"),
        "trigonometric": re.compile(r"^trig\(([^(),]+),([^(),]+)\)$"),
        "kernel": re.compile(r"^kernel$"),
    }

    # Listed by `catalog heat`
    EXTRA_LABELS = ["e(1)", "e(-1)", "e(2)", "e(1/2)", "trig(1,0)", "trig(1,1/2)", "trig(2,1/2)", "kernel"]

    # Certified triples mixing polynomial, exponential, trigonometric and kernel members
    DEFAULT_TRIPLES = [
        ("h0", "h1", "h2"),
        ("h0", "h1", "h3"),
        ("h0", "h1", "h4"),
        ("h1", "h2", "h3"),
        ("h0", "e(1)", "e(-1)"),
        ("h0", "h1", "e(1)"),
        ("e(1)", "e(2)", "e(-1)"),
        ("h0", "h1", "trig(1,0)"),
        ("h0", "trig(1,0)", "trig(1,1/2)"),
        ("h0", "e(1)", "trig(1,0)"),
        ("h0", "h1", "kernel"),
    ]

    @classmethod
    def get(cls, label: str) -> HeatSolution:
        """
        Resolve a label: h<n>, e(<a>), trig(<a>,<phase>) or kernel.

        Raises:
            UnknownLabelError: Label matches no family
            CatalogBoundError: Heat polynomial index too large
        """
        text = label.replace(" ", "")
        for family, pattern in cls.LABEL_PATTERNS.items():
            match = pattern.match(text)
            if match is None:
                continue
            try:
                if family == "polynomial":
                    return heat_polynomial(int(match.group(1)))
                if family == "exponential":
                    return exp_solution(parse_rational(match.group(1)))
                if family == "trigonometric":
                    return trig_solution(parse_rational(match.group(1)), parse_rational(match.group(2)))
                return kernel_solution()
            except UsageError as e:
                if isinstance(e, CatalogBoundError):
                    raise
                raise UnknownLabelError(f"bad heat label {label!r}: {e}") from e
        raise UnknownLabelError(f"unknown heat label {label!r}")

    @classmethod
    def resolve(cls, text: str) -> HeatSolution:
        """A catalog label, or else an expression in t and x."""
        try:
            return cls.get(text)
        except UnknownLabelError:
            if any(pattern.match(text.replace(" ", "")) for pattern in cls.LABEL_PATTERNS.values()):
                raise
        v = simplify(parse(text))
        if "u" in free_variables(v):
            raise UsageError("a heat solution depends on t and x only")
        return HeatSolution(label=text, expression=v)

    @classmethod
    def labels(cls) -> List[str]:
        return [f"h{n}" for n in range(settings.HEAT_CATALOG_BOUND + 1)] + cls.EXTRA_LABELS

    @classmethod
    def entries(cls) -> List[HeatSolution]:
        return [cls.get(label) for label in cls.labels()]

    @classmethod
    def triple(cls, labels: Sequence[str], grid: Optional[Grid] = None) -> HeatTriple:
        if len(labels) != 3:
            raise UsageError(f"a triple needs three labels, got {len(labels)}")
        v1, v2, v3 = (cls.resolve(label) for label in labels)
        return make_triple(v1, v2, v3, grid)

    @classmethod
    def default_triples(cls) -> List[HeatTriple]:
        return [cls.triple(labels) for labels in cls.DEFAULT_TRIPLES]


def catalog_payload() -> List[Dict[str, str]]:
    return [entry.model_dump(include={"label", "expression", "singular_locus_hint"}) for entry in HeatCatalog.entries()]
