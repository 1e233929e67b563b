"""JSON payloads and the construction/verification pipelines behind the CLI."""

import json
import logging
import sys
from enum import IntEnum
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.parser import parse
from core.simplify import simplify
from services.burgers import BurgersSolution, ProvenanceKind, Provenance, burgers_residual, hopf_cole
from services.heat import HeatCatalog
from services.reduction import (
    OperatorClass,
    ReductionOperator,
    assemble_nogo,
    general_determining_residual,
    invariant_surface_residual,
    lie_case_operator,
    nogo_determining_residual,
    nogo_from_burgers_triple,
    nogo_from_heat_triple,
    singular_determining_residual,
    singular_operator,
    trivial_operator,
)
from services.verify import Grid, Status, VerificationReport, combine_reports
from utils.errors import UsageError

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    FAIL = 1
    USAGE = 2
    INCONCLUSIVE = 3


def exit_code_for(status: Status) -> ExitCode:
    return {
        Status.PASS: ExitCode.OK,
        Status.FAIL: ExitCode.FAIL,
        Status.INCONCLUSIVE: ExitCode.INCONCLUSIVE,
    }[status]


def read_json(source: str) -> Any:
    """
    Parse JSON from a file, or from standard input when ``source`` is ``-``.

    Raises:
        UsageError: unreadable file or malformed JSON
    """
    try:
        text = sys.stdin.read() if source == "-" else Path(source).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {source}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{source} is not valid JSON: {e}") from e


def dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2)


def _unwrap(data: Any, key: str) -> Any:
    """Accept either a bare model or a CLI payload that nests it under ``key``."""
    if isinstance(data, dict) and key in data and isinstance(data[key], dict):
        return data[key]
    return data


def load_solution(data: Any) -> BurgersSolution:
    """
    A Burgers solution from its JSON payload.

    Raises:
        UsageError: payload does not describe a solution
    """
    try:
        return BurgersSolution.model_validate(_unwrap(data, "solution"))
    except ValidationError as e:
        raise UsageError(f"not a solution payload: {e}") from e


def load_operator(data: Any) -> ReductionOperator:
    """
    A reduction operator from its JSON payload.

    Raises:
        UsageError: payload does not describe an operator
    """
    body = _unwrap(data, "operator")
    if not isinstance(body, dict):
        raise UsageError("operator payload must be a JSON object")
    try:
        return ReductionOperator.from_payload(body)
    except ValidationError as e:
        raise UsageError(f"not an operator payload: {e}") from e


def solution_from_expression(text: str) -> BurgersSolution:
    """An ad-hoc solution candidate typed on the command line."""
    u = simplify(parse(text))
    return BurgersSolution(
        expression=u,
        provenance=Provenance(kind=ProvenanceKind.CLOSED_FORM, label="expression"),
    )


def build_operator(
    kind: str,
    heat_triple: Optional[Sequence[str]] = None,
    representation: str = "heat",
    constants: Optional[Sequence[str]] = None,
    phi: Optional[str] = None,
) -> ReductionOperator:
    """
    Construct an operator of the requested class.

    Args:
        kind: nogo, lie, singular or trivial
        heat_triple: Three heat labels or expressions (nogo)
        representation: ``heat`` uses the Wronskian formulas, ``burgers`` the
            Hopf-Cole images of the triple (nogo)
        constants: c0..c4 (lie)
        phi: Phi(t, x, u) of the solution family Phi = const (singular)

    Raises:
        UsageError: missing or inconsistent inputs for the class
    """
    try:
        operator_class = OperatorClass(kind)
    except ValueError as e:
        raise UsageError(f"unknown operator class {kind!r}") from e

    if operator_class == OperatorClass.TRIVIAL:
        return trivial_operator()

    if operator_class == OperatorClass.LIE_CASE:
        if constants is None:
            raise UsageError("--class lie needs --c c0,c1,c2,c3,c4")
        return lie_case_operator(*constants)

    if operator_class == OperatorClass.SINGULAR:
        if phi is None:
            raise UsageError("--class singular needs --phi")
        return singular_operator(simplify(parse(phi)))

    if heat_triple is None:
        raise UsageError("--class nogo needs --heat-triple")
    triple = HeatCatalog.triple(heat_triple)
    if representation == "heat":
        coefficients = nogo_from_heat_triple(triple)
    elif representation == "burgers":
        coefficients = nogo_from_burgers_triple(*(hopf_cole(member) for member in triple.members))
    else:
        raise UsageError(f"unknown representation {representation!r}, expected heat or burgers")
    operator = assemble_nogo(*coefficients.as_tuple())
    if triple.backward_time:
        operator = operator.model_copy(update={"backward_time": True})
    logger.info(f"Built no-go operator from ({','.join(triple.labels)}) via the {representation} formulas")
    return operator


class OperatorVerification(BaseModel):
    """Every residual check that applies to one operator."""

    model_config = ConfigDict(extra="forbid")

    operator_class: str = Field(description="Class of the verified operator")
    reports: Dict[str, VerificationReport] = Field(description="Report per determining system or condition")
    status: Status = Field(description="Combined verdict")


def verify_operator(
    operator: ReductionOperator,
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
    solution: Optional[BurgersSolution] = None,
) -> OperatorVerification:
    """Determining systems of the operator's class, and optionally Q[u] = 0 for a solution."""
    if grid is None:
        grid = Grid().backward() if operator.backward_time else Grid()
    reports: Dict[str, VerificationReport] = {}
    if operator.kind == OperatorClass.SINGULAR:
        reports["singular_determining"] = singular_determining_residual(operator.eta(), grid.with_u(), tolerance)
    else:
        reports["determining_system"] = general_determining_residual(operator, grid.with_u(), tolerance)
        if operator.kind == OperatorClass.NOGO:
            eta0, eta1 = operator.eta_coeffs[0], operator.eta_coeffs[1]
            reports["nogo_system"] = nogo_determining_residual(operator.xi0, eta1, eta0, grid, tolerance)
    if solution is not None:
        reports["invariant_surface"] = invariant_surface_residual(operator, solution, grid, tolerance)

    combined = combine_reports(list(reports.values()))
    return OperatorVerification(operator_class=operator.kind.value, reports=reports, status=combined.status)


def verify_solution(
    solution: BurgersSolution,
    grid: Optional[Grid] = None,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    return burgers_residual(solution, grid, tolerance)


def report_payload(report: VerificationReport) -> Dict[str, Any]:
    return report.model_dump(mode="json", exclude_none=True)
