"""Grid-based residual verification shared by every service."""

import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config.settings import settings
from core.calculus import diff
from core.evaluate import evaluate_grid
from core.expr import Expr, free_variables
from core.printer import to_string
from core.simplify import is_zero, numerator_denominator, simplify
from utils.errors import UsageError

logger = logging.getLogger(__name__)


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class Point(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    t: float = Field(description="Time coordinate")
    x: float = Field(description="Space coordinate")
    u: Optional[float] = Field(default=None, description="Dependent variable, for u-dependent residuals")


class Grid(BaseModel):
    """Tensor grid over (t, x) with the exclusion policy."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    t_range: Tuple[float, float] = Field(default_factory=lambda: settings.T_RANGE, description="[tmin, tmax]")
    t_count: int = Field(default_factory=lambda: settings.T_COUNT, ge=2, description="Points along t")
    x_range: Tuple[float, float] = Field(default_factory=lambda: settings.X_RANGE, description="[xmin, xmax]")
    x_count: int = Field(default_factory=lambda: settings.X_COUNT, ge=2, description="Points along x")
    exclusion_threshold: float = Field(
        default_factory=lambda: settings.EXCLUSION_THRESHOLD,
        gt=0,
        description="Denominator magnitude below which a point is excluded",
    )
    exclusion_budget: float = Field(
        default_factory=lambda: settings.EXCLUSION_BUDGET,
        gt=0,
        lt=1,
        description="Largest excluded fraction that still allows a verdict",
    )

    @model_validator(mode="after")
    def _check_ranges(self) -> "Grid":
        for name in ("t_range", "x_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} needs min < max, got [{lo}, {hi}]")
        return self

    @property
    def variables(self) -> Tuple[str, ...]:
        return ("t", "x")

    @property
    def total_count(self) -> int:
        return self.t_count * self.x_count

    def axes(self) -> List[np.ndarray]:
        return [
            np.linspace(*self.t_range, self.t_count),
            np.linspace(*self.x_range, self.x_count),
        ]

    def mesh(self) -> Dict[str, np.ndarray]:
        arrays = np.meshgrid(*self.axes(), indexing="ij")
        return dict(zip(self.variables, arrays))

    def backward(self) -> "Grid":
        """The same grid moved to negative times."""
        return self.model_copy(update={"t_range": settings.BACKWARD_T_RANGE})

    def with_u(self, u_range: Optional[Tuple[float, float]] = None, u_count: Optional[int] = None) -> "Grid3D":
        data = self.model_dump()
        data.update(
            u_range=u_range or settings.U_RANGE,
            u_count=u_count or settings.U_COUNT,
        )
        return Grid3D(**data)

    @classmethod
    def parse(cls, text: str, **overrides: float) -> "Grid":
        """Grid from ``tmin,tmax,nt,xmin,xmax,nx``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 6:
            raise UsageError(f"grid needs tmin,tmax,nt,xmin,xmax,nx; got {text!r}")
        try:
            tmin, tmax, xmin, xmax = (float(parts[i]) for i in (0, 1, 3, 4))
            nt, nx = int(parts[2]), int(parts[5])
            return cls(t_range=(tmin, tmax), t_count=nt, x_range=(xmin, xmax), x_count=nx, **overrides)
        except ValueError as e:
            raise UsageError(f"invalid grid {text!r}: {e}") from e


class Grid3D(Grid):
    """Grid over (t, x, u) for residuals of the jet variable u."""

    u_range: Tuple[float, float] = Field(default_factory=lambda: settings.U_RANGE, description="[umin, umax]")
    u_count: int = Field(default_factory=lambda: settings.U_COUNT, ge=2, description="Points along u")

    @model_validator(mode="after")
    def _check_u_range(self) -> "Grid3D":
        lo, hi = self.u_range
        if not lo < hi:
            raise ValueError(f"u_range needs min < max, got [{lo}, {hi}]")
        return self

    @property
    def variables(self) -> Tuple[str, ...]:
        return ("t", "x", "u")

    @property
    def total_count(self) -> int:
        return self.t_count * self.x_count * self.u_count

    def axes(self) -> List[np.ndarray]:
        return super().axes() + [np.linspace(*self.u_range, self.u_count)]

    def backward(self) -> "Grid3D":
        return self.model_copy(update={"t_range": settings.BACKWARD_T_RANGE})


class VerificationReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: Optional[str] = Field(default=None, description="What was checked")
    max_abs_residual: float = Field(description="Largest residual magnitude over non-excluded points")
    worst_point: Optional[Point] = Field(default=None, description="Where the maximum is attained")
    excluded_count: int = Field(description="Points skipped near poles or outside the domain")
    total_count: int = Field(description="Grid size")
    tolerance: float = Field(description="Pass threshold for the residual")
    passed: bool = Field(description="Residual within tolerance and exclusions within budget")
    status: Status = Field(description="pass, fail or inconclusive")

    @property
    def excluded_fraction(self) -> float:
        return self.excluded_count / self.total_count if self.total_count else 0.0


def _verdict(max_abs: float, excluded: int, total: int, tolerance: float, budget: float) -> Status:
    if total == 0 or excluded / total > budget:
        return Status.INCONCLUSIVE
    return Status.PASS if max_abs <= tolerance else Status.FAIL


def combine_reports(reports: Sequence[VerificationReport], label: Optional[str] = None) -> VerificationReport:
    """Worst case over several residuals checked on the same grid."""
    if not reports:
        raise UsageError("nothing to combine")
    worst = max(reports, key=lambda r: r.max_abs_residual)
    excluded = max(r.excluded_count for r in reports)
    if any(r.status == Status.INCONCLUSIVE for r in reports):
        status = Status.INCONCLUSIVE
    elif all(r.status == Status.PASS for r in reports):
        status = Status.PASS
    else:
        status = Status.FAIL
    return VerificationReport(
        label=label,
        max_abs_residual=worst.max_abs_residual,
        worst_point=worst.worst_point,
        excluded_count=excluded,
        total_count=worst.total_count,
        tolerance=worst.tolerance,
        passed=status == Status.PASS,
        status=status,
    )


def report_from_values(
    values: np.ndarray,
    valid: np.ndarray,
    mesh: Dict[str, np.ndarray],
    grid: Grid,
    tolerance: float,
    label: Optional[str] = None,
) -> VerificationReport:
    """Reduce pointwise residual magnitudes to a report."""
    total = int(valid.size)
    excluded = int(total - np.count_nonzero(valid))
    worst_point = None
    max_abs = 0.0
    if excluded < total:
        magnitudes = np.where(valid, np.abs(values), -np.inf)
        index = int(np.argmax(magnitudes))
        max_abs = float(magnitudes.reshape(-1)[index])
        coords = {name: float(array.reshape(-1)[index]) for name, array in mesh.items()}
        worst_point = Point(**coords)
    status = _verdict(max_abs, excluded, total, tolerance, grid.exclusion_budget)
    report = VerificationReport(
        label=label,
        max_abs_residual=max_abs,
        worst_point=worst_point,
        excluded_count=excluded,
        total_count=total,
        tolerance=tolerance,
        passed=status == Status.PASS,
        status=status,
    )
    if status == Status.INCONCLUSIVE:
        logger.warning(f"{label or 'residual'}: {excluded}/{total} points excluded, verdict inconclusive")
    else:
        logger.info(f"{label or 'residual'}: max {max_abs:.3e}, {excluded} excluded, {status.value}")
    return report


def _validity(expressions: Sequence[Expr], mesh: Dict[str, np.ndarray], threshold: float) -> np.ndarray:
    valid = np.ones(next(iter(mesh.values())).shape, dtype=bool)
    for guard in expressions:
        valid &= evaluate_grid(guard, mesh, threshold).valid
    return valid


def _check_coverage(expressions: Sequence[Expr], grid: Grid) -> None:
    for e in expressions:
        missing = free_variables(e) - set(grid.variables)
        if missing:
            raise UsageError(f"{to_string(e)} depends on {sorted(missing)}, which the grid does not cover")


def run_residual(
    residual: Expr,
    grid: Grid,
    tolerance: Optional[float] = None,
    guards: Sequence[Expr] = (),
    label: Optional[str] = None,
) -> VerificationReport:
    """
    Evaluate |residual| on the grid and produce a report.

    Args:
        residual: Expression that vanishes on success
        grid: Grid or Grid3D covering the residual's variables
        tolerance: Pass threshold, defaults to settings.DEFAULT_TOLERANCE
        guards: Expressions whose poles also exclude points (the inputs the
            residual was built from)
        label: Name used in logs and in the report

    Returns:
        VerificationReport
    """
    tolerance = settings.DEFAULT_TOLERANCE if tolerance is None else tolerance
    _check_coverage([residual, *guards], grid)
    mesh = grid.mesh()
    valid = _validity(guards, mesh, grid.exclusion_threshold)
    if is_zero(residual):
        values = np.zeros_like(valid, dtype=float)
    else:
        evaluation = evaluate_grid(simplify(residual), mesh, grid.exclusion_threshold)
        values, valid = evaluation.values, valid & evaluation.valid
    return report_from_values(values, valid, mesh, grid, tolerance, label)


def run_residuals(
    residuals: Sequence[Expr],
    grid: Grid,
    tolerance: Optional[float] = None,
    guards: Sequence[Expr] = (),
    label: Optional[str] = None,
) -> VerificationReport:
    """Several residuals on one grid; a point excluded for one is excluded for all."""
    tolerance = settings.DEFAULT_TOLERANCE if tolerance is None else tolerance
    _check_coverage([*residuals, *guards], grid)
    mesh = grid.mesh()
    valid = _validity(guards, mesh, grid.exclusion_threshold)
    worst = np.zeros_like(valid, dtype=float)
    for residual in residuals:
        if is_zero(residual):
            continue
        evaluation = evaluate_grid(simplify(residual), mesh, grid.exclusion_threshold)
        valid &= evaluation.valid
        worst = np.maximum(worst, np.where(evaluation.valid, np.abs(evaluation.values), 0.0))
    return report_from_values(worst, valid, mesh, grid, tolerance, label)


def finite_difference_check(
    e: Expr,
    v: str,
    grid: Grid,
    h: Optional[float] = None,
    tolerance: Optional[float] = None,
    clearance: Optional[float] = None,
) -> VerificationReport:
    """
    Compare the exact derivative with the central difference
    (e(p+h) - e(p-h)) / 2h, relative to 1 + |exact|.

    Points closer to a pole of ``e`` than ``clearance * h`` along ``v`` are
    excluded. The distance is the first-order estimate |den| / |d den/dv| of
    the canonical denominator; beyond it the truncation error at a simple
    pole stays below 1/clearance^2 relative to the derivative.
    """
    h = settings.FD_STEP if h is None else h
    if not h > 0:
        raise UsageError(f"finite-difference step must be positive, got {h}")
    if v not in grid.variables:
        raise UsageError(f"grid does not vary {v!r}")
    tolerance = settings.FD_RELATIVE_TOLERANCE if tolerance is None else tolerance
    clearance = settings.FD_CLEARANCE if clearance is None else clearance
    _check_coverage([e], grid)
    mesh = grid.mesh()
    threshold = grid.exclusion_threshold
    exact = evaluate_grid(diff(e, v), mesh, threshold)
    forward = evaluate_grid(e, {**mesh, v: mesh[v] + h}, threshold)
    backward = evaluate_grid(e, {**mesh, v: mesh[v] - h}, threshold)
    valid = exact.valid & forward.valid & backward.valid & evaluate_grid(e, mesh, threshold).valid
    with np.errstate(all="ignore"):
        central = (forward.values - backward.values) / (2 * h)
        relative = np.abs(exact.values - central) / (1 + np.abs(exact.values))
    valid &= np.isfinite(relative)
    _, den = numerator_denominator(e)
    if v in free_variables(den):
        level = evaluate_grid(den, mesh, threshold)
        slope = evaluate_grid(diff(den, v), mesh, threshold)
        with np.errstate(all="ignore"):
            distance = np.abs(level.values) / np.abs(slope.values)
        valid &= level.valid & slope.valid & (distance >= clearance * h)
    return report_from_values(relative, valid, mesh, grid, tolerance, f"d/d{v} {to_string(e)}")


def random_points(
    grid: Grid,
    count: int,
    seed: Optional[int] = None,
    guards: Sequence[Expr] = (),
    max_draws: int = 50,
) -> Dict[str, np.ndarray]:
    """
    ``count`` uniformly drawn points inside the grid box where every guard
    evaluates cleanly.
    """
    rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
    ranges = dict(zip(grid.variables, (grid.t_range, grid.x_range, getattr(grid, "u_range", None))))
    kept: Dict[str, List[np.ndarray]] = {name: [] for name in grid.variables}
    have = 0
    for _ in range(max_draws):
        batch = {name: rng.uniform(*ranges[name], size=2 * count) for name in grid.variables}
        valid = _validity(guards, batch, grid.exclusion_threshold) if guards else np.ones(2 * count, dtype=bool)
        for name in grid.variables:
            kept[name].append(batch[name][valid])
        have += int(np.count_nonzero(valid))
        if have >= count:
            break
    return {name: np.concatenate(parts)[:count] for name, parts in kept.items()}
