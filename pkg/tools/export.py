"""CSV export of solution samples."""

import csv
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.evaluate import evaluate_grid
from services.burgers import BurgersSolution
from services.verify import Grid, Status

logger = logging.getLogger(__name__)

HEADER = ("t", "x", "u")


class ExportResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = Field(default=None, description="File written, none when nothing was written")
    rows: int = Field(description="Data rows written")
    excluded_count: int = Field(description="Grid points skipped near poles")
    total_count: int = Field(description="Grid size")
    status: Status = Field(description="pass, or inconclusive when every point was excluded")


def _format(value: float) -> str:
    return f"{value:.17g}"


def export_samples(solution: BurgersSolution, grid: Optional[Grid], path: str) -> ExportResult:
    """
    Write (t, x, u) at every non-excluded grid point as CSV with header t,x,u.

    Raises:
        OSError: the file cannot be written
    """
    grid = grid or solution.default_grid()
    mesh = grid.mesh()
    evaluation = evaluate_grid(solution.u, mesh, grid.exclusion_threshold)
    valid = evaluation.valid
    total = int(valid.size)
    rows = int(np.count_nonzero(valid))

    if rows == 0:
        logger.warning(f"Every grid point is excluded for {solution.expression}; no file written")
        return ExportResult(rows=0, excluded_count=total, total_count=total, status=Status.INCONCLUSIVE)

    t_values = mesh["t"][valid]
    x_values = mesh["x"][valid]
    u_values = evaluation.values[valid]
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(HEADER)
        for t, x, u in zip(t_values, x_values, u_values):
            writer.writerow((_format(t), _format(x), _format(u)))

    logger.info(f"Exported {rows} samples of {solution.expression} to {path}")
    return ExportResult(
        path=str(path),
        rows=rows,
        excluded_count=total - rows,
        total_count=total,
        status=Status.PASS,
    )
