"""Shared fixtures: catalog triples, grids and an expression comparison."""

from typing import Callable

import pytest

from core.expr import Expr
from core.simplify import is_zero
from services.heat import HeatCatalog, HeatTriple
from services.verify import Grid


@pytest.fixture
def grid() -> Grid:
    return Grid()


@pytest.fixture
def small_grid() -> Grid:
    return Grid(t_count=7, x_count=9)


@pytest.fixture
def quadratic_triple() -> HeatTriple:
    return HeatCatalog.triple(("h0", "h1", "h2"))


@pytest.fixture
def cubic_triple() -> HeatTriple:
    return HeatCatalog.triple(("h0", "h1", "h3"))


@pytest.fixture
def tanh_triple() -> HeatTriple:
    return HeatCatalog.triple(("h0", "e(1)", "e(-1)"))


@pytest.fixture
def same() -> Callable[[Expr, Expr], bool]:
    """Exact equality after simplification."""

    def compare(a: Expr, b: Expr) -> bool:
        return is_zero(a - b)

    return compare
