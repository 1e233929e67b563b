import numpy as np
import pytest
from pydantic import ValidationError

from core import ZERO, X, parse
from services.verify import (
    Grid,
    Grid3D,
    Status,
    VerificationReport,
    combine_reports,
    finite_difference_check,
    random_points,
    run_residual,
    run_residuals,
)
from utils.errors import UsageError


def _report(status: Status, residual: float = 0.0) -> VerificationReport:
    return VerificationReport(
        max_abs_residual=residual,
        excluded_count=0,
        total_count=10,
        tolerance=1e-8,
        passed=status == Status.PASS,
        status=status,
    )


class TestGrid:
    def test_defaults(self, grid):
        assert grid.total_count == 31 * 41
        assert grid.t_range == (0.1, 1.0)
        mesh = grid.mesh()
        assert mesh["t"].shape == (31, 41)
        assert mesh["x"][0, 20] == pytest.approx(0.0)

    def test_parse(self):
        grid = Grid.parse("0.1, 1, 4, -1, 1, 5")
        assert (grid.t_count, grid.x_count) == (4, 5)
        assert grid.x_range == (-1.0, 1.0)

    @pytest.mark.parametrize("text", ["0.1,1,4,-1,1", "a,1,4,-1,1,5", "0.1,1,4.5,-1,1,5"])
    def test_parse_rejects_malformed(self, text):
        with pytest.raises(UsageError):
            Grid.parse(text)

    def test_parse_rejects_inverted_range(self):
        with pytest.raises(UsageError):
            Grid.parse("1,0.1,4,-1,1,5")

    def test_backward(self, grid):
        backward = grid.backward()
        assert backward.t_range == (-2.0, -0.1)
        assert backward.x_count == grid.x_count

    def test_with_u(self, small_grid):
        grid3 = small_grid.with_u()
        assert isinstance(grid3, Grid3D)
        assert grid3.total_count == 7 * 9 * 21
        assert set(grid3.mesh()) == {"t", "x", "u"}

    def test_inverted_u_range(self, small_grid):
        with pytest.raises(ValidationError):
            small_grid.with_u(u_range=(1.0, -1.0))

    @pytest.mark.parametrize("field, value", [("exclusion_threshold", 0.0), ("exclusion_budget", 1.0), ("t_count", 1)])
    def test_field_bounds(self, field, value):
        with pytest.raises(ValidationError):
            Grid(**{field: value})


class TestResiduals:
    def test_exact_zero(self, grid):
        report = run_residual(ZERO, grid)
        assert report.status == Status.PASS
        assert report.max_abs_residual == 0.0
        assert report.excluded_count == 0

    def test_worst_point(self, grid):
        report = run_residual(X, grid, tolerance=1.0)
        assert report.status == Status.FAIL
        assert report.max_abs_residual == pytest.approx(2.0)
        assert abs(report.worst_point.x) == pytest.approx(2.0)

    def test_poles_are_excluded(self, grid):
        report = run_residual(ZERO, grid, guards=[parse("1/x")])
        assert report.excluded_count == 31
        assert report.status == Status.PASS
        assert report.excluded_fraction == pytest.approx(1 / 41)

    def test_exclusion_budget_makes_verdict_inconclusive(self, grid):
        report = run_residual(ZERO, grid, guards=[parse("sqrt(x)")])
        assert report.excluded_fraction > grid.exclusion_budget
        assert report.status == Status.INCONCLUSIVE
        assert not report.passed

    def test_residual_must_live_on_the_grid(self, grid):
        with pytest.raises(UsageError):
            run_residual(parse("u*x"), grid)

    def test_several_residuals_share_exclusions(self, grid):
        report = run_residuals([parse("x/t"), parse("1/x")], grid, tolerance=100.0)
        assert report.excluded_count == 31
        assert report.max_abs_residual == pytest.approx(20.0)

    def test_u_residual_on_three_dimensional_grid(self, small_grid):
        report = run_residual(parse("u^2"), small_grid.with_u(), tolerance=10.0)
        assert report.max_abs_residual == pytest.approx(9.0)
        assert report.worst_point.u is not None


class TestReportProperties:
    @pytest.mark.parametrize("source", ["x^3 - 6*t*x", "sin(3*x)*exp(t)", "1/(x - 1/3) + t", "sqrt(x)*t"])
    def test_repeated_runs_are_identical(self, grid, source):
        first = run_residual(parse(source), grid, tolerance=1.0)
        second = run_residual(parse(source), grid, tolerance=1.0)
        assert first == second

    @pytest.mark.parametrize("source", ["x^3 - 6*t*x", "1/(x - 1/3) + t", "4*x/(x^2 - 2*t)", "t*x^2 - 3*x + 1"])
    def test_refined_grid_never_lowers_the_maximum(self, source):
        coarse = Grid(t_range=(0.25, 1.25), t_count=5, x_range=(-2.0, 2.0), x_count=5)
        fine = Grid(t_range=(0.25, 1.25), t_count=9, x_range=(-2.0, 2.0), x_count=17)
        for few, many in zip(coarse.axes(), fine.axes()):
            assert np.isin(few, many).all()

        e = parse(source)
        assert run_residual(e, fine).max_abs_residual >= run_residual(e, coarse).max_abs_residual


class TestCombine:
    def test_all_pass(self):
        combined = combine_reports([_report(Status.PASS, 1e-12), _report(Status.PASS, 3e-12)])
        assert combined.status == Status.PASS
        assert combined.max_abs_residual == 3e-12

    def test_any_failure_fails(self):
        assert combine_reports([_report(Status.PASS), _report(Status.FAIL, 1.0)]).status == Status.FAIL

    def test_inconclusive_dominates(self):
        reports = [_report(Status.FAIL, 1.0), _report(Status.INCONCLUSIVE)]
        assert combine_reports(reports).status == Status.INCONCLUSIVE

    def test_empty(self):
        with pytest.raises(UsageError):
            combine_reports([])


class TestFiniteDifferences:
    @pytest.mark.parametrize("source", ["x^3 - 6*t*x", "exp(x - t)", "4*x/(x^2 + 2*t)", "cos(x)*exp(t)"])
    @pytest.mark.parametrize("variable", ["t", "x"])
    def test_exact_derivatives_agree(self, grid, source, variable):
        assert finite_difference_check(parse(source), variable, grid, h=1e-5).status == Status.PASS

    def test_points_next_to_a_pole_are_excluded(self, grid):
        e = parse("1/(x - 61/200)")
        report = finite_difference_check(e, "x", grid, h=1e-5)
        assert report.status == Status.PASS
        assert report.excluded_count == 31
        assert abs(report.worst_point.x - 0.3) > 0.05

    def test_stencil_too_close_to_a_pole_fails(self, grid):
        report = finite_difference_check(parse("1/(x - 61/200)"), "x", grid, h=1e-5, clearance=1.0)
        assert report.status == Status.FAIL
        assert report.worst_point.x == pytest.approx(0.3)

    def test_pole_off_the_stencil_direction_excludes_nothing(self, grid):
        report = finite_difference_check(parse("x/(t - 1/20)"), "x", grid, h=1e-5)
        assert report.excluded_count == 0
        assert report.status == Status.PASS

    def test_rejects_bad_step(self, grid):
        with pytest.raises(UsageError):
            finite_difference_check(X, "x", grid, h=0.0)

    def test_rejects_variable_off_grid(self, grid):
        with pytest.raises(UsageError):
            finite_difference_check(X, "u", grid)


class TestRandomPoints:
    def test_points_stay_in_the_box(self, grid):
        points = random_points(grid, 50, seed=3, guards=[parse("1/x")])
        assert set(points) == {"t", "x"}
        assert points["t"].shape == (50,)
        assert np.all((points["t"] >= 0.1) & (points["t"] <= 1.0))
        assert np.all(np.abs(points["x"]) <= 2.0)

    def test_seed_is_reproducible(self, grid):
        first = random_points(grid, 20, seed=11)
        second = random_points(grid, 20, seed=11)
        assert np.array_equal(first["x"], second["x"])

    def test_guards_filter_points(self, grid):
        points = random_points(grid, 30, seed=5, guards=[parse("sqrt(x)")])
        assert np.all(points["x"] >= 0.0)
