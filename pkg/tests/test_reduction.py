from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from core import ONE, ZERO, Mul, columns, det3, evaluate_grid, is_zero, parse
from services.burgers import hopf_cole, invariant_family
from services.heat import HeatCatalog
from services.reduction import (
    OperatorClass,
    ReductionOperator,
    assemble_nogo,
    burgers_units,
    characteristic,
    general_determining_residual,
    generalized_symmetry_residual,
    invariant_surface_residual,
    lie_case_coefficients,
    lie_case_operator,
    lie_case_reduced_residual,
    nogo_determining_residual,
    nogo_determining_system,
    nogo_from_burgers_triple,
    nogo_from_heat_triple,
    operator_from_expressions,
    singular_determining_expression,
    singular_determining_residual,
    singular_operator,
    third_order_constraint,
    third_order_constraint_residual,
    trivial_operator,
)
from services.verify import Status, random_points
from utils.errors import DegenerateInputError, LinearDependenceError, UsageError


class TestNogoFromHeat:
    def test_quadratic_triple_gives_zero_coefficients(self, quadratic_triple):
        coefficients = nogo_from_heat_triple(quadratic_triple)
        assert all(is_zero(c) for c in coefficients.as_tuple())

    def test_cubic_triple(self, cubic_triple, same):
        coefficients = nogo_from_heat_triple(cubic_triple)
        assert same(coefficients.xi0, parse("1/x"))
        assert is_zero(coefficients.eta1)
        assert is_zero(coefficients.eta0)

    def test_tanh_triple(self, tanh_triple, same):
        coefficients = nogo_from_heat_triple(tanh_triple)
        assert is_zero(coefficients.xi0)
        assert same(coefficients.eta1, parse("-1"))
        assert is_zero(coefficients.eta0)

    @pytest.mark.parametrize("labels", [("h0", "h1", "h4"), ("h0", "h1", "e(1)"), ("h1", "h2", "h3")])
    def test_coefficients_solve_determining_system(self, labels):
        triple = HeatCatalog.triple(labels)
        residuals = nogo_determining_system(*nogo_from_heat_triple(triple).as_tuple())
        assert all(is_zero(r) for r in residuals)

    @pytest.mark.parametrize("labels", [("h0", "e(1)", "trig(1,0)"), ("h0", "trig(1,0)", "trig(1,1/2)")])
    def test_trigonometric_triples_pass_numerically(self, labels):
        triple = HeatCatalog.triple(labels)
        assert nogo_determining_residual(*nogo_from_heat_triple(triple).as_tuple()).status == Status.PASS

    def test_members_satisfy_third_order_constraint(self, cubic_triple):
        coefficients = nogo_from_heat_triple(cubic_triple)
        for v in cubic_triple.vs:
            assert is_zero(third_order_constraint(v, *coefficients.as_tuple()))
        report = third_order_constraint_residual(cubic_triple.members[2], *coefficients.as_tuple())
        assert report.status == Status.PASS


class TestNogoFromBurgers:
    def test_agrees_with_heat_representation(self, tanh_triple, same):
        from_heat = nogo_from_heat_triple(tanh_triple)
        from_burgers = nogo_from_burgers_triple(*(hopf_cole(m) for m in tanh_triple.members))
        for a, b in zip(from_heat.as_tuple(), from_burgers.as_tuple()):
            assert same(a, b)

    def test_cubic_agrees(self, cubic_triple, same):
        from_heat = nogo_from_heat_triple(cubic_triple)
        from_burgers = nogo_from_burgers_triple(*(hopf_cole(m) for m in cubic_triple.members))
        for a, b in zip(from_heat.as_tuple(), from_burgers.as_tuple()):
            assert same(a, b)

    @pytest.mark.parametrize("labels", [("h0", "h1", "h2"), ("h0", "e(1)", "e(-1)"), ("h1", "h2", "h3")])
    def test_unit_determinant_follows_the_wronskian(self, labels):
        triple = HeatCatalog.triple(labels)
        us = [hopf_cole(m).u for m in triple.members]
        ys = [burgers_units(u)[0] for u in us]
        determinant = det3(columns([ONE, ONE, ONE], us, ys))
        grid = triple.default_grid()
        points = random_points(grid, 100, seed=11, guards=[*us, determinant])
        assert len(points["t"]) == 100

        d = evaluate_grid(determinant, points, grid.exclusion_threshold)
        w = evaluate_grid(triple.wronskian, points, grid.exclusion_threshold)
        product = evaluate_grid(Mul(tuple(triple.vs)), points, grid.exclusion_threshold)
        assert d.valid.all() and w.valid.all() and product.valid.all()
        assert np.all(np.abs(d.values)[np.abs(w.values) > 1e-8] > 0)
        np.testing.assert_allclose(d.values * product.values, 8 * w.values, rtol=1e-7, atol=1e-10)

    def test_repeated_solution_is_dependent(self):
        u = hopf_cole(HeatCatalog.get("h2"))
        with pytest.raises(LinearDependenceError):
            nogo_from_burgers_triple(u, u, parse("0"))


class TestOperatorModel:
    def test_assemble_nogo_shape(self, same):
        operator = assemble_nogo(parse("1/x"), ZERO, ZERO)
        assert operator.kind == OperatorClass.NOGO
        assert operator.xi1 == Fraction(-1, 2)
        assert same(operator.eta_coeffs[2], parse("-1/(2*x)"))
        assert same(operator.eta(), parse("u^3/4 - u^2/(2*x)"))
        assert same(operator.xi(), parse("-u/2 + 1/x"))

    def test_trivial_operator(self, same):
        operator = trivial_operator()
        assert same(operator.xi(), parse("u"))
        assert is_zero(operator.eta())
        assert str(operator) == "d_t + (u)*d_x + (0)*d_u"

    @pytest.mark.parametrize(
        "fields",
        [
            {"class": "nogo", "tau": 1, "xi1": "1/2", "eta_coeffs": ["0", "0", "0", "1/4"]},
            {"class": "nogo", "tau": 1, "xi1": "-1/2", "eta_coeffs": ["0", "0", "0", "1"]},
            {"class": "trivial", "tau": 1, "xi1": "1", "eta_coeffs": ["0", "0", "x", "0"]},
            {"class": "lie", "tau": 1, "xi1": "0", "eta_coeffs": ["0", "0", "1", "0"]},
            {"class": "singular", "tau": 1, "xi0": "1", "eta_general": "u"},
            {"class": "singular", "tau": 0, "xi0": "0", "eta_general": "u"},
            {"class": "lie", "tau": 2, "xi1": "0", "eta_coeffs": ["0", "0", "0", "0"]},
            {"class": "lie", "tau": 1, "xi1": "0", "eta_coeffs": ["0", "0", "0"]},
            {"class": "lie", "tau": 1, "xi1": "0", "eta_coeffs": ["u", "0", "0", "0"]},
            {"class": "lie", "tau": 1, "xi1": "0", "eta_coeffs": ["0", "0", "0", "0"], "eta_general": "0"},
        ],
    )
    def test_invalid_shapes_are_rejected(self, fields):
        with pytest.raises(ValidationError):
            ReductionOperator.model_validate(fields)

    def test_payload_round_trip(self, cubic_triple):
        operator = assemble_nogo(*nogo_from_heat_triple(cubic_triple).as_tuple())
        data = operator.payload()
        assert data["class"] == "nogo"
        assert data["xi1"] == "-1/2"
        assert set(data["expressions"]) == {"tau", "xi", "eta"}
        restored = ReductionOperator.from_payload(data)
        assert restored.kind == operator.kind
        assert is_zero(restored.xi() - operator.xi())
        assert is_zero(restored.eta() - operator.eta())


class TestDeterminingSystems:
    def test_trivial_operator_passes(self):
        report = general_determining_residual(trivial_operator())
        assert report.status == Status.PASS
        assert report.max_abs_residual == 0.0

    @pytest.mark.parametrize(
        "constants",
        [(1, 0, 0, 0, 0), (0, "1/2", 0, 0, 0), (1, 0, 1, 0, 0), (0, 0, 1, 2, -1), (2, 1, 0, 3, 1)],
    )
    def test_lie_operators_pass(self, constants):
        assert general_determining_residual(lie_case_operator(*constants)).status == Status.PASS
        assert lie_case_reduced_residual(*constants).status == Status.PASS

    def test_nogo_operator_passes(self, cubic_triple):
        operator = assemble_nogo(*nogo_from_heat_triple(cubic_triple).as_tuple())
        assert general_determining_residual(operator).status == Status.PASS

    def test_wrong_coefficients_fail(self):
        report = nogo_determining_residual(parse("x"), ZERO, ZERO)
        assert report.status == Status.FAIL

    def test_lie_constants_validation(self):
        with pytest.raises(UsageError):
            lie_case_operator(0, 0, 0, 1, 1)
        with pytest.raises(UsageError):
            lie_case_operator(1, 0, 0)

    def test_lie_coefficients(self, same):
        coefficients = lie_case_coefficients(0, "1/2", 0, 0, 0)
        assert same(coefficients.denominator, parse("t"))
        assert same(coefficients.xi0, parse("x/(2*t)"))
        assert same(coefficients.eta1, parse("-1/(2*t)"))

    def test_general_system_rejects_singular(self):
        with pytest.raises(UsageError):
            general_determining_residual(singular_operator(parse("u - x/t")))


class TestSingular:
    def test_operator_from_invariant(self, same):
        operator = singular_operator(parse("u - x/t"))
        assert operator.kind == OperatorClass.SINGULAR
        assert same(operator.eta(), parse("1/t"))
        assert operator.tau == 0

    def test_determining_equation(self):
        assert is_zero(singular_determining_expression(parse("1/t")))
        assert singular_determining_residual(parse("1/t")).status == Status.PASS
        assert singular_determining_residual(parse("u")).status == Status.FAIL

    def test_phi_without_u_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            singular_operator(parse("x + t"))


class TestInvariance:
    def test_trivial_characteristic_vanishes_on_linear_solution(self):
        assert is_zero(characteristic(trivial_operator(), parse("x/t")))

    def test_generalized_symmetry_of_linear_ansatz(self):
        operator = trivial_operator()
        assert generalized_symmetry_residual(operator, parse("(x + 1)/(t + 2)")).status == Status.PASS
        assert generalized_symmetry_residual(operator, hopf_cole(HeatCatalog.get("h2"))).status == Status.FAIL

    def test_family_members_are_invariant(self, tanh_triple):
        operator = assemble_nogo(*nogo_from_heat_triple(tanh_triple).as_tuple())
        u = invariant_family(tanh_triple, 0, 1, 1)
        assert invariant_surface_residual(operator, u).status == Status.PASS

    def test_singular_characteristic_uses_x_derivative(self, same):
        operator = singular_operator(parse("u - x/t"))
        assert is_zero(characteristic(operator, parse("x/t")))
        assert same(characteristic(operator, parse("x")), parse("1/t - 1"))


class TestOperatorFromExpressions:
    def test_classifies_nogo(self):
        operator = operator_from_expressions(parse("-u/2 + 1/x"), parse("u^3/4 - u^2/(2*x)"))
        assert operator.kind == OperatorClass.NOGO

    def test_classifies_trivial_and_lie(self):
        assert operator_from_expressions(parse("u"), ZERO).kind == OperatorClass.TRIVIAL
        lie = operator_from_expressions(parse("x/(2*t)"), parse("-u/(2*t)"))
        assert lie.kind == OperatorClass.LIE_CASE

    @pytest.mark.parametrize(
        "xi, eta",
        [("2*u", "0"), ("x*u", "0"), ("1", "u^4"), ("u^2", "0"), ("1/u", "0")],
    )
    def test_rejects_other_shapes(self, xi, eta):
        with pytest.raises(UsageError):
            operator_from_expressions(parse(xi), parse(eta))

    def test_nogo_shape_is_still_enforced(self):
        with pytest.raises(ValidationError):
            operator_from_expressions(parse("-u/2"), ONE)
