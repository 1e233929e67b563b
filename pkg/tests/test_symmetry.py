from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from core import ZERO, evaluate, is_zero, parse
from services.burgers import BurgersSolution, burgers_operator, burgers_residual, hopf_cole, lie_rational_solution
from services.heat import HeatCatalog
from services.reduction import assemble_nogo, lie_case_operator
from services.symmetry import (
    GBElement,
    PointTransformation,
    apply_point_transformation,
    as_vector_field,
    check_heat_invariance,
    commutator,
    commutator_table,
    corresponding_heat_operator,
    heat_commutation_residual,
    hopf_cole_intertwining_residual,
    lie_case_to_algebra,
    match_vector_field,
)
from services.verify import Status
from utils.errors import InvalidTransformationError, SpanMismatchError, UsageError

P_T, D, K, P_X, G = GBElement.basis()


class TestCommutators:
    @pytest.mark.parametrize(
        "a, b, expected",
        [
            (P_T, G, P_X),
            (P_T, D, 2 * P_T),
            (D, K, 2 * K),
            (P_T, K, D),
            (P_X, K, G),
            (P_X, G, GBElement()),
            (D, P_X, -P_X),
            (D, G, G),
        ],
    )
    def test_structure_constants(self, a, b, expected):
        assert commutator(a, b) == expected

    def test_table_is_antisymmetric(self):
        table = commutator_table()
        for i in range(5):
            assert table[i][i].is_zero()
            for j in range(5):
                assert table[i][j] == -table[j][i]

    def test_vector_field_of_scaling(self, same):
        field = as_vector_field(D)
        assert same(field.tau, parse("2*t"))
        assert same(field.xi, parse("x"))
        assert same(field.eta, parse("-u"))

    def test_match_recovers_coordinates(self):
        element = GBElement.of(1, "1/2", -2, 3, "-1/3")
        assert match_vector_field(*as_vector_field(element)) == element

    def test_fields_outside_the_algebra(self):
        with pytest.raises(SpanMismatchError):
            match_vector_field(parse("x"), ZERO, ZERO)
        with pytest.raises(SpanMismatchError):
            match_vector_field(ZERO, parse("exp(x)"), ZERO)

    def test_wrong_arity(self):
        with pytest.raises(UsageError):
            GBElement.of(1, 2)


elements = st.lists(st.integers(-3, 3), min_size=5, max_size=5).map(lambda cs: GBElement.of(*cs))


@given(elements, elements, elements, st.integers(-3, 3))
@settings(max_examples=25, deadline=None)
def test_bracket_is_bilinear(a, b, c, k):
    assert commutator(a + k * b, c) == commutator(a, c) + k * commutator(b, c)


@given(elements, elements, elements)
@settings(max_examples=25, deadline=None)
def test_jacobi_identity(a, b, c):
    total = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert total.is_zero()


class TestLieCaseToAlgebra:
    @pytest.mark.parametrize(
        "constants, expected",
        [
            ((1, 0, 0, 0, 0), (1, 0, 0, 0, 0)),
            ((3, 0, 0, 0, 0), (1, 0, 0, 0, 0)),
            ((0, "1/2", 0, 0, 0), (0, "1/2", 0, 0, 0)),
            ((0, 0, 1, 0, 0), (0, 0, 1, 0, 0)),
            ((2, 0, 0, 4, 0), (1, 0, 0, 2, 0)),
            ((1, 0, 0, 0, 1), (1, 0, 0, 0, 1)),
        ],
    )
    def test_normalized_element(self, constants, expected):
        assert lie_case_to_algebra(lie_case_operator(*constants)) == GBElement.of(*expected)

    def test_element_is_proportional_to_operator(self, same):
        operator = lie_case_operator(1, 1, 2, 0, 3)
        field = as_vector_field(lie_case_to_algebra(operator))
        assert same(field.xi, field.tau * operator.xi())
        assert same(field.eta, field.tau * operator.eta())

    def test_rejects_other_classes(self):
        with pytest.raises(UsageError):
            lie_case_to_algebra(assemble_nogo(ZERO, ZERO, ZERO))


class TestPointTransformation:
    def test_identity(self, same):
        u = hopf_cole(HeatCatalog.get("h2"))
        assert same(apply_point_transformation(PointTransformation.identity(), u).u, u.u)

    def test_galilean_boost_shifts_constants(self):
        image = apply_point_transformation(PointTransformation.of(1, 0, 0, 1, 1, 0, 1), ZERO)
        assert evaluate(image.u, {}) == pytest.approx(1.0)

    def test_reflection_maps_quadratic_image_to_itself(self, same):
        u = hopf_cole(HeatCatalog.get("h2"))
        image = apply_point_transformation(PointTransformation.of(1, 0, 0, 1, -1, 0, 0), u)
        assert same(image.u, u.u)

    def test_scaling(self, same):
        image = apply_point_transformation(PointTransformation.of(4, 0, 0, 1, 2, 0, 0), lie_rational_solution(0, 0))
        assert same(image.u, parse("x/t"))

    @pytest.mark.parametrize(
        "params",
        [
            (1, 0, 0, 1, 1, 0, 0),
            (1, 0, -1, 1, 1, 0, 0),
            (4, 0, 0, 1, 2, 0, 0),
            (1, 0, 0, 1, 1, 1, 0),
            (1, 0, 0, 1, 1, 0, 1),
        ],
    )
    def test_images_solve_burgers(self, params):
        g = PointTransformation.of(*params)
        image = apply_point_transformation(g, hopf_cole(HeatCatalog.get("h3")))
        assert is_zero(burgers_operator(image.u))

    def test_projective_image_of_constant(self):
        image = apply_point_transformation(PointTransformation.of(1, 0, -1, 1, 1, 0, 0), parse("1"))
        assert burgers_residual(image).status == Status.PASS
        assert image.provenance.constants[2] == Fraction(-1)

    @pytest.mark.parametrize(
        "params",
        [(1, 0, 0, 1, 2, 0, 0), (1, 0, 0, 1, 0, 0, 0), (0, 1, 1, 0, 1, 0, 0), (1, 0, 0, 1)],
    )
    def test_invalid_parameters(self, params):
        with pytest.raises(InvalidTransformationError):
            PointTransformation.of(*params)

    def test_invalid_transformation_is_a_usage_error(self):
        with pytest.raises(UsageError):
            PointTransformation.of(1, 0, 0, 1, 1, 0, "x")

    def test_provenance_records_origin(self):
        u = hopf_cole(HeatCatalog.get("h2"))
        image = apply_point_transformation(PointTransformation.identity(), u)
        assert isinstance(image, BurgersSolution)
        assert image.provenance.heat == ["h2"]


class TestHeatCorrespondence:
    @pytest.mark.parametrize("element", [P_T, D, K, P_X, G, GBElement.of(1, 2, 3, 4, 5)])
    @pytest.mark.parametrize("source", ["x^3 - 6*t*x", "exp(x - t) + 1", "cos(x)*exp(t) + x"])
    def test_intertwining(self, element, source):
        assert is_zero(hopf_cole_intertwining_residual(element, parse(source)))

    @pytest.mark.parametrize("element", [P_T, D, K, G])
    @pytest.mark.parametrize("mu", [0, 1, "-1/2"])
    def test_commutation(self, element, mu):
        assert is_zero(heat_commutation_residual(element, mu, parse("x^2*t + exp(x)*t^2")))

    def test_hat_map_keeps_coordinates(self):
        gh = corresponding_heat_operator(GBElement.of(1, 0, 2, 0, 0), -1)
        assert gh.coefficients == (1, 0, 2, 0, 0)
        assert gh.mu == -1

    def test_exponential_is_invariant_under_translations(self):
        report = check_heat_invariance(HeatCatalog.get("e(1)"), P_T + P_X, 0, small=1e-8)
        assert report.invariant
        assert report.status == Status.PASS
        assert report.fitted_mu == pytest.approx(0.0, abs=1e-9)

    def test_heat_polynomial_is_a_scaling_eigenfunction(self):
        report = check_heat_invariance(HeatCatalog.get("h1"), D, -1, small=1e-8)
        assert report.invariant
        assert report.status == Status.PASS

    def test_non_invariant_pair_fails_on_both_sides(self):
        report = check_heat_invariance(HeatCatalog.get("e(1)"), D, 0, small=1e-8)
        assert not report.invariant
        assert report.status == Status.PASS
        assert report.heat.max_abs_residual >= 1e-2
        assert report.burgers.max_abs_residual >= 1e-2
