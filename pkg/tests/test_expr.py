import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from core import (
    ONE,
    T,
    U,
    X,
    Add,
    Const,
    Mul,
    Pow,
    collect,
    constant_value,
    cos,
    det3,
    diff,
    evaluate,
    evaluate_grid,
    exp,
    free_variables,
    is_zero,
    numerator_denominator,
    parse,
    polynomial_terms,
    simplify,
    sin,
    substitute,
    to_string,
    to_sympy,
)
from core.bridge import SYMBOLS
from utils.errors import DomainError, MissingBindingError, UsageError


class TestDiff:
    def test_second_derivative_of_heat_polynomial(self):
        assert constant_value(diff(parse("x^2 - 2*t"), "x", 2)) == 2

    def test_chain_rule_on_exponential(self, same):
        assert same(diff(parse("exp(x - t)"), "t"), -exp(X - T))

    def test_order_zero_is_identity(self):
        e = parse("sin(x)*t")
        assert diff(e, "x", 0) is e

    @pytest.mark.parametrize("order", [-1, 1.5, True])
    def test_rejects_bad_order(self, order):
        with pytest.raises(UsageError):
            diff(X, "x", order)

    def test_rejects_unknown_variable(self):
        with pytest.raises(UsageError):
            diff(X, "y")

    @pytest.mark.parametrize(
        "source",
        [
            "x^3*t^2 - 6*t*x",
            "exp(2*x - 4*t)*cos(x + 1/2)",
            "4*x/(x^2 - 2*t)",
            "sqrt(t + 2)*exp(x^2/(4*t))",
            "u^3/4 - x*u/t + sin(u*x)",
        ],
    )
    def test_mixed_partials_commute(self, source, same):
        e = parse(source)
        assert same(diff(diff(e, "t"), "x"), diff(diff(e, "x"), "t"))

    @pytest.mark.parametrize(
        "source",
        [
            "x^4 - 12*t*x^2 + 12*t^2",
            "exp(x - t)/(1 + exp(2*x - 4*t))",
            "cos(x)*sin(2*x)*exp(t)",
            "sqrt(t + 2)/x",
            "(x + u)^(-2)*t",
        ],
    )
    @pytest.mark.parametrize("variable", ["t", "x", "u"])
    def test_matches_sympy(self, source, variable):
        e = parse(source)
        expected = sympy.diff(to_sympy(e), SYMBOLS[variable])
        assert sympy.simplify(to_sympy(diff(e, variable)) - expected) == 0


class TestSimplify:
    def test_collects_like_terms(self):
        assert is_zero(parse("x + t - x - t"))
        assert to_string(simplify(parse("x + x + x"))) == "3*x"

    def test_folds_constants(self):
        assert constant_value(parse("1/2 + 1/3")) == Fraction(5, 6)
        assert constant_value(parse("2^3 - 8")) == 0

    def test_cancels_common_factors(self, same):
        assert same(parse("x*t/x"), T)
        assert same(parse("(x^2 - t^2)/(x - t)"), X + T)

    def test_exponentials_multiply_by_adding_arguments(self, same):
        assert same(parse("exp(x)*exp(-x)"), ONE)
        assert same(parse("exp(x - t)^2"), parse("exp(2*x - 2*t)"))

    @pytest.mark.parametrize(
        "source",
        ["4*x/(x^2 - 2*t)", "exp(x - t)*(x + 1)^2", "cos(x)/sin(x) - 1/t", "(x + u)^3/(t*u)"],
    )
    def test_idempotent(self, source):
        once = simplify(parse(source))
        assert simplify(once) == once

    def test_numerator_denominator(self, same):
        num, den = numerator_denominator(parse("1/x + 1/t"))
        assert same(num / den, parse("1/x + 1/t"))
        assert free_variables(den) == frozenset({"t", "x"})
        assert numerator_denominator(X)[1] == ONE

    def test_collect_in_u(self, same):
        parts = collect(parse("u^3/4 - x*u^2/2 + t*u + 1"), "u")
        assert set(parts) == {0, 1, 2, 3}
        assert same(parts[2], parse("-x/2"))
        assert constant_value(parts[3]) == Fraction(1, 4)

    def test_collect_refuses_u_in_denominator(self):
        assert collect(parse("1/u + x"), "u") is None

    def test_polynomial_terms(self):
        assert polynomial_terms(parse("x^2 - 2*t")) == {(("x", 2),): 1, (("t", 1),): -2}
        assert polynomial_terms(parse("exp(x)")) is None


class TestEvaluate:
    def test_scalar(self):
        assert evaluate(parse("x^2 - 2*t"), {"t": 0.5, "x": 2.0}) == pytest.approx(3.0)
        assert evaluate(parse("exp(x - t)"), {"t": 1.0, "x": 1.0}) == pytest.approx(1.0)

    def test_pole_raises(self):
        with pytest.raises(DomainError):
            evaluate(parse("1/x"), {"x": 0.0})

    def test_negative_square_root_raises(self):
        with pytest.raises(DomainError):
            evaluate(parse("sqrt(t)"), {"t": -1.0})

    def test_missing_binding(self):
        with pytest.raises(MissingBindingError) as excinfo:
            evaluate(parse("x + u"), {"x": 1.0})
        assert excinfo.value.name == "u"

    def test_grid_masks_poles(self, grid):
        mesh = grid.mesh()
        evaluation = evaluate_grid(parse("1/x"), mesh, grid.exclusion_threshold)
        assert evaluation.values.shape == (31, 41)
        assert np.count_nonzero(~evaluation.valid) == 31
        assert not evaluation.valid[:, 20].any()

    def test_constants_broadcast_to_the_mesh(self, grid):
        evaluation = evaluate_grid(Const(Fraction(3)), grid.mesh())
        assert evaluation.values.shape == (31, 41)
        assert evaluation.valid.all()
        assert np.all(evaluation.values == 3.0)


def test_substitute_replaces_variables(same):
    e = parse("x^2 + u*t")
    assert same(substitute(e, {"u": X / T}), parse("x^2 + x"))
    with pytest.raises(UsageError):
        substitute(e, {"y": X})


def test_free_variables():
    assert free_variables(parse("exp(x - t)*3")) == frozenset({"t", "x"})
    assert free_variables(parse("1/2")) == frozenset()


def test_wronskian_determinant_against_sympy():
    vs = [ONE, exp(X - T), exp(-X - T)]
    rows = [[diff(v, "x", k) for k in range(3)] for v in vs]
    expected = sympy.Matrix([[to_sympy(entry) for entry in row] for row in rows]).det()
    assert sympy.simplify(to_sympy(det3(rows)) - expected) == 0


def test_det3_needs_three_by_three():
    with pytest.raises(UsageError):
        det3([[ONE, ONE], [ONE, ONE]])


polynomials = st.recursive(
    st.one_of(st.sampled_from([T, X, U]), st.integers(-5, 5).map(lambda n: Const(Fraction(n)))),
    lambda children: st.one_of(
        st.lists(children, min_size=2, max_size=3).map(lambda xs: Add(tuple(xs))),
        st.lists(children, min_size=2, max_size=3).map(lambda xs: Mul(tuple(xs))),
        st.tuples(children, st.integers(0, 3)).map(lambda p: Pow(*p)),
        children.map(exp),
        children.map(sin),
        children.map(cos),
    ),
    max_leaves=8,
)


@given(polynomials, polynomials, st.integers(-4, 4), st.sampled_from(["t", "x", "u"]))
@settings(max_examples=100, deadline=None)
def test_diff_is_linear(a, b, k, variable):
    combined = diff(Add((a, Mul((Const(Fraction(k)), b)))), variable)
    assert is_zero(combined - diff(a, variable) - Const(Fraction(k)) * diff(b, variable))


@given(
    st.sampled_from(["x^3 - 6*t*x", "exp(x - t)*cos(x)", "x/(x^2 + t + 1)", "sin(x*t) + sqrt(t + 3)"]),
    st.floats(min_value=0.1, max_value=1.0),
    st.floats(min_value=-2.0, max_value=2.0),
)
@settings(max_examples=100, deadline=None)
def test_derivative_agrees_with_central_difference(source, t, x):
    e = parse(source)
    h = 1e-5
    exact = evaluate(diff(e, "x"), {"t": t, "x": x})
    central = (evaluate(e, {"t": t, "x": x + h}) - evaluate(e, {"t": t, "x": x - h})) / (2 * h)
    assert math.isclose(exact, central, rel_tol=1e-6, abs_tol=1e-6)
