from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from core.expr import T, X, U, Add, Apply, Const, Div, Float, Mul, Neg, Pow
from core.parser import parse, tokenize
from core.printer import to_string
from core.simplify import simplify
from utils.errors import ExprSyntaxError, UnknownIdentifierError


def test_polynomial_maps_to_tree():
    assert parse("x^2 - 2*t") == Add((Pow(X, 2), Neg(Mul((Const(Fraction(2)), T)))))


def test_function_call():
    assert parse("exp(x - t)") == Apply("exp", Add((X, Neg(T))))


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as excinfo:
        parse("2*v")
    assert excinfo.value.name == "v"
    assert excinfo.value.offset == 2


def test_syntax_error_reports_byte_offset():
    with pytest.raises(ExprSyntaxError) as excinfo:
        parse("x + * t")
    assert excinfo.value.offset == 4


@pytest.mark.parametrize("source", ["", "   ", "(x", "x)", "x^y", "x^1.5", "sin x", "2 $ 3"])
def test_rejects_malformed_input(source):
    with pytest.raises(ExprSyntaxError):
        parse(source)


def test_leading_minus_negates_first_term():
    assert parse("-x^2") == Neg(Pow(X, 2))
    assert parse("-2*t") == Neg(Mul((Const(Fraction(2)), T)))


def test_division_is_left_associative():
    assert parse("x/t/u") == Div(Div(X, T), U)


def test_negative_exponent():
    assert parse("x^(-2)") == Pow(X, -2)
    assert parse("x^-2") == Pow(X, -2)


def test_decimals_become_floats():
    assert parse("0.25*x") == Mul((Float(0.25), X))


def test_literal_quotient_is_one_rational():
    assert parse("1/2") == Const(Fraction(1, 2))
    assert parse("6/4") == Const(Fraction(3, 2))
    assert parse("1/2/3") == Const(Fraction(1, 6))
    assert parse("1/0") == Div(Const(Fraction(1)), Const(Fraction(0)))
    assert parse("2*3/4") == Div(Mul((Const(Fraction(2)), Const(Fraction(3)))), Const(Fraction(4)))
    assert parse("x/2") == Div(X, Const(Fraction(2)))


def test_token_offsets():
    tokens = tokenize("x + t")
    assert [t.offset for t in tokens] == [0, 2, 4, 5]
    with pytest.raises(ExprSyntaxError) as excinfo:
        parse("é + x")
    assert excinfo.value.offset == 0


@pytest.mark.parametrize(
    "source",
    [
        "x^2 - 2*t",
        "exp(x - t)",
        "4*x/(x^2 - 2*t)",
        "-(x + t)*u",
        "sqrt(-t)*exp(x^2/(4*t))/(-t)",
        "cos(x + 1/2)*exp(t) - sin(2*x)",
        "u^3/4 - 1/2*u^2 + x^(-1)",
        "-(-x)",
        "(x^2)^3",
    ],
)
def test_print_parse_is_fixed_point(source):
    tree = parse(source)
    assert parse(to_string(tree)) == tree


leaves = st.one_of(
    st.sampled_from([T, X, U]),
    st.integers(min_value=0, max_value=9).map(lambda n: Const(Fraction(n))),
    st.sampled_from([Const(Fraction(1, 2)), Const(Fraction(-3)), Float(0.5)]),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.lists(children, min_size=2, max_size=3).map(lambda xs: Add(tuple(xs))),
        st.lists(children, min_size=2, max_size=3).map(lambda xs: Mul(tuple(xs))),
        st.tuples(children, children).map(lambda p: Div(*p)),
        st.tuples(children, st.integers(min_value=-3, max_value=4)).map(lambda p: Pow(*p)),
        st.tuples(st.sampled_from(["exp", "sin", "cos", "sqrt"]), children).map(lambda p: Apply(*p)),
    )


expressions = st.recursive(leaves, _extend, max_leaves=12)


@given(expressions)
@settings(max_examples=300, deadline=None)
def test_printed_text_reparses_to_a_fixed_point(e):
    once = parse(to_string(e))
    assert parse(to_string(once)) == once
    assert to_string(once) == to_string(parse(to_string(once)))


@pytest.mark.parametrize(
    "source",
    [
        "2^-1",
        "1/2*x",
        "-(1/2)",
        "-3/4",
        "x^2/2 - t/3",
        "2*x/(x^2 - 2*t)",
        "exp(x/2 - t/4)/3",
        "(x - 1/2)/(t + 3/2)",
        "u^3/4 - u^2/(2*x)",
    ],
)
def test_canonical_form_survives_printing(source):
    canonical = simplify(parse(source))
    assert parse(to_string(canonical)) == canonical


monomials = st.lists(
    st.tuples(
        st.fractions(min_value=-5, max_value=5, max_denominator=12),
        st.integers(min_value=0, max_value=3),
        st.integers(min_value=0, max_value=3),
    ),
    max_size=5,
)


@given(monomials)
@settings(max_examples=200, deadline=None)
def test_canonical_polynomials_survive_printing(terms):
    e = Add(tuple(Mul((Const(c), Pow(T, i), Pow(X, j))) for c, i, j in terms))
    canonical = simplify(e)
    assert parse(to_string(canonical)) == canonical
