"""Coefficient ring: parsing, canonical form, calculus and evaluation."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from foliavg.errors import (
    ChartMismatch,
    NonPolynomialIntegrand,
    ParseError,
    UnknownSymbol,
)
from foliavg.symcalc import Chart, Scalar, parse, render

from conftest import CHART, sc, scalars


# ----------------------------------------------------------------------
# charts


def test_chart_classification(chart):
    assert chart.coords == ("x1", "x2", "q", "p")
    assert chart.dim == 4
    assert chart.is_symbol("q") and chart.is_symbol("th") and chart.is_symbol("pi")
    assert not chart.is_symbol("y")
    assert chart.is_angle("th") and not chart.is_angle("q")
    assert chart.coord_index("x2") == 1


def test_chart_rejects_collisions():
    with pytest.raises(UnknownSymbol):
        Chart(("x", "q"), ("q",), ("th",))
    with pytest.raises(UnknownSymbol):
        Chart(("x",), ("q",), ("pi",))


def test_with_extra_angles(chart):
    wider = chart.with_extra_angles(("s",))
    assert wider.angles == ("th", "s")
    assert wider.coords == chart.coords


# ----------------------------------------------------------------------
# parsing and rendering


CANONICAL = [
    ("-x2*q", "-q*x2"),
    ("(q^2+p^2)/2", "1/2*p^2 + 1/2*q^2"),
    ("q*cos(th) - p*sin(th)", "-p*sin(th) + q*cos(th)"),
    ("3/4*x1^2*sin(2*th)", "3/4*x1^2*sin(2*th)"),
    ("th^2/2", "1/2*th^2"),
    ("q^2/4 + 1", "1 + 1/4*q^2"),
    ("1 - cos(th)", "1 - cos(th)"),
    ("x1*x2*q*p", "p*q*x1*x2"),
    ("pi*q", "pi*q"),
    ("sin(-th)", "-sin(th)"),
    ("cos(-2*th)", "cos(2*th)"),
]


@pytest.mark.parametrize("text,expected", CANONICAL)
def test_render_is_canonical(text, expected):
    assert render(sc(text)) == expected


def test_render_zero():
    assert render(Scalar.zero(CHART)) == "0"


@pytest.mark.parametrize(
    "bad,exc,message",
    [
        ("1 +* 2", ParseError, "unexpected token '*' in '1 +* 2'"),
        ("q + ", ParseError, "unexpected token '' in 'q + '"),
        ("x3", UnknownSymbol, None),
        ("sin(q)", UnknownSymbol, None),
        ("2^q", ParseError, "exponents must be non-negative integers"),
        ("q/p", ParseError, "division is only allowed by nonzero rationals"),
        ("q@p", ParseError, "unexpected character '@' at position 1"),
        ("", ParseError, None),
    ],
)
def test_parse_errors(bad, exc, message):
    with pytest.raises(exc) as info:
        sc(bad)
    if message is not None:
        assert str(info.value) == message


def test_power_binds_tighter_than_division():
    assert sc("th^2/2") == sc("th*th/2")
    assert sc("q^2/4") == sc("q*q") * Fraction(1, 4)


@given(scalars())
def test_parse_render_round_trip(f):
    assert parse(CHART, render(f)) == f


# ----------------------------------------------------------------------
# product-to-sum canonical form


def test_product_to_sum():
    s, c = Scalar.sin(CHART, "th"), Scalar.cos(CHART, "th")
    assert render(s * c) == "1/2*sin(2*th)"
    assert render(c**2) == "1/2 + 1/2*cos(2*th)"
    assert render(s**2) == "1/2 - 1/2*cos(2*th)"
    assert (s**2 + c**2) == Scalar.one(CHART)


@given(scalars(), st.integers(1, 3), st.integers(1, 3))
def test_harmonic_products_evaluate_consistently(f, j, k):
    g = f * Scalar.sin(CHART, "th", j) * Scalar.cos(CHART, "th", k)
    pt = {"x1": 2, "x2": -1, "q": Fraction(1, 2), "p": 3, "th": 0.7}
    expect = f.evaluate(pt) * math.sin(j * 0.7) * math.cos(k * 0.7)
    assert abs(g.evaluate(pt) - expect) < 1e-12


# ----------------------------------------------------------------------
# derivatives and antiderivatives


def test_diff_examples():
    assert sc("q^2*x1").diff("q") == sc("2*q*x1")
    assert sc("cos(2*th)").diff("th") == sc("-2*sin(2*th)")
    assert sc("th^2/2").diff("th") == sc("th")
    assert sc("pi*q").diff("q") == sc("pi")


@given(scalars(), scalars(), st.sampled_from(CHART.coords + CHART.angles))
def test_diff_is_a_derivation(f, g, name):
    lhs = (f * g).diff(name)
    assert lhs == f.diff(name) * g + f * g.diff(name)


def test_antiderivative_examples():
    F = sc("q*cos(th)").antiderivative_from_zero("th")
    assert render(F) == "q*sin(th)"
    assert sc("1 - cos(th)").antiderivative_from_zero("th") == sc("th - sin(th)")


@given(scalars())
def test_antiderivative_inverts_diff(f):
    F = f.antiderivative_from_zero("th")
    assert F.diff("th") == f
    assert F.substitute_angle("th", []).is_zero


# ----------------------------------------------------------------------
# averaging


def test_average_examples():
    assert render((Scalar.cos(CHART, "th") ** 2).average_over_angle("th")) == "1/2"
    assert Scalar.var(CHART, "th").average_over_angle("th") == Scalar.pi(CHART)
    theta, s = Scalar.var(CHART, "th"), Scalar.sin(CHART, "th")
    assert render((theta * s).average_over_angle("th")) == "-1"
    assert sc("q*sin(3*th)").average_over_angle("th").is_zero


@given(scalars())
def test_average_is_idempotent(f):
    mean = f.average_over_angle("th")
    assert mean.average_over_angle("th") == mean
    assert not mean.depends_on("th")


@given(scalars(), scalars(angles=False))
def test_average_is_linear_over_invariants(f, g):
    assert (f * g).average_over_angle("th") == f.average_over_angle("th") * g


# ----------------------------------------------------------------------
# substitution along flows


def test_substitute_angle_forms():
    g = sc("q*cos(th) - p*sin(th)")
    assert render(g.substitute_angle("th", [("th", -1)])) == "p*sin(th) + q*cos(th)"
    assert render(g.substitute_angle("th", [])) == "q"
    doubled = Scalar.cos(CHART, "th").substitute_angle("th", [("th", 1), ("th", 1)])
    assert render(doubled) == "cos(2*th)"


def test_substitute_coordinates():
    f = sc("q^2 + p")
    g = f.substitute({"q": sc("q + x1"), "p": sc("-p")})
    assert g == sc("q^2 + 2*q*x1 + x1^2 - p")


# ----------------------------------------------------------------------
# definite integrals and evaluation


def test_integrate_unit_interval():
    assert render(sc("q").integrate_unit_interval("q")) == "1/2"
    assert render(sc("pi*q^2").integrate_unit_interval("q")) == "1/3*pi"
    with pytest.raises(NonPolynomialIntegrand):
        sc("cos(th)").integrate_unit_interval("th")


def test_evaluate_mixed_point():
    pt = {
        "x1": Fraction(1, 2),
        "x2": Fraction(-2),
        "q": Fraction(3),
        "p": Fraction(1, 3),
        "th": 0.5,
    }
    f = sc("x1*q^2 + p*sin(2*th) - pi")
    expect = 0.5 * 9 + (1 / 3) * math.sin(1.0) - math.pi
    assert abs(f.evaluate(pt) - expect) < 1e-12


@given(scalars(), scalars())
def test_evaluate_respects_ring_operations(f, g):
    pt = {"x1": Fraction(2), "x2": Fraction(-1, 3), "q": Fraction(5, 2), "p": 1, "th": 1.1}
    assert abs((f + g).evaluate(pt) - (f.evaluate(pt) + g.evaluate(pt))) < 1e-9
    assert abs((f * g).evaluate(pt) - f.evaluate(pt) * g.evaluate(pt)) < 1e-9


# ----------------------------------------------------------------------
# structural helpers


def test_free_symbols_and_depends_on():
    f = sc("x1*q + sin(th)")
    assert f.free_symbols() == {"x1", "q", "th"}
    assert f.depends_on("th") and not f.depends_on("p")
    assert Scalar.pi(CHART).free_symbols() == {"pi"}
    assert Scalar.one(CHART).free_symbols() == set()


def test_harmonic_kind_aliases():
    assert Scalar.harmonic(CHART, "sin", "th", 2) == Scalar.sin(CHART, "th", 2)
    assert Scalar.harmonic(CHART, "cos", "th") == Scalar.cos(CHART, "th")
    with pytest.raises(UnknownSymbol):
        Scalar.harmonic(CHART, "tan", "th")


def test_cross_chart_arithmetic_rejected():
    other = Chart(("y",), ("u",), ("s",))
    with pytest.raises(ChartMismatch):
        Scalar.one(CHART) + Scalar.one(other)
