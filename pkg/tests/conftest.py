"""Shared charts, model data and exact-value strategies for the test suite."""

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from foliavg.action import FlowFactor, TorusAction
from foliavg.foliation import Connection
from foliavg.geom import DiffForm, VectorField
from foliavg.poisson import PoissonBivector, differential
from foliavg.symcalc import Chart, Scalar, parse

settings.register_profile(
    "exact",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("exact")

CHART = Chart(("x1", "x2"), ("q", "p"), ("th",))


def sc(text, chart=CHART):
    return parse(chart, text)


@pytest.fixture
def chart():
    return CHART


@pytest.fixture
def bivector():
    return PoissonBivector.from_dict(CHART, {("q", "p"): Scalar.one(CHART)})


@pytest.fixture
def rotation():
    return TorusAction(
        CHART,
        (
            FlowFactor(
                CHART,
                "th",
                {
                    "q": sc("q*cos(th) - p*sin(th)"),
                    "p": sc("q*sin(th) + p*cos(th)"),
                },
            ),
        ),
    )


@pytest.fixture
def flat_conn():
    return Connection(CHART, {})


@pytest.fixture
def shear_conn():
    return Connection(CHART, {("x1", "p"): sc("x2")})


@pytest.fixture
def invariant_conn():
    return Connection(CHART, {("x1", "q"): sc("-x2*p"), ("x1", "p"): sc("x2*q")})


@pytest.fixture
def quadratic_momentum():
    return differential(sc("(q^2 + p^2)/2"))


@st.composite
def scalars(draw, chart=CHART, coord_degree=2, freq=2, max_terms=3, angles=True):
    """Random elements of the exact coefficient ring."""
    total = Scalar.zero(chart)
    for _ in range(draw(st.integers(0, max_terms))):
        coef = Fraction(draw(st.integers(-4, 4)), draw(st.integers(1, 3)))
        term = Scalar.const(chart, coef)
        for name in chart.coords:
            term = term * Scalar.var(chart, name) ** draw(st.integers(0, coord_degree))
        if angles:
            for name in chart.angles:
                kind = draw(st.sampled_from(("none", "sin", "cos")))
                if kind != "none":
                    term = term * Scalar.harmonic(
                        chart, kind, name, draw(st.integers(1, freq))
                    )
        total = total + term
    return total


@st.composite
def polynomials(draw, chart=CHART, coord_degree=2, max_terms=3):
    """Angle-free ring elements, for flows and brackets."""
    return draw(scalars(chart, coord_degree, 0, max_terms, angles=False))


@st.composite
def vector_fields(draw, chart=CHART, **kwargs):
    comps = [draw(polynomials(chart, **kwargs)) for _ in chart.coords]
    return VectorField(chart, comps)


@st.composite
def forms(draw, degree, chart=CHART, **kwargs):
    from itertools import combinations

    comps = {}
    for index in combinations(chart.coords, degree):
        comps[index] = draw(polynomials(chart, **kwargs))
    return DiffForm.from_dict(chart, degree, comps)
