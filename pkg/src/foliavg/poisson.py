"""Leafwise Poisson structures and their pairing with a connection.

The bivector is tangent to the fibers; its components are indexed by fiber
coordinates only.  The musical map uses the convention
``beta(sharp(alpha)) = P(alpha, beta)``, so the Hamiltonian field of f is
``sharp(df)`` and ``{f, g} = P(df, dg)``.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .errors import (
    ChartMismatch,
    DegreeOverflow,
    NotHorizontal,
    NotVertical,
    UnsupportedDegree,
)
from .foliation import Connection, is_horizontal_form
from .geom import (
    DiffForm,
    Multivector,
    VectorField,
    _sort_index,
    exterior_derivative,
    lie_derivative,
    schouten_bracket,
)
from .symcalc import Chart, Scalar

# Orientation of the musical map.  Flipping it breaks the pairing between
# sharp and the bracket on purpose; the bracket below never reads it.
SHARP_SIGN = 1


def differential(f: Scalar) -> DiffForm:
    return exterior_derivative(DiffForm.function(f.chart, f))


class PoissonBivector:
    """A fiber-tangent bivector field with exact polynomial coefficients."""

    __slots__ = ("chart", "mv")

    def __init__(self, mv: Multivector) -> None:
        if mv.degree != 2:
            raise UnsupportedDegree("a Poisson structure here is a bivector")
        chart = mv.chart
        vertical = {chart.coord_index(name) for name in chart.vertical}
        for idx in mv.comps:
            if not set(idx) <= vertical:
                raise NotVertical(
                    "bivector must be tangent to the fibers, got component "
                    + "^".join(chart.coords[i] for i in idx)
                )
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "mv", mv)

    def __setattr__(self, name, value):
        raise AttributeError("PoissonBivector is immutable")

    @staticmethod
    def from_dict(chart: Chart, comps: Mapping[Sequence[str], Scalar]) -> "PoissonBivector":
        return PoissonBivector(Multivector.from_dict(chart, 2, comps))

    def pairing(self, alpha: DiffForm, beta: DiffForm) -> Scalar:
        return self.mv.evaluate(alpha, beta)

    def sharp(self, alpha: DiffForm) -> VectorField:
        """The field X with beta(X) = SHARP_SIGN * P(alpha, beta)."""
        if alpha.degree != 1:
            raise UnsupportedDegree("sharp expects a one-form")
        chart = self.chart
        comps = [Scalar.zero(chart)] * chart.dim
        zero = Scalar.zero(chart)
        for (i, j), value in self.mv.comps.items():
            a_i = alpha.comps.get((i,), zero)
            a_j = alpha.comps.get((j,), zero)
            if not a_i.is_zero:
                comps[j] = comps[j] + a_i * value
            if not a_j.is_zero:
                comps[i] = comps[i] - a_j * value
        if SHARP_SIGN != 1:
            comps = [c * SHARP_SIGN for c in comps]
        return VectorField(chart, comps)

    def hamiltonian_vf(self, f: Scalar) -> VectorField:
        return self.sharp(differential(f))

    def bracket(self, f: Scalar, g: Scalar) -> Scalar:
        return self.pairing(differential(f), differential(g))

    def is_casimir(self, f: Scalar) -> bool:
        return self.hamiltonian_vf(f).is_zero

    def jacobiator(self, f: Scalar, g: Scalar, h: Scalar) -> Scalar:
        return (
            self.bracket(f, self.bracket(g, h))
            + self.bracket(g, self.bracket(h, f))
            + self.bracket(h, self.bracket(f, g))
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PoissonBivector):
            return NotImplemented
        return self.mv == other.mv

    def __hash__(self) -> int:
        return hash(self.mv)

    def __repr__(self) -> str:
        return f"PoissonBivector({self.mv!r})"


def sharp(P: PoissonBivector, alpha: DiffForm) -> VectorField:
    return P.sharp(alpha)


def hamiltonian_vf(P: PoissonBivector, f: Scalar) -> VectorField:
    return P.hamiltonian_vf(f)


def poisson_bracket(P: PoissonBivector, f: Scalar, g: Scalar) -> Scalar:
    return P.bracket(f, g)


def is_casimir(P: PoissonBivector, f: Scalar) -> bool:
    return P.is_casimir(f)


def verify_jacobi(P: PoissonBivector) -> str | None:
    """None when the Schouten self-bracket vanishes, else a witness."""
    jac = schouten_bracket(P.mv, P.mv)
    if jac.is_zero:
        return None
    idx, value = next(iter(sorted(jac.comps.items())))
    names = ", ".join(P.chart.coords[i] for i in idx)
    return f"Schouten self-bracket has component {value} on ({names})"


def verify_poisson_connection(conn: Connection, P: PoissonBivector) -> str | None:
    """None when every lifted frame field preserves the bivector."""
    for base, lift in conn.frame.items():
        moved = lie_derivative(lift, P.mv)
        if not moved.is_zero:
            idx, value = next(iter(sorted(moved.comps.items())))
            names = ", ".join(conn.chart.coords[i] for i in idx)
            return f"lift of {base} moves the bivector by {value} on ({names})"
    return None


def braided_wedge(P: PoissonBivector, alpha: DiffForm, beta: DiffForm) -> DiffForm:
    """Wedge of two horizontal forms with coefficients multiplied in the bracket.

    On decomposables ``a dx^I`` and ``b dx^J`` the result is
    ``{a, b} dx^I ^ dx^J``; both inputs must be horizontal.
    """
    if alpha.chart != beta.chart or alpha.chart != P.chart:
        raise ChartMismatch("operands live on different charts")
    if alpha.degree != 1:
        raise UnsupportedDegree("braided wedge expects a one-form first factor")
    if not is_horizontal_form(alpha) or not is_horizontal_form(beta):
        raise NotHorizontal("braided wedge expects horizontal forms")
    chart = alpha.chart
    degree = alpha.degree + beta.degree
    if degree > chart.dim:
        raise DegreeOverflow("braided wedge degree exceeds dimension")
    items = []
    for ia, va in alpha.comps.items():
        for ib, vb in beta.comps.items():
            sorted_sign = _sort_index(ia + ib)
            if sorted_sign is None:
                continue
            idx, sign = sorted_sign
            value = P.bracket(va, vb)
            if value.is_zero:
                continue
            items.append((idx, value if sign > 0 else -value))
    return DiffForm._make(chart, degree, items)
