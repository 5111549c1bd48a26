"""Courant calculus on tangent-plus-cotangent sections and the coupling
distribution built from a connection, a pairing form and the bivector.

The distribution is spanned by sections sharpening the connection coframe
and by frame lifts coupled through the pairing form.  It is Lagrangian by
construction, so membership reduces to pairing against the generators;
involutivity, gauge shifts and group invariance are all decided exactly.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .action import TorusAction
from .errors import (
    ChartMismatch,
    InvariantViolation,
    MissingInverse,
    NotHorizontal,
    UnsupportedDegree,
)
from .foliation import Connection, is_horizontal_form
from .geom import (
    DiffForm,
    VectorField,
    _det,
    exterior_derivative,
    interior_product,
    lie_derivative,
    pullback,
)
from .poisson import PoissonBivector, differential
from .symcalc import Scalar, _as_rational


class Section:
    """A vector field paired with a one-form on the same chart."""

    __slots__ = ("chart", "X", "alpha")

    def __init__(self, X: VectorField, alpha: DiffForm) -> None:
        if X.chart != alpha.chart:
            raise ChartMismatch("field and form live on different charts")
        if alpha.degree != 1:
            raise UnsupportedDegree("a section carries a one-form")
        object.__setattr__(self, "chart", X.chart)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "alpha", alpha)

    def __setattr__(self, name, value):
        raise AttributeError("Section is immutable")

    def __add__(self, other: "Section") -> "Section":
        return Section(self.X + other.X, self.alpha + other.alpha)

    def __sub__(self, other: "Section") -> "Section":
        return Section(self.X - other.X, self.alpha - other.alpha)

    def __neg__(self) -> "Section":
        return Section(-self.X, -self.alpha)

    def __mul__(self, factor) -> "Section":
        return Section(self.X * factor, self.alpha * factor)

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return self.X.is_zero and self.alpha.is_zero

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Section):
            return NotImplemented
        return self.X == other.X and self.alpha == other.alpha

    def __hash__(self) -> int:
        return hash((self.X, self.alpha))

    def __repr__(self) -> str:
        return f"Section({self.X!r}, {self.alpha!r})"


def pairing(s: Section, t: Section) -> Scalar:
    """The symmetric pairing: each form on the other's field, summed."""
    if s.chart != t.chart:
        raise ChartMismatch("sections live on different charts")
    return t.alpha.evaluate(s.X) + s.alpha.evaluate(t.X)


def courant_bracket(s: Section, t: Section) -> Section:
    """Bracket of fields with the antisymmetrized Lie derivative of forms."""
    if s.chart != t.chart:
        raise ChartMismatch("sections live on different charts")
    chart = s.chart
    half = Scalar.const(chart, "1/2")
    cross = s.alpha.evaluate(t.X) - t.alpha.evaluate(s.X)
    form = (
        lie_derivative(s.X, t.alpha)
        - lie_derivative(t.X, s.alpha)
        + differential(cross * half)
    )
    return Section(s.X.bracket(t.X), form)


def presymplectic_value(s: Section, t: Section) -> Scalar:
    """Leafwise two-form value: minus the first coform on the second field."""
    return -s.alpha.evaluate(t.X)


# ----------------------------------------------------------------------
# the coupling distribution


class DiracData:
    """Generator presentation of the coupling distribution."""

    __slots__ = ("conn", "sigma", "P", "generators")

    def __init__(
        self,
        conn: Connection,
        sigma: DiffForm,
        P: PoissonBivector,
        generators: Sequence[Section],
    ) -> None:
        object.__setattr__(self, "conn", conn)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "generators", tuple(generators))

    def __setattr__(self, name, value):
        raise AttributeError("DiracData is immutable")

    @property
    def chart(self):
        return self.conn.chart

    def __repr__(self) -> str:
        return "DiracData(" + ", ".join(repr(g) for g in self.generators) + ")"


def build_coupling_dirac(
    conn: Connection, sigma: DiffForm, P: PoissonBivector
) -> DiracData:
    """Span: frame lifts coupled through sigma, then sharpened coframe sections."""
    chart = conn.chart
    if sigma.chart != chart or P.chart != chart:
        raise ChartMismatch("pairing form or bivector lives on another chart")
    if sigma.degree != 2:
        raise UnsupportedDegree("the pairing form is a two-form")
    if not is_horizontal_form(sigma):
        raise NotHorizontal("the pairing form is horizontal")
    generators = []
    for lift in conn.frame.values():
        generators.append(Section(lift, -interior_product(lift, sigma)))
    for eta in conn.coframe.values():
        generators.append(Section(P.sharp(eta), eta))
    return DiracData(conn, sigma, P, generators)


def verify_lagrangian(D: DiracData) -> str | None:
    """Generator count equals the chart dimension and all pairings vanish."""
    if len(D.generators) != D.chart.dim:
        return (
            f"{len(D.generators)} generators for a {D.chart.dim}-dimensional chart"
        )
    for i, j in combinations(range(len(D.generators)), 2):
        value = pairing(D.generators[i], D.generators[j])
        if not value.is_zero:
            return f"generators {i} and {j} pair to {value}"
    for i, gen in enumerate(D.generators):
        value = pairing(gen, gen)
        if not value.is_zero:
            return f"generator {i} pairs with itself to {value}"
    return None


def is_member(D: DiracData, s: Section) -> str | None:
    """Membership via vanishing pairing with every generator."""
    for i, gen in enumerate(D.generators):
        value = pairing(s, gen)
        if not value.is_zero:
            return f"pairing with generator {i} is {value}"
    return None


def verify_involutive(D: DiracData) -> str | None:
    """Courant brackets of generator pairs must pair to zero throughout."""
    flat = verify_lagrangian(D)
    if flat is not None:
        return flat
    for i, j in combinations(range(len(D.generators)), 2):
        bracket = courant_bracket(D.generators[i], D.generators[j])
        witness = is_member(D, bracket)
        if witness is not None:
            return f"bracket of generators {i} and {j} escapes: {witness}"
    return None


def gauge_transform(D: DiracData, B: DiffForm) -> DiracData:
    """Shift each section's form by its field contracted into B.

    The result coincides generator by generator with the coupling
    distribution built from the pairing form minus B.
    """
    chart = D.chart
    if B.chart != chart:
        raise ChartMismatch("gauge form lives on another chart")
    if B.degree != 2:
        raise UnsupportedDegree("a gauge shift is a two-form")
    if not is_horizontal_form(B):
        raise NotHorizontal("a gauge shift is horizontal")
    moved = [
        Section(gen.X, gen.alpha + interior_product(gen.X, B))
        for gen in D.generators
    ]
    rebuilt = build_coupling_dirac(D.conn, D.sigma - B, D.P)
    if tuple(moved) != rebuilt.generators:
        raise InvariantViolation("gauge shift does not match the rebuilt family")
    return rebuilt


# ----------------------------------------------------------------------
# group invariance


def verify_g_invariance(action: TorusAction, D: DiracData) -> str | None:
    """Pull every generator back by each symbolic flow and test membership.

    When the connection and the bivector are themselves invariant, the
    verdict is cross-checked against the vanishing of the pairing form's
    Lie derivative along each circle generator; the routes must agree.
    """
    witness = None
    for factor in action.factors:
        flow = factor.flow()
        for i, gen in enumerate(D.generators):
            moved = Section(pullback(flow, gen.X), pullback(flow, gen.alpha))
            failed = is_member(D, moved)
            if failed is not None:
                witness = (
                    f"{factor.angle} flow moves generator {i} out: {failed}"
                )
                break
        if witness is not None:
            break
    structure_invariant = all(
        pullback(factor.flow(), D.conn.projection) == D.conn.projection
        and pullback(factor.flow(), D.P.mv) == D.P.mv
        for factor in action.factors
    )
    if structure_invariant:
        sigma_invariant = all(
            lie_derivative(factor.generator(), D.sigma).is_zero
            for factor in action.factors
        )
        if sigma_invariant != (witness is None):
            raise InvariantViolation(
                "membership and pairing-form invariance routes disagree"
            )
    return witness


def hamiltonian_generator_check(
    action: TorusAction, moments: Sequence[DiffForm], D: DiracData
) -> str | None:
    """Each generator field with its momentum one-form must be a section."""
    if len(moments) != len(action.factors):
        raise InvariantViolation("expected one momentum one-form per circle factor")
    for factor, mu in zip(action.factors, moments):
        witness = is_member(D, Section(factor.generator(), mu))
        if witness is not None:
            return f"({factor.angle} generator, its one-form) is no section: {witness}"
    return None


# ----------------------------------------------------------------------
# sections over prescribed tangents


def section_with_tangent(D: DiracData, field: VectorField) -> Section:
    """The unique section whose field part is the given one.

    The vertical part must sharpen from the coframe span; the linear
    system is solved by Cramer's rule and needs a constant determinant.
    """
    conn = D.conn
    chart = D.chart
    if field.chart != chart:
        raise ChartMismatch("field lives on another chart")
    horizontal = conn.horizontal_part(field)
    vertical = conn.vertical_part(field)
    columns = {
        vert: D.P.sharp(eta) for vert, eta in conn.coframe.items()
    }
    names = list(chart.vertical)
    matrix = [
        [columns[v].component(w) for v in names] for w in names
    ]
    target = [vertical.component(w) for w in names]
    det = _det(matrix)
    value = _as_rational(det)
    if value is None or value == 0:
        raise MissingInverse("coframe sharps do not span the vertical part")
    coeffs = []
    for k in range(len(names)):
        replaced = [row[:k] + [target[i]] + row[k + 1:] for i, row in enumerate(matrix)]
        coeffs.append(_det(replaced) * (Fraction(1) / value))
    alpha = DiffForm.zero(chart, 1)
    for name, coef in zip(names, coeffs):
        alpha = alpha + conn.coframe[name] * coef
    residue = field - horizontal - D.P.sharp(alpha)
    if not residue.is_zero:
        raise MissingInverse("vertical part is not in the image of the sharp map")
    return Section(field, alpha - interior_product(horizontal, D.sigma))
