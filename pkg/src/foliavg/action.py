"""Torus actions by explicit chart flows, and exact averaging along them.

Each circle factor acts through a polynomial-trigonometric flow in one
angle symbol.  Averaging pulls a tensor back by the symbolic flow and
takes the exact Haar mean in that angle, one factor at a time.  The
difference between a connection and its average is reproduced by a flow
integral of frame brackets, and the matching potential one-form comes
from the same integral applied to a momentum datum.
"""

from __future__ import annotations

from contextlib import contextmanager
from itertools import combinations
from typing import Iterator, Mapping, NamedTuple, Sequence

from .errors import (
    ChartMismatch,
    InvariantViolation,
    NonClosedOrbitCoefficients,
    NotHorizontal,
    UnsupportedDegree,
)
from .foliation import Connection, bigrade, is_horizontal_form
from .geom import (
    ChartMap,
    DiffForm,
    Multivector,
    VecValuedForm,
    VectorField,
    exterior_derivative,
    fn_bracket,
    interior_product,
    pullback,
)
from .poisson import PoissonBivector
from .symcalc import Chart, Scalar

Tensor = "Scalar | VectorField | DiffForm | Multivector | VecValuedForm"


# ----------------------------------------------------------------------
# average bookkeeping

class AverageRecord(NamedTuple):
    angle: str
    integrand: Scalar
    average: Scalar


_records: list[AverageRecord] | None = None


@contextmanager
def record_averages() -> Iterator[list[AverageRecord]]:
    """Collect every Haar average taken while the context is active."""
    global _records
    previous, _records = _records, []
    try:
        yield _records
    finally:
        _records = previous


def haar_average(f: Scalar, angle: str) -> Scalar:
    """Exact mean over one angle; every pipeline average funnels through here."""
    result = f.average_over_angle(angle)
    if _records is not None:
        _records.append(AverageRecord(angle, f, result))
    return result


def average_of_running_integral(f: Scalar, angle: str) -> Scalar:
    """Haar average of the integral of f from zero up to the angle.

    The bare-angle part of the running integral is the mean of f times
    the angle, so the result splits exactly into pi times that mean plus
    the average of a periodic remainder.  Both recorded averages then
    stay inside the trigonometric ring.
    """
    if _has_bare_angle(f, angle):
        return haar_average(f.antiderivative_from_zero(angle), angle)
    chart = f.chart
    mean = haar_average(f, angle)
    remainder = f.antiderivative_from_zero(angle) - mean * Scalar.var(chart, angle)
    return mean * Scalar.pi(chart) + haar_average(remainder, angle)


# ----------------------------------------------------------------------
# the action


def _complete(chart: Chart, mapping: Mapping[str, Scalar]) -> dict[str, Scalar]:
    return {
        name: mapping.get(name, Scalar.var(chart, name)) for name in chart.coords
    }


def _compose(outer: Mapping[str, Scalar], inner: Mapping[str, Scalar]) -> dict[str, Scalar]:
    return {name: value.substitute(inner) for name, value in outer.items()}


class FlowFactor:
    """One circle factor, given as a flow in a single angle symbol."""

    __slots__ = ("chart", "angle", "mapping", "_flow")

    def __init__(self, chart: Chart, angle: str, mapping: Mapping[str, Scalar]) -> None:
        chart.require_angle(angle)
        clean: dict[str, Scalar] = {}
        for name, value in mapping.items():
            chart.require_coord(name)
            value = value.on_chart(chart)
            foreign = sorted(
                a for a in value.free_symbols()
                if chart.is_angle(a) and a != angle
            )
            if foreign:
                raise InvariantViolation(
                    f"flow in {angle!r} depends on unrelated angles {foreign}"
                )
            if value != Scalar.var(chart, name):
                clean[name] = value
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "angle", angle)
        object.__setattr__(self, "mapping", clean)
        inverse = {
            name: value.substitute_angle(angle, [(angle, -1)])
            for name, value in clean.items()
        }
        object.__setattr__(self, "_flow", ChartMap(chart, clean, inverse))
        self._check_identity()
        self._check_group_law()

    def __setattr__(self, name, value):
        raise AttributeError("FlowFactor is immutable")

    def flow(self) -> ChartMap:
        """The flow at the symbolic angle; the inverse negates the angle."""
        return self._flow

    def generator(self) -> VectorField:
        """Angle derivative of the flow at angle zero."""
        comps = {}
        for name, value in self.mapping.items():
            comp = value.diff(self.angle).substitute_angle(self.angle, [])
            if not comp.is_zero:
                comps[name] = comp
        return VectorField.from_dict(self.chart, comps)

    def _check_identity(self) -> None:
        for name, value in self.mapping.items():
            if value.substitute_angle(self.angle, []) != Scalar.var(self.chart, name):
                raise InvariantViolation(
                    f"flow in {self.angle!r} is not the identity at angle zero"
                )

    def _check_group_law(self) -> None:
        aux = self.angle + "_s"
        while self.chart.is_symbol(aux):
            aux = aux + "_s"
        ext = self.chart.with_extra_angles((aux,))
        lifted = {n: v.on_chart(ext) for n, v in self.mapping.items()}
        inner = _complete(
            ext,
            {n: v.substitute_angle(self.angle, [(aux, 1)]) for n, v in lifted.items()},
        )
        for name, value in lifted.items():
            composed = value.substitute(inner)
            expected = value.substitute_angle(self.angle, [(self.angle, 1), (aux, 1)])
            if composed != expected:
                raise InvariantViolation(
                    f"flow in {self.angle!r} breaks the group law on {name!r}"
                )

    def __repr__(self) -> str:
        parts = ", ".join(f"{n} -> {v}" for n, v in sorted(self.mapping.items()))
        return f"FlowFactor({self.angle}: {parts})"


class TorusAction:
    """Commuting circle factors acting on one chart."""

    __slots__ = ("chart", "factors")

    def __init__(self, chart: Chart, factors: Sequence[FlowFactor]) -> None:
        factors = tuple(factors)
        if not factors:
            raise InvariantViolation("an action needs at least one circle factor")
        seen = set()
        for factor in factors:
            if factor.chart != chart:
                raise ChartMismatch("factor lives on another chart")
            if factor.angle in seen:
                raise InvariantViolation(
                    f"two factors share the angle {factor.angle!r}"
                )
            seen.add(factor.angle)
        for a, b in combinations(factors, 2):
            ma = _complete(chart, a.mapping)
            mb = _complete(chart, b.mapping)
            if _compose(ma, mb) != _compose(mb, ma):
                raise InvariantViolation(
                    f"factors {a.angle!r} and {b.angle!r} do not commute"
                )
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "factors", factors)

    def __setattr__(self, name, value):
        raise AttributeError("TorusAction is immutable")

    @property
    def angles(self) -> tuple[str, ...]:
        return tuple(factor.angle for factor in self.factors)

    def generators(self) -> list[VectorField]:
        return [factor.generator() for factor in self.factors]

    def __repr__(self) -> str:
        return "TorusAction(" + ", ".join(repr(f) for f in self.factors) + ")"


def verify_action(action: TorusAction, P: PoissonBivector) -> dict[str, str | None]:
    """Per-property witnesses: leaves preserved, base fixed, bivector kept."""
    chart = action.chart
    vertical = set(chart.vertical)
    verdict: dict[str, str | None] = {
        "foliation_preserving": None,
        "leaf_tangent": None,
        "canonical": None,
    }
    for factor in action.factors:
        for name in chart.horizontal:
            image = factor.mapping.get(name)
            if image is None:
                continue
            if verdict["foliation_preserving"] is None and image.free_symbols() & vertical:
                verdict["foliation_preserving"] = (
                    f"{factor.angle} flow mixes fiber data into {name}"
                )
            if verdict["leaf_tangent"] is None:
                verdict["leaf_tangent"] = (
                    f"{factor.angle} flow moves the base point {name}"
                )
        if verdict["canonical"] is None:
            if pullback(factor.flow(), P.mv) != P.mv:
                verdict["canonical"] = (
                    f"{factor.angle} flow does not preserve the bivector"
                )
    return verdict


# ----------------------------------------------------------------------
# averaging


def _coefficients(target) -> list[Scalar]:
    if isinstance(target, Scalar):
        return [target]
    if isinstance(target, VectorField):
        return list(target.comps)
    if isinstance(target, VecValuedForm):
        return [c for vec in target.comps.values() for c in vec.comps]
    return list(target.comps.values())


def _map_coefficients(target, fn):
    if isinstance(target, Scalar):
        return fn(target)
    if isinstance(target, VectorField):
        return VectorField(target.chart, [fn(c) for c in target.comps])
    if isinstance(target, VecValuedForm):
        items = [
            (idx, _map_coefficients(vec, fn)) for idx, vec in target.comps.items()
        ]
        return VecValuedForm._make(target.chart, target.degree, items)
    items = [(idx, fn(value)) for idx, value in target.comps.items()]
    return type(target)._make(target.chart, target.degree, items)


def _has_bare_angle(f: Scalar, angle: str) -> bool:
    return any(
        any(name == angle for name, _ in powers) for powers, _ in f.terms
    )


def _average_factor(factor: FlowFactor, target):
    if isinstance(target, Connection):
        return Connection.from_projection(_average_factor(factor, target.projection))
    angle = factor.angle
    for coef in _coefficients(target):
        if coef.depends_on(angle):
            raise NonClosedOrbitCoefficients(
                f"input already depends on the action angle {angle!r}"
            )
    moved = pullback(factor.flow(), target)
    for coef in _coefficients(moved):
        if _has_bare_angle(coef, angle):
            raise NonClosedOrbitCoefficients(
                f"orbit coefficients leave the trigonometric ring in {angle!r}"
            )
    return _map_coefficients(moved, lambda f: haar_average(f, angle))


def average_tensor(action: TorusAction, target):
    """Exact group average, one circle factor at a time.

    Connections are averaged through their projection and revalidated.
    Coefficients must stay trigonometric polynomials along every orbit;
    bare angle powers mean the orbit does not close and are rejected.
    """
    result = target
    for factor in action.factors:
        result = _average_factor(factor, result)
    return result


def hannay_berry(action: TorusAction, conn: Connection) -> Connection:
    """The averaged connection."""
    return average_tensor(action, conn)


def connection_difference(action: TorusAction, conn: Connection) -> VecValuedForm:
    """Average minus connection, a vertical-valued horizontal one-form."""
    return conn.difference(hannay_berry(action, conn))


def difference_via_flow_integral(action: TorusAction, conn: Connection) -> VecValuedForm:
    """The same difference computed from flow integrals of frame brackets.

    Per factor, on the partially averaged frame, the value is minus the
    average over the angle of the integral from zero of the pulled-back
    bracket of the frame field with the generator.
    """
    chart = conn.chart
    current = conn
    total = VecValuedForm.zero(chart, 1)
    for factor in action.factors:
        angle = factor.angle
        flow = factor.flow()
        gen = factor.generator()
        items = []
        for base, lift in current.frame.items():
            integrand = pullback(flow, lift.bracket(gen))
            value = -_map_coefficients(
                integrand,
                lambda f: average_of_running_integral(f, angle),
            )
            if not value.is_zero:
                items.append(((chart.coord_index(base),), value))
        piece = VecValuedForm._make(chart, 1, items)
        current = current.shifted(piece)
        total = total + piece
    return total


# ----------------------------------------------------------------------
# momentum data and the potential


def _require_momenta(action: TorusAction, moments: Sequence[DiffForm]) -> None:
    if len(moments) != len(action.factors):
        raise InvariantViolation("expected one momentum one-form per circle factor")
    for mu in moments:
        if mu.chart != action.chart:
            raise ChartMismatch("momentum one-form lives on another chart")
        if mu.degree != 1:
            raise UnsupportedDegree("momentum data must be one-forms")


def verify_premomentum(
    action: TorusAction, P: PoissonBivector, moments: Sequence[DiffForm]
) -> str | None:
    """Each factor one-form must sharpen to its generator and have a
    differential that is closed along the leaves."""
    _require_momenta(action, moments)
    chart = action.chart
    for factor, mu in zip(action.factors, moments):
        if P.sharp(mu) != factor.generator():
            return f"sharp of the {factor.angle} one-form is not its generator"
        dmu = exterior_derivative(mu)
        for vert in chart.vertical:
            probe = P.sharp(DiffForm.d_coord(chart, vert))
            rest = interior_product(probe, dmu)
            if not rest.is_zero:
                return (
                    f"{factor.angle} one-form is not leafwise closed: "
                    f"contraction along sharp d{vert} leaves {rest!r}"
                )
    return None


def hamiltonian_potential(
    action: TorusAction, conn: Connection, moments: Sequence[DiffForm]
) -> DiffForm:
    """The horizontal potential of the averaging difference.

    Per factor, on the partially averaged frame, the coefficient on each
    base differential is minus the average over the angle of the integral
    from zero of the pulled-back pairing of the frame field with the
    base-degree part of the momentum one-form.
    """
    _require_momenta(action, moments)
    chart = conn.chart
    current = conn
    total = DiffForm.zero(chart, 1)
    for factor, mu in zip(action.factors, moments):
        angle = factor.angle
        flow = factor.flow()
        horizontal = bigrade(current, mu).component(1, 0)
        items = []
        for base, lift in current.frame.items():
            paired = flow.pull_scalar(horizontal.evaluate(lift))
            value = -average_of_running_integral(paired, angle)
            if not value.is_zero:
                items.append(((chart.coord_index(base),), value))
        total = total + DiffForm._make(chart, 1, items)
        current = _average_factor(factor, current)
    return total


def difference_from_potential(P: PoissonBivector, potential: DiffForm) -> VecValuedForm:
    """The valued one-form sending each base field to the Hamiltonian
    field of its potential coefficient."""
    chart = potential.chart
    if potential.degree != 1:
        raise UnsupportedDegree("the potential must be a one-form")
    if not is_horizontal_form(potential):
        raise NotHorizontal("the potential must be horizontal")
    items = []
    for (i,), value in potential.comps.items():
        field = P.hamiltonian_vf(value)
        if not field.is_zero:
            items.append(((i,), field))
    return VecValuedForm._make(chart, 1, items)


# ----------------------------------------------------------------------
# invariance


def invariance_criteria(action: TorusAction, conn: Connection) -> dict[str, bool]:
    """Three equivalent invariance tests for a connection.

    Averaging fixes it, its projection commutes with every generator,
    and the flow-integral difference vanishes; the verdicts must agree.
    """
    chart = conn.chart
    fixed = hannay_berry(action, conn) == conn
    brackets = all(
        fn_bracket(
            conn.projection, VecValuedForm.vector(chart, factor.generator())
        ).is_zero
        for factor in action.factors
    )
    difference = difference_via_flow_integral(action, conn).is_zero
    return {
        "fixed_by_averaging": fixed,
        "generator_brackets_vanish": brackets,
        "flow_difference_vanishes": difference,
        "agree": fixed == brackets == difference,
    }
