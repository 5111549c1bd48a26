"""Curvature as a Hamiltonian pairing form, and its exact averaging laws.

A pairing form attaches to each frame pair a function whose Hamiltonian
field is minus the curvature.  Averaging shifts it by a derivative and a
bracket correction; three derivative identities control the shift.  The
adiabatic machinery detects momentum data whose base-degree part fails
to average away and repairs it from supplied Casimir primitives.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .action import (
    TorusAction,
    average_tensor,
    difference_from_potential,
    hamiltonian_potential,
    hannay_berry,
)
from .errors import (
    ChartMismatch,
    InvariantViolation,
    NotACocycle,
    NotCasimir,
    NotCasimirResidue,
    NotHorizontal,
    PrimitiveMismatch,
    UnsupportedDegree,
)
from .foliation import (
    Connection,
    bigrade,
    curvature,
    graded_derivative,
    is_horizontal_form,
)
from .geom import DiffForm, exterior_derivative
from .poisson import PoissonBivector, braided_wedge
from .symcalc import Scalar

_HALF = Fraction(1, 2)


def _require_pairing_form(conn: Connection, sigma: DiffForm) -> None:
    if sigma.chart != conn.chart:
        raise ChartMismatch("pairing form lives on another chart")
    if sigma.degree != 2:
        raise UnsupportedDegree("a pairing form is a two-form")
    if not is_horizontal_form(sigma):
        raise NotHorizontal("a pairing form is horizontal")


def verify_hamiltonian_curvature(
    conn: Connection, P: PoissonBivector, sigma: DiffForm
) -> str | None:
    """Framewise, the curvature plus the Hamiltonian field of the pairing
    must vanish."""
    _require_pairing_form(conn, sigma)
    frame = conn.frame
    curv = curvature(conn)
    for a, b in combinations(conn.chart.horizontal, 2):
        z1, z2 = frame[a], frame[b]
        defect = curv.evaluate(z1, z2) + P.hamiltonian_vf(sigma.evaluate(z1, z2))
        if not defect.is_zero:
            return (
                f"frame pair ({a}, {b}): curvature misses minus the "
                f"Hamiltonian field by {defect!r}"
            )
    return None


# ----------------------------------------------------------------------
# Casimir-valued forms


def is_casimir_form(P: PoissonBivector, form: DiffForm) -> bool:
    """Horizontal with every coefficient a Casimir function."""
    if not is_horizontal_form(form):
        return False
    return all(P.is_casimir(value) for value in form.comps.values())


def casimir_freedom_check(
    P: PoissonBivector, sigma: DiffForm, sigma_new: DiffForm
) -> str | None:
    """Two pairing forms of one connection may differ only by a Casimir form."""
    diff = sigma_new - sigma
    if is_casimir_form(P, diff):
        return None
    return f"difference {diff!r} is not a Casimir-valued horizontal form"


def verify_admissible(conn: Connection, sigma: DiffForm) -> str | None:
    """The base-degree covariant derivative of the pairing form must vanish."""
    _require_pairing_form(conn, sigma)
    residue = graded_derivative(conn, sigma, (1, 0))
    if residue.is_zero:
        return None
    return f"base-degree derivative is {residue!r}"


def bianchi_residue(conn: Connection, P: PoissonBivector, sigma: DiffForm) -> DiffForm:
    """The base-degree derivative of the pairing form, always Casimir-valued."""
    _require_pairing_form(conn, sigma)
    residue = graded_derivative(conn, sigma, (1, 0))
    if not is_casimir_form(P, residue):
        raise NotCasimirResidue(
            "derivative of the pairing form left the Casimir complex"
        )
    return residue


def casimir_complex_d(conn: Connection, P: PoissonBivector, beta: DiffForm) -> DiffForm:
    """Base-degree derivative restricted to Casimir-valued horizontal forms."""
    if not is_casimir_form(P, beta):
        raise NotCasimir("input is not a Casimir-valued horizontal form")
    result = graded_derivative(conn, beta, (1, 0))
    if not is_casimir_form(P, result):
        raise NotCasimirResidue("derivative left the Casimir complex")
    return result


# ----------------------------------------------------------------------
# averaging the pairing form


def averaging_correction(
    conn: Connection, P: PoissonBivector, potential: DiffForm
) -> DiffForm:
    """Derivative plus half self-bracket of the potential."""
    return (
        graded_derivative(conn, potential, (1, 0))
        + braided_wedge(P, potential, potential) * _HALF
    )


def averaged_hamiltonian_form(
    conn: Connection, P: PoissonBivector, sigma: DiffForm, potential: DiffForm
) -> DiffForm:
    """The pairing form belonging to the averaged connection."""
    _require_pairing_form(conn, sigma)
    return sigma - averaging_correction(conn, P, potential)


def averaged_curvature_check(
    action: TorusAction,
    conn: Connection,
    P: PoissonBivector,
    moments: Sequence[DiffForm],
) -> str | None:
    """On frame pairs, the averaged curvature must equal the curvature
    plus the Hamiltonian field of the averaging correction."""
    potential = hamiltonian_potential(action, conn, moments)
    correction = averaging_correction(conn, P, potential)
    curv = curvature(conn)
    curv_avg = curvature(hannay_berry(action, conn))
    frame = conn.frame
    for a, b in combinations(conn.chart.horizontal, 2):
        z1, z2 = frame[a], frame[b]
        rhs = curv.evaluate(z1, z2) + P.hamiltonian_vf(correction.evaluate(z1, z2))
        if curv_avg.evaluate(z1, z2) != rhs:
            return f"transition fails on the ({a}, {b}) frame pair"
    return None


def averaging_identities(
    conn: Connection, P: PoissonBivector, sigma: DiffForm, potential: DiffForm
) -> dict[str, DiffForm]:
    """Exact residuals of the three derivative identities behind averaging.

    The shift of the base-degree derivative across the averaged
    connection, the second derivative of the potential, and the
    derivative of its half self-bracket are each balanced by braided
    wedges; all residuals must be zero forms.
    """
    _require_pairing_form(conn, sigma)
    shifted = conn.shifted(difference_from_potential(P, potential))
    d_sigma = graded_derivative(conn, sigma, (1, 0))
    d_potential = graded_derivative(conn, potential, (1, 0))
    return {
        "shifted_derivative": (
            graded_derivative(shifted, sigma, (1, 0))
            - d_sigma
            - braided_wedge(P, potential, sigma)
        ),
        "second_derivative": (
            graded_derivative(conn, d_potential, (1, 0))
            - braided_wedge(P, potential, sigma)
        ),
        "bracket_derivative": (
            graded_derivative(conn, braided_wedge(P, potential, potential) * _HALF, (1, 0))
            + braided_wedge(P, potential, d_potential)
        ),
    }


# ----------------------------------------------------------------------
# adiabatic conditions


def horizontal_momentum(conn: Connection, mu: DiffForm) -> DiffForm:
    """Base-degree part of a momentum one-form."""
    return bigrade(conn, mu).component(1, 0)


def adiabatic_defect(action: TorusAction, conn: Connection, mu: DiffForm) -> DiffForm:
    """Group average of the base-degree part; zero exactly when adiabatic."""
    return average_tensor(action, horizontal_momentum(conn, mu))


def adiabatic_check(
    action: TorusAction, conn: Connection, moments: Sequence[DiffForm]
) -> str | None:
    """Every momentum one-form must average to pure fiber degree.

    The defect is also recomputed as the base-degree part taken with
    respect to the averaged connection; the two routes must agree.
    """
    averaged = hannay_berry(action, conn)
    for factor, mu in zip(action.factors, moments):
        defect = adiabatic_defect(action, conn, mu)
        cross = horizontal_momentum(averaged, mu)
        if cross != defect:
            return (
                f"defect routes disagree for {factor.angle}: "
                f"{cross!r} against {defect!r}"
            )
        if not defect.is_zero:
            return f"{factor.angle} one-form has averaged base part {defect!r}"
    return None


def adiabatic_fix(
    action: TorusAction,
    conn: Connection,
    P: PoissonBivector,
    moments: Sequence[DiffForm],
    primitives: Sequence[Scalar],
) -> list[DiffForm]:
    """Shift each momentum one-form by the differential of a supplied
    Casimir primitive of its averaged defect.

    The defect must be closed for the base-degree derivative, and each
    primitive must be a Casimir whose derivative is exactly the defect.
    Primitives are verified, never solved for.
    """
    if len(primitives) != len(moments):
        raise InvariantViolation("expected one primitive per momentum one-form")
    chart = conn.chart
    fixed = []
    for factor, mu, prim in zip(action.factors, moments, primitives):
        defect = adiabatic_defect(action, conn, mu)
        if not graded_derivative(conn, defect, (1, 0)).is_zero:
            raise NotACocycle(
                f"averaged defect of {factor.angle} is not closed for the "
                "base-degree derivative"
            )
        if not P.is_casimir(prim):
            raise PrimitiveMismatch(f"primitive for {factor.angle} is not a Casimir")
        as_form = DiffForm.function(chart, prim)
        if graded_derivative(conn, as_form, (1, 0)) != defect:
            raise PrimitiveMismatch(
                f"primitive for {factor.angle} does not produce the defect"
            )
        fixed.append(mu - exterior_derivative(as_form))
    return fixed


# ----------------------------------------------------------------------
# the axiomatic characterization


def axiomatic_verify(
    action: TorusAction,
    conn: Connection,
    candidate: Connection,
    P: PoissonBivector,
    moments: Sequence[DiffForm],
    potential: DiffForm,
) -> dict[str, str | None]:
    """The four framewise laws singling out the averaged connection.

    The momentum one-forms annihilate the candidate's horizontal parts;
    the difference of the connections is the Hamiltonian image of the
    potential; the averaged potential coefficients are Casimirs; and the
    original horizontal pairings average to zero.
    """
    verdict: dict[str, str | None] = {
        "annihilates_horizontal": None,
        "difference_is_hamiltonian": None,
        "averaged_potential_casimir": None,
        "averaged_pairing_vanishes": None,
    }
    frame = conn.frame
    for factor, mu in zip(action.factors, moments):
        for base, lift in frame.items():
            if verdict["annihilates_horizontal"] is None:
                value = mu.evaluate(candidate.horizontal_part(lift))
                if not value.is_zero:
                    verdict["annihilates_horizontal"] = (
                        f"{factor.angle} one-form takes {value} on the "
                        f"candidate-horizontal part of the {base} lift"
                    )
            if verdict["averaged_pairing_vanishes"] is None:
                value = average_tensor(action, mu.evaluate(lift))
                if not value.is_zero:
                    verdict["averaged_pairing_vanishes"] = (
                        f"{factor.angle} one-form pairs with the {base} lift "
                        f"to average {value}"
                    )
    if conn.difference(candidate) != difference_from_potential(P, potential):
        verdict["difference_is_hamiltonian"] = (
            "connection difference is not the Hamiltonian image of the potential"
        )
    for (i,), value in potential.comps.items():
        averaged = average_tensor(action, value)
        if not P.is_casimir(averaged):
            verdict["averaged_potential_casimir"] = (
                f"averaged coefficient {averaged} on d{conn.chart.coords[i]} "
                "is not a Casimir"
            )
            break
    return verdict


def invariant_pairing_casimir(
    action: TorusAction,
    conn: Connection,
    P: PoissonBivector,
    moments: Sequence[DiffForm],
) -> str | None:
    """Pairings of momentum one-forms with the averaged frame are Casimirs."""
    averaged = hannay_berry(action, conn)
    for factor, mu in zip(action.factors, moments):
        for base, lift in averaged.frame.items():
            value = mu.evaluate(lift)
            if not P.is_casimir(value):
                return (
                    f"{factor.angle} one-form on the averaged {base} lift "
                    f"gives {value}, not a Casimir"
                )
    return None
