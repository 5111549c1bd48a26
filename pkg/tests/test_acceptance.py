"""Acceptance gate: the ten headline guarantees, one test each.

Each test prints a single pass line on success; a failing assertion marks
the criterion failed.  Everything is exact arithmetic except the
quadrature cross-check, which has a stated tolerance.
"""

import math
import random
import time
from fractions import Fraction

import pytest

import foliavg.poisson
from foliavg.action import (
    connection_difference,
    difference_from_potential,
    hamiltonian_potential,
    hannay_berry,
    invariance_criteria,
    record_averages,
)
from foliavg.dirac import (
    build_coupling_dirac,
    hamiltonian_generator_check,
    verify_g_invariance,
    verify_involutive,
    verify_lagrangian,
)
from foliavg.foliation import Connection, graded_derivative
from foliavg.geom import DiffForm, lie_derivative
from foliavg.hamcurv import (
    adiabatic_check,
    adiabatic_defect,
    adiabatic_fix,
    averaged_curvature_check,
    averaged_hamiltonian_form,
    averaging_identities,
    horizontal_momentum,
    is_casimir_form,
    verify_admissible,
    verify_hamiltonian_curvature,
)
from foliavg.scenarios import bundled_names, load_scenario, run_checks
from foliavg.symcalc import Scalar

from conftest import CHART, sc


def report(number, label):
    print(f"criterion {number}: {label}: PASS")


@pytest.fixture
def hb4d():
    return load_scenario("hb4d")


@pytest.fixture
def hb4d_inv():
    return load_scenario("hb4d_inv")


@pytest.fixture
def triv():
    return load_scenario("triv")


# ----------------------------------------------------------------------


def test_criterion_01_difference_equals_sharp_of_potential(hb4d):
    started = time.monotonic()
    Q = hamiltonian_potential(hb4d.action, hb4d.conn, hb4d.momenta)
    xi = connection_difference(hb4d.action, hb4d.conn)
    via_potential = difference_from_potential(hb4d.P, Q)
    for base, lift in hb4d.conn.frame.items():
        assert (xi.evaluate(lift) - via_potential.evaluate(lift)).is_zero
    assert xi == via_potential
    assert time.monotonic() - started < 5.0
    report(1, "connection difference is the sharp of the averaged potential")


def test_criterion_02_curvature_transition_under_averaging(hb4d, hb4d_inv):
    started = time.monotonic()
    for scenario in (hb4d, hb4d_inv):
        witness = averaged_curvature_check(
            scenario.action, scenario.conn, scenario.P, scenario.momenta
        )
        assert witness is None
    assert time.monotonic() - started < 5.0
    report(2, "averaged curvature equals curvature plus the correction field")


def test_criterion_03_averaged_pairing_data(hb4d):
    Q = hamiltonian_potential(hb4d.action, hb4d.conn, hb4d.momenta)
    averaged = hannay_berry(hb4d.action, hb4d.conn)
    sigma_bar = averaged_hamiltonian_form(hb4d.conn, hb4d.P, hb4d.sigma, Q)
    assert verify_hamiltonian_curvature(averaged, hb4d.P, sigma_bar) is None
    assert averaged.is_flat_frame
    assert is_casimir_form(hb4d.P, sigma_bar)
    residuals = averaging_identities(hb4d.conn, hb4d.P, hb4d.sigma, Q)
    assert set(residuals) == {
        "shifted_derivative",
        "second_derivative",
        "bracket_derivative",
    }
    for residual in residuals.values():
        assert residual.is_zero
    report(3, "averaged connection and pairing form satisfy the curvature law")


def test_criterion_04_admissibility_is_preserved():
    scenario = load_scenario("ext3adm")
    assert verify_admissible(scenario.conn, scenario.sigma) is None
    Q = hamiltonian_potential(scenario.action, scenario.conn, scenario.momenta)
    averaged = hannay_berry(scenario.action, scenario.conn)
    sigma_bar = averaged_hamiltonian_form(scenario.conn, scenario.P, scenario.sigma, Q)
    assert graded_derivative(averaged, sigma_bar, (1, 0)).is_zero
    assert verify_admissible(averaged, sigma_bar) is None
    report(4, "admissibility survives averaging on three base coordinates")


def test_criterion_05_coupling_families_are_dirac(triv, hb4d_inv):
    for scenario in (triv, hb4d_inv):
        D = build_coupling_dirac(scenario.conn, scenario.sigma, scenario.P)
        assert verify_lagrangian(D) is None
        assert verify_involutive(D) is None
    mismatched = DiffForm.from_dict(
        hb4d_inv.chart, 2, {("x1", "x2"): sc("q", hb4d_inv.chart)}
    )
    bad = build_coupling_dirac(hb4d_inv.conn, mismatched, hb4d_inv.P)
    witness = verify_involutive(bad)
    assert witness is not None and "pairing with generator" in witness
    report(5, "coupling families are lagrangian and involutive, violations detected")


def test_criterion_06_invariance_of_the_averaged_family(hb4d):
    Q = hamiltonian_potential(hb4d.action, hb4d.conn, hb4d.momenta)
    averaged = hannay_berry(hb4d.action, hb4d.conn)
    sigma_bar = averaged_hamiltonian_form(hb4d.conn, hb4d.P, hb4d.sigma, Q)
    assert is_casimir_form(hb4d.P, hb4d.casimir)

    invariant_family = build_coupling_dirac(averaged, sigma_bar + hb4d.casimir, hb4d.P)
    assert verify_g_invariance(hb4d.action, invariant_family) is None
    moving_family = build_coupling_dirac(hb4d.conn, hb4d.sigma, hb4d.P)
    assert verify_g_invariance(hb4d.action, moving_family) is not None

    # with an invariant connection and bivector the membership route must
    # agree with the derivative of the pairing form along each generator
    generators = [factor.generator() for factor in hb4d.action.factors]
    for total in (sigma_bar + hb4d.casimir, hb4d.sigma):
        family = build_coupling_dirac(averaged, total, hb4d.P)
        derivative_route = all(
            lie_derivative(gen, total).is_zero for gen in generators
        )
        membership_route = verify_g_invariance(hb4d.action, family) is None
        assert derivative_route == membership_route
    report(6, "averaged family is invariant, both invariance routes agree")


def test_criterion_07_adiabatic_conditions():
    for name in bundled_names():
        scenario = load_scenario(name)
        if not scenario.momenta:
            continue
        averaged = hannay_berry(scenario.action, scenario.conn)
        for mu in scenario.momenta:
            assert adiabatic_defect(scenario.action, scenario.conn, mu) == (
                horizontal_momentum(averaged, mu)
            )

    shifted = load_scenario("triv_shifted")
    assert adiabatic_check(shifted.action, shifted.conn, shifted.momenta) is not None
    fixed = adiabatic_fix(
        shifted.action, shifted.conn, shifted.P, shifted.momenta, shifted.primitives
    )
    assert adiabatic_check(shifted.action, shifted.conn, fixed) is None

    Q = hamiltonian_potential(shifted.action, shifted.conn, fixed)
    averaged = hannay_berry(shifted.action, shifted.conn)
    sigma_bar = averaged_hamiltonian_form(shifted.conn, shifted.P, shifted.sigma, Q)
    family = build_coupling_dirac(averaged, sigma_bar, shifted.P)
    assert hamiltonian_generator_check(shifted.action, fixed, family) is None
    report(7, "adiabatic defect routes agree, the fix restores the conditions")


def _random_polynomial(rng, chart):
    total = Scalar.zero(chart)
    for _ in range(rng.randint(1, 3)):
        term = Scalar.const(chart, Fraction(rng.randint(-6, 6), rng.randint(1, 4)))
        for name in chart.coords:
            term = term * Scalar.var(chart, name) ** rng.randint(0, 2)
        total = total + term
    return total


def test_criterion_08_invariance_conditions_agree(triv):
    rng = random.Random(20260814)
    action = triv.action
    agreed = 0
    for trial in range(10):
        if trial % 3 == 2:
            # an invariant perturbation: rotation scaled by a Casimir
            c = _random_polynomial(rng, CHART).substitute(
                {"q": Scalar.zero(CHART), "p": Scalar.zero(CHART)}
            )
            coeffs = {("x1", "q"): sc("-p") * c, ("x1", "p"): sc("q") * c}
        else:
            coeffs = {
                (base, vert): _random_polynomial(rng, CHART)
                for base in CHART.horizontal
                for vert in CHART.vertical
                if rng.random() < 0.7
            }
        verdict = invariance_criteria(action, Connection(CHART, coeffs))
        assert verdict["agree"]
        agreed += 1
    assert agreed == 10
    report(8, "the three invariance conditions give one verdict on 10 perturbations")


def _random_rational_point(rng, chart):
    point = {}
    for name in chart.coords + chart.angles:
        point[name] = Fraction(rng.randint(-12, 12), rng.randint(1, 6))
    return point


def test_criterion_09_quadrature_oracle():
    started = time.monotonic()
    with record_averages() as records:
        for name in bundled_names():
            run_checks(load_scenario(name))
    assert records
    rng = random.Random(64)
    nodes = 64
    worst = 0.0
    for rec in records:
        chart = rec.integrand.chart
        for _ in range(10):
            point = _random_rational_point(rng, chart)
            total = 0.0
            for k in range(nodes):
                at_node = dict(point)
                at_node[rec.angle] = 2.0 * math.pi * k / nodes
                total += rec.integrand.evaluate(at_node)
            exact = rec.average.evaluate(point)
            worst = max(worst, abs(total / nodes - exact))
    assert worst < 1e-10
    assert time.monotonic() - started < 30.0
    report(9, f"{len(records)} recorded averages match 64-node quadrature")


def test_criterion_10_sign_charter(monkeypatch, hb4d, hb4d_inv):
    J = sc("(q^2 + p^2)/2", hb4d.chart)
    generator = hb4d.action.factors[0].generator()
    assert hb4d.P.hamiltonian_vf(J) == generator

    monkeypatch.setattr(foliavg.poisson, "SHARP_SIGN", -1)
    assert hb4d.P.hamiltonian_vf(J) != generator

    # criterion 1 computation breaks
    Q = hamiltonian_potential(hb4d.action, hb4d.conn, hb4d.momenta)
    xi = connection_difference(hb4d.action, hb4d.conn)
    assert xi != difference_from_potential(hb4d.P, Q)

    # criterion 5 computation breaks
    D = build_coupling_dirac(hb4d_inv.conn, hb4d_inv.sigma, hb4d_inv.P)
    assert verify_involutive(D) is not None

    monkeypatch.undo()
    assert hb4d.P.hamiltonian_vf(J) == generator
    report(10, "sign charter holds and flipping the sharp convention breaks it")
