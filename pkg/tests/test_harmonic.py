import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frictioncomp.errors import DomainError, SingularityError
from frictioncomp.friction import FrictionParams
from frictioncomp.harmonic import (
    LinearPlant,
    describing_function,
    plant_response,
    predict_chatter_and_validate,
    solve_harmonic_balance,
    target_phase,
)
from frictioncomp.integrator import Scenario
from frictioncomp.plant import PlantParams, SystemState

POS = st.floats(0.01, 100.0)
LAB = LinearPlant.second_order(5600.0, 150.0)


def lag_plant(t):
    return LinearPlant((1.0,), (t, 1.0, 0.0, 0.0))


def analytic_lag(gamma, c_f, t):
    w = c_f / (gamma * t)
    a1 = 4 / math.pi * math.hypot(gamma, c_f) / (w * w * math.sqrt(1 + (t * w) ** 2))
    return w, a1


def test_df_examples():
    assert describing_function(4 / math.pi, 1.0, 0.0) == pytest.approx(1 + 0j, rel=1e-15)
    n = describing_function(1.0, 3.0, 4.0)
    assert n == pytest.approx(4 / math.pi * (3 + 4j), rel=1e-15)
    assert abs(n) == pytest.approx(20 / math.pi, rel=1e-15)
    with pytest.raises(DomainError):
        describing_function(0.0, 1.0, 1.0)


@given(POS, POS, st.floats(1e-6, 1e6))
def test_critical_ray_direction(gamma, c_f, a1):
    crit = -1 / describing_function(a1, gamma, c_f)
    assert crit.real < 0 and crit.imag > 0
    assert cmath.phase(crit) == pytest.approx(target_phase(gamma, c_f), abs=1e-14)
    assert target_phase(gamma, c_f) == pytest.approx(math.pi - math.atan(c_f / gamma), rel=1e-15)


def test_plant_response_examples():
    w = math.sqrt(5600.0)
    g = plant_response(LAB, w)
    assert g.real == pytest.approx(0.0, abs=1e-18)
    assert g.imag == pytest.approx(-8.909e-5, rel=1e-4)
    assert g == pytest.approx(1 / (1j * 150 * w), rel=1e-12)
    with pytest.raises(SingularityError):
        plant_response(LinearPlant.second_order(1.0, 0.0), 1.0)
    with pytest.raises(DomainError):
        plant_response(LAB, 0.0)


def test_plant_validation():
    with pytest.raises(DomainError):
        LinearPlant((1.0, 1.0), (1.0, 1.0))
    assert LinearPlant.second_order(1.0, 2.0, lag=0.1).relative_degree == 3


@settings(max_examples=50)
@given(POS, POS)
def test_lab_plant_never_chatters(gamma, c_f):
    sol = solve_harmonic_balance(LAB, gamma, c_f)
    assert not sol.exists
    # arg G stays above -pi, the ray sits atan(C_f/gamma) beyond it
    assert sol.phase_margin_evidence >= math.atan(c_f / gamma) * (1 - 1e-9)
    assert "Analytic" in sol.certificate


def test_single_relay_on_lab_plant():
    sol = solve_harmonic_balance(LAB, 1.0, 0.0)
    assert not sol.exists and sol.phase_margin_evidence > 0


@settings(max_examples=50)
@given(POS, POS, st.floats(1e-3, 1.0))
def test_lag_matches_analytic(gamma, c_f, t):
    w, a1 = analytic_lag(gamma, c_f, t)
    sol = solve_harmonic_balance(lag_plant(t), gamma, c_f, omega_range=(w / 1e3, w * 1e3))
    assert sol.exists
    assert sol.omega_bar == pytest.approx(w, rel=1e-8)
    # the amplitude formula holds exactly at the located frequency
    ws = sol.omega_bar
    at_ws = 4 / math.pi * math.hypot(gamma, c_f) / (ws * ws * math.sqrt(1 + (t * ws) ** 2))
    assert sol.a1 == pytest.approx(at_ws, rel=1e-13)
    assert sol.a1 == pytest.approx(a1, rel=3e-8)
    assert sol.balance_residual <= 1e-8
    assert sol.omega_bar > 0 and sol.a1 > 0


@settings(max_examples=30)
@given(POS, POS, st.floats(0.1, 10.0))
def test_lag_homogeneity(gamma, c_f, lam):
    g = lag_plant(0.05)
    rng = (1e-3, 1e7)
    a = solve_harmonic_balance(g, gamma, c_f, omega_range=rng)
    b = solve_harmonic_balance(g, lam * gamma, lam * c_f, omega_range=rng)
    assert b.omega_bar == pytest.approx(a.omega_bar, rel=1e-9)
    assert b.a1 == pytest.approx(lam * a.a1, rel=1e-9)


def test_solver_domain():
    with pytest.raises(DomainError):
        solve_harmonic_balance(LAB, -1.0, 1.0)
    with pytest.raises(DomainError):
        solve_harmonic_balance(LAB, 0.0, 0.0)


def test_predict_lab_no_oscillation():
    p = PlantParams(5600.0, 150.0, FrictionParams(1.148), 1.214)
    rep = predict_chatter_and_validate(Scenario(p, SystemState(-0.002, 0.0), 1.0))
    assert not rep.prediction.exists
    assert not rep.oscillating
    assert rep.termination in ("Converged", "StuckOffOrigin")
    assert rep.as_dict()["exists"] is False


def test_predict_lag_reports_both_sides():
    p = PlantParams(0.0, 0.0, FrictionParams(1.0), 1.5, actuator_lag=0.05)
    rep = predict_chatter_and_validate(Scenario(p, SystemState(0.01, 0.0), 40.0))
    assert rep.prediction.exists and rep.oscillating
    assert rep.prediction.omega_bar == pytest.approx(1.0 / (1.5 * 0.05), rel=1e-10)
    assert rep.sim_omega > 0 and rep.sim_a1 > 0
    assert set(rep.deviations) == {"omega", "a1"}


def test_lag_chatter_agrees_with_time_stepper():
    """The hybrid integrator and an implicit time-stepper see the same tone."""
    from frictioncomp.analysis import oscillation_spectrum
    from frictioncomp.integrator import Trajectory
    from oracles import moreau

    p = PlantParams(0.0, 0.0, FrictionParams(1.0), 1.5, actuator_lag=0.05)
    rep = predict_chatter_and_validate(Scenario(p, SystemState(0.01, 0.0), 40.0))
    t, x, v = moreau(0.0, 0.0, 1.0, 1.5, 0.01, 0.0, 10.0, 2e-5, lag=0.05)
    w, a = oscillation_spectrum(Trajectory.from_samples(t, x, v))
    assert rep.sim_omega == pytest.approx(w, rel=0.01)
    assert rep.sim_a1 == pytest.approx(a, rel=0.02)
