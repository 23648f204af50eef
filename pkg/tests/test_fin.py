import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greema_sim import fin
from greema_sim.fin import FinPhase, FinSchedule

S = FinSchedule()
PERIOD = 11 / 6


def test_cycle_period():
    assert fin.cycle_period(S) == pytest.approx(PERIOD, abs=1e-12)
    assert fin.cycle_period(FinSchedule(hold_time=0.0, power_rate=100.0)) == pytest.approx(2.0)
    assert fin.cycle_period(FinSchedule(theta_start=10.0, theta_end=10.0, hold_time=0.7)) == pytest.approx(0.7)


@pytest.mark.parametrize("t, phase", [
    (0.0, FinPhase.POWER),
    (0.5, FinPhase.HOLD),
    (PERIOD, FinPhase.POWER),
    (1 / 3, FinPhase.HOLD),
    (5 / 6, FinPhase.RECOVERY),
    (1.0, FinPhase.RECOVERY),
])
def test_phase_at(t, phase):
    assert fin.phase_at(t, S) is phase


@pytest.mark.parametrize("t, theta", [(0.0, 40.0), (0.2, -20.0), (5 / 6 + 0.5, -10.0), (0.6, -60.0)])
def test_command_at(t, theta):
    assert fin.command_at(t, S) == pytest.approx(theta, abs=1e-9)


@pytest.mark.parametrize("t, rate", [(0.1, -300.0), (0.6, 0.0), (1.0, 100.0)])
def test_angular_rate_at(t, rate):
    assert fin.angular_rate_at(t, S) == rate


def test_negative_time_rejected():
    for f in (fin.phase_at, fin.command_at, fin.angular_rate_at):
        with pytest.raises(ValueError):
            f(-0.1, S)


def test_bad_schedules():
    with pytest.raises(ValueError):
        FinSchedule(theta_start=-70.0)
    with pytest.raises(ValueError):
        FinSchedule(power_rate=0.0)
    with pytest.raises(ValueError):
        FinSchedule(hold_time=-1.0)


def test_both_fins_share_the_command():
    for t in np.linspace(0, 5, 37):
        state = fin.fin_state_at(t, S)
        assert state.theta_r == state.theta_l
        assert -60 <= state.theta_r <= 40
    offset = fin.fin_state_at(0.0, S, offset_r=2.0)
    assert offset.theta_r == 42.0 and offset.theta_l == 40.0


def test_vectorised_matches_scalar():
    t = np.linspace(0, 20, 4001)
    np.testing.assert_allclose(fin.commands(t, S), [fin.command_at(x, S) for x in t], atol=1e-9)


def test_mean_command_matches_quadrature():
    t = (np.arange(200000) + 0.5) * PERIOD / 200000
    assert fin.mean_command(S) == pytest.approx(fin.commands(t, S).mean(), abs=1e-6)


def _stroke_quadrature(t_end, sched, n=400000):
    # midpoint rule on dir * omega^2 built from the scalar rate function
    ts = (np.arange(n) + 0.5) * t_end / n
    rates = np.array([fin.angular_rate_at(x, sched) for x in ts[:: n // 4000]])
    w = np.radians(rates)
    integrand = -np.sign(rates) * w**2
    return integrand.sum() * t_end / rates.size


@pytest.mark.parametrize("t_end", [0.2, 1 / 3, 0.7, PERIOD, 4.4])
def test_stroke_integral_matches_quadrature(t_end):
    assert float(fin.stroke_integral(np.array(t_end), S)) == pytest.approx(_stroke_quadrature(t_end, S), rel=2e-3, abs=2e-3)


def test_stroke_integral_with_unit_gains_is_plain():
    t = np.linspace(0, 10, 101)
    np.testing.assert_allclose(fin.stroke_integral(t, S, np.ones(10)), fin.stroke_integral(t, S), atol=1e-12)


def test_cycle_stroke_integral_positive():
    # power impulse beats recovery by the 9x rate-squared asymmetry
    per_cycle = float(fin.stroke_integral(np.array(PERIOD - 1e-12), S))
    wp, wr = math.radians(300), math.radians(100)
    assert per_cycle == pytest.approx(wp**2 / 3 - wr**2 * 1.0, rel=1e-9)
    assert per_cycle > 0


@given(st.floats(0, 1000))
def test_periodic(t):
    assert fin.command_at(t + PERIOD, S) == pytest.approx(fin.command_at(t, S), abs=1e-9)


@given(st.floats(0, 1000), st.floats(0, 1e-3, exclude_max=True))
def test_continuous(t, eps):
    assert abs(fin.command_at(t + eps, S) - fin.command_at(t, S)) <= 300 * eps + 1e-9


@given(st.floats(0, 1000))
def test_in_range(t):
    assert -60.0 <= fin.command_at(t, S) <= 40.0


@given(st.floats(0, 100))
def test_rate_matches_numerical_derivative(t):
    h = 1e-7
    tau = math.fmod(t, PERIOD)
    edges = [0.0, 1 / 3, 5 / 6, PERIOD]
    if min(abs(tau - e) for e in edges) < 1e-5:
        return
    deriv = (fin.command_at(t + h, S) - fin.command_at(t - h, S)) / (2 * h)
    assert deriv == pytest.approx(fin.angular_rate_at(t, S), abs=1e-6 * 300 + 1e-3)
