"""Feed-forward fin schedule shared by both fins.

One cycle: a fast power sweep from ``theta_start`` down to ``theta_end``, a hold at
``theta_end``, then a slow recovery sweep back up. Phase intervals are half-open, so
a boundary instant belongs to the phase that starts there.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class FinPhase(enum.Enum):
    POWER = "power"
    HOLD = "hold"
    RECOVERY = "recovery"


@dataclass(frozen=True)
class FinSchedule:
    theta_start: float = 40.0  # deg
    theta_end: float = -60.0  # deg
    power_rate: float = 300.0  # deg/s
    hold_time: float = 0.5  # s
    recovery_rate: float = 100.0  # deg/s

    def __post_init__(self):
        if self.theta_start < self.theta_end:
            raise ValueError("theta_start must be >= theta_end")
        if self.power_rate <= 0 or self.recovery_rate <= 0:
            raise ValueError("fin rates must be > 0")
        if self.hold_time < 0:
            raise ValueError("hold_time must be >= 0")
        if self.theta_start == self.theta_end and self.hold_time == 0:
            raise ValueError("schedule has zero period")

    @property
    def sweep(self) -> float:
        return self.theta_start - self.theta_end

    @property
    def power_time(self) -> float:
        return self.sweep / self.power_rate

    @property
    def recovery_time(self) -> float:
        return self.sweep / self.recovery_rate


@dataclass(frozen=True)
class FinState:
    theta_r: float
    theta_l: float


def cycle_period(sched: FinSchedule) -> float:
    return sched.power_time + sched.hold_time + sched.recovery_time


def _cycle_time(t: float, sched: FinSchedule) -> float:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    period = cycle_period(sched)
    tau = math.fmod(t, period)
    # fmod can land a hair below the period for t = k * period
    if period - tau < 1e-12 * max(1.0, t):
        tau = 0.0
    return tau


def phase_at(t: float, sched: FinSchedule) -> FinPhase:
    tau = _cycle_time(t, sched)
    if tau < sched.power_time:
        return FinPhase.POWER
    if tau < sched.power_time + sched.hold_time:
        return FinPhase.HOLD
    return FinPhase.RECOVERY


def command_at(t: float, sched: FinSchedule) -> float:
    """Commanded fin angle in degrees."""
    tau = _cycle_time(t, sched)
    t_hold = sched.power_time
    t_rec = sched.power_time + sched.hold_time
    if tau < t_hold:
        theta = sched.theta_start - sched.power_rate * tau
    elif tau < t_rec:
        theta = sched.theta_end
    else:
        theta = sched.theta_end + sched.recovery_rate * (tau - t_rec)
    return min(max(theta, sched.theta_end), sched.theta_start)


def angular_rate_at(t: float, sched: FinSchedule) -> float:
    """Commanded angular rate in deg/s; negative is the power direction."""
    phase = phase_at(t, sched)
    if phase is FinPhase.POWER:
        return -sched.power_rate
    if phase is FinPhase.HOLD:
        return 0.0
    return sched.recovery_rate


def fin_state_at(t: float, sched: FinSchedule, offset_r: float = 0.0, offset_l: float = 0.0) -> FinState:
    theta = command_at(t, sched)
    return FinState(theta + offset_r, theta + offset_l)


def mean_command(sched: FinSchedule) -> float:
    """Cycle-average of the commanded angle."""
    mid = 0.5 * (sched.theta_start + sched.theta_end)
    return (mid * (sched.power_time + sched.recovery_time) + sched.theta_end * sched.hold_time) / cycle_period(sched)


def commands(t: np.ndarray, sched: FinSchedule) -> np.ndarray:
    """Vectorised :func:`command_at`."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    period = cycle_period(sched)
    tau = np.mod(t, period)
    tau = np.where(period - tau < 1e-12 * np.maximum(1.0, t), 0.0, tau)
    t_hold = sched.power_time
    t_rec = sched.power_time + sched.hold_time
    theta = np.where(
        tau < t_hold,
        sched.theta_start - sched.power_rate * tau,
        np.where(tau < t_rec, sched.theta_end, sched.theta_end + sched.recovery_rate * (tau - t_rec)),
    )
    return np.clip(theta, sched.theta_end, sched.theta_start)


def stroke_integral(t: np.ndarray, sched: FinSchedule, gains: np.ndarray | None = None) -> np.ndarray:
    """Running integral of ``dir * omega**2`` from 0 to ``t`` in rad^2/s.

    ``dir`` is +1 in the power sweep and -1 in recovery, which is the time profile of
    the quadratic paddle thrust. Optional per-cycle ``gains`` scale each stroke.
    Differences of this function give exact per-step impulses regardless of where
    phase boundaries fall inside a step.
    """
    t = np.asarray(t, dtype=float)
    period = cycle_period(sched)
    wp = math.radians(sched.power_rate)
    wr = math.radians(sched.recovery_rate)
    t_hold = sched.power_time
    t_rec = sched.power_time + sched.hold_time
    per_cycle = wp**2 * t_hold - wr**2 * sched.recovery_time

    n = np.floor(t / period)
    tau = t - n * period
    partial = np.where(
        tau < t_hold,
        wp**2 * tau,
        np.where(tau < t_rec, wp**2 * t_hold, wp**2 * t_hold - wr**2 * (tau - t_rec)),
    )
    if gains is None:
        return n * per_cycle + partial
    gains = np.asarray(gains, dtype=float)
    idx = n.astype(np.int64)
    if idx.size and idx.max() >= gains.shape[-1]:
        raise ValueError("not enough stroke gains for the requested horizon")
    completed = np.concatenate([np.zeros(gains.shape[:-1] + (1,)), np.cumsum(gains, axis=-1)], axis=-1)
    return np.take(completed, idx, axis=-1) * per_cycle + np.take(gains, idx, axis=-1) * partial
