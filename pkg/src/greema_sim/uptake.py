"""Stochastic intake-cycle model of the soil-eating arm.

Each cycle opens and closes the gripper, then winches the bag 7 cm into the hose.
Sometimes the bag snags on the gripper: the winch turns but nothing moves, so the
cycle is spent without soil or bag travel. Otherwise the gripper delivers a grab
drawn from a normal distribution truncated to ``[0, remaining hose capacity]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .core import CalibrationError, ConfigError, EngineError, RngStream, ScenarioConfig, ScenarioKind

_STD = NormalDist()
BAG_TOL = 1e-12


@dataclass(frozen=True)
class UptakeParams:
    """``grab_mean``/``grab_sd`` are the location and scale of the normal before truncation."""

    blade_open: float = 40.0  # deg
    blade_closed: float = -15.0  # deg
    winch_per_cycle: float = 0.07  # m
    winch_time: float = 2.0  # s
    bag_total: float = 1.0  # m
    hose_inner_diameter: float = 0.0506  # m
    soil_bulk_density: float = 1500.0  # kg/m^3
    grab_mean: float = 17.0  # g
    grab_sd: float = 10.0  # g
    jam_prob: float = 0.15
    moisture: float = 0.20

    def __post_init__(self):
        if self.winch_per_cycle <= 0:
            raise ValueError("winch_per_cycle must be > 0")
        if self.bag_total <= 0:
            raise ValueError("bag_total must be > 0")
        if not 0 <= self.jam_prob <= 1:
            raise ValueError(f"jam_prob must be in [0, 1], got {self.jam_prob}")
        if self.grab_mean <= 0:
            raise ValueError("grab_mean must be > 0")
        if self.grab_sd < 0:
            raise ValueError("grab_sd must be >= 0")
        if self.blade_open <= self.blade_closed:
            raise ValueError("blade_open must exceed blade_closed")
        if self.hose_inner_diameter <= 0 or self.soil_bulk_density < 0:
            raise ValueError("hose_inner_diameter must be > 0 and soil_bulk_density >= 0")
        if not 0 <= self.moisture <= 1:
            raise ValueError("moisture must be in [0, 1]")

    @property
    def nominal_cycles(self) -> int:
        """Jam-free cycles needed to draw the whole bag."""
        return math.ceil(self.bag_total / self.winch_per_cycle - 1e-9)


@dataclass(frozen=True)
class UptakeState:
    bag_drawn: float = 0.0  # m
    soil_total: float = 0.0  # g
    cycles: int = 0
    jams: int = 0


@dataclass(frozen=True)
class CycleOutcome:
    grabbed: float
    jammed: bool
    bag_advance: float


@dataclass(frozen=True)
class UptakeResult:
    total: float
    cycles: int
    mean_per_cycle: float
    outcomes: tuple[CycleOutcome, ...] = field(default=())
    jams: int = 0
    capacity: float = 0.0


def hose_capacity(p: UptakeParams) -> float:
    """Soil mass in grams that fills the hose over the full bag length."""
    area = math.pi * (p.hose_inner_diameter / 2) ** 2
    return area * p.bag_total * p.soil_bulk_density * 1000.0


def _truncated_normal(u: float, mean: float, sd: float, upper: float) -> float:
    if upper <= 0:
        return 0.0
    if sd == 0:
        return min(max(mean, 0.0), upper)
    lo = _STD.cdf((0.0 - mean) / sd)
    hi = _STD.cdf((upper - mean) / sd)
    if hi - lo < 1e-15:
        # all mass far outside the window; fall back to the nearer edge
        return 0.0 if mean < 0 else upper
    q = lo + u * (hi - lo)
    q = min(max(q, 1e-300), 1 - 1e-16)
    return min(max(mean + sd * _STD.inv_cdf(q), 0.0), upper)


def run_cycle(s: UptakeState, p: UptakeParams, rng: RngStream) -> tuple[UptakeState, CycleOutcome]:
    """Advance one intake cycle.

    Jam and grab draws come from the ``jam`` and ``grab`` children of ``rng``; both are
    consumed every cycle so either sequence is independent of the other's outcomes.
    """
    if s.bag_drawn >= p.bag_total - BAG_TOL:
        raise EngineError("soil uptake: bag already fully drawn")
    jam_u = float(rng.child("jam").uniform())
    grab_u = float(rng.child("grab").uniform())
    if jam_u < p.jam_prob:
        out = CycleOutcome(0.0, True, 0.0)
        return UptakeState(s.bag_drawn, s.soil_total, s.cycles + 1, s.jams + 1), out
    room = max(hose_capacity(p) - s.soil_total, 0.0)
    grabbed = _truncated_normal(grab_u, p.grab_mean, p.grab_sd, room)
    advance = min(p.winch_per_cycle, p.bag_total - s.bag_drawn)
    drawn = s.bag_drawn + advance
    if p.bag_total - drawn < BAG_TOL:
        drawn = p.bag_total
    out = CycleOutcome(grabbed, False, advance)
    return UptakeState(drawn, s.soil_total + grabbed, s.cycles + 1, s.jams), out


def expected_cycles(p: UptakeParams) -> float:
    if p.jam_prob >= 1:
        return math.inf
    return p.nominal_cycles / (1 - p.jam_prob)


def simulate(p: UptakeParams, seed: int) -> UptakeResult:
    if p.jam_prob >= 1:
        raise EngineError("soil uptake: jam_prob = 1 never draws the bag in")
    cap = 10 * expected_cycles(p)
    rng = RngStream(seed, "uptake")
    state = UptakeState()
    outcomes = []
    while state.bag_drawn < p.bag_total - BAG_TOL:
        if state.cycles >= cap:
            raise EngineError(f"soil uptake: no termination after {state.cycles} cycles")
        state, out = run_cycle(state, p, rng)
        outcomes.append(out)
    total = math.fsum(o.grabbed for o in outcomes)
    return UptakeResult(
        total=total,
        cycles=state.cycles,
        mean_per_cycle=total / state.cycles,
        outcomes=tuple(outcomes),
        jams=state.jams,
        capacity=hose_capacity(p),
    )


def params_from_config(cfg: ScenarioConfig) -> UptakeParams:
    if cfg.kind is not ScenarioKind.SOIL_UPTAKE:
        raise ConfigError(f"kind: {cfg.kind.value} is not a soil uptake scenario")
    try:
        return UptakeParams(**cfg.section("uptake"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"robot.uptake: {exc}") from exc


def run_experiment(cfg: ScenarioConfig) -> UptakeResult:
    return simulate(params_from_config(cfg), cfg.seed)


def truncated_mean(mean: float, sd: float) -> float:
    """Mean of ``Normal(mean, sd)`` truncated below at zero."""
    if sd == 0:
        return max(mean, 0.0)
    a = -mean / sd
    tail = 1.0 - _STD.cdf(a)
    if tail < 1e-300:
        return 0.0
    return mean + sd * _STD.pdf(a) / tail


def calibrate_uptake(
    table: Sequence[tuple[float, int]],
    base: UptakeParams = UptakeParams(),
) -> UptakeParams:
    """Method-of-moments fit to per-experiment ``(total grams, cycles)`` pairs.

    Cycles beyond the jam-free count are read as jams, pooled over all experiments.
    The per-grab location is then chosen so the zero-truncated grab mean equals the
    pooled soil per successful cycle, and the spread is the dispersion of the
    per-experiment soil-per-cycle averages.
    """
    rows = [(float(t), int(c)) for t, c in table]
    if not rows:
        raise CalibrationError("uptake: empty table")
    if any(t <= 0 or c <= 0 for t, c in rows):
        raise CalibrationError("uptake: totals and cycle counts must be positive")
    nominal = base.nominal_cycles
    total = math.fsum(t for t, _ in rows)
    cycles = sum(c for _, c in rows)
    jams = max(cycles - nominal * len(rows), 0)
    successes = cycles - jams
    jam_prob = jams / cycles
    per_success = total / successes
    grab_sd = float(np.std([t / c for t, c in rows]))

    if grab_sd == 0:
        location = per_success
    else:
        f = lambda m: truncated_mean(m, grab_sd) - per_success
        hi = per_success
        lo = per_success - 10 * grab_sd
        while f(lo) > 0:
            lo -= 10 * grab_sd
        location = brentq(f, lo, hi, xtol=1e-12)
        if location <= 0:
            raise CalibrationError("uptake: fitted grab location is not positive")
    return UptakeParams(**{**base.__dict__, "grab_mean": location, "grab_sd": grab_sd, "jam_prob": jam_prob})


def pooled_mean_per_cycle(results: Sequence[UptakeResult]) -> float:
    return math.fsum(r.total for r in results) / sum(r.cycles for r in results)
