"""Surge dynamics of the water-eating swimmer.

Force balance along the swim direction::

    m(t) dv/dt = 2 F_fin(t) - 0.5 rho CdA v |v|
    F_fin      = 0.5 rho C_f A (r omega)^2 sin(psi_eff) dir

``m(t)`` is the dry mass plus absorbed water, ``psi_eff`` is the fin's effective
angle to the motion axis (set by how much the body has grown) and ``dir`` is +1 on
the power sweep, -1 on recovery and 0 on hold. The integrator is semi-implicit in
the drag term and uses exact per-step fin impulses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import fin
from .absorption import AbsorptionParams, absorbed_mass
from .core import (
    CalibrationError,
    ConfigError,
    RngStream,
    ScenarioConfig,
    ScenarioKind,
    TimeSeries,
    time_average,
)
from .fin import FinSchedule

MAX_DT = 0.01
PSI_MIN = 24.087  # deg, measured without polymer
PSI_MAX = 73.607  # deg, measured with polymer
GROWTH_AT_PSI_MAX = 325.0 / 400.0

# Fitted by calibrate_swim against 0.158 / 0.101 m/s with every other default.
CALIBRATED_THRUST_COEFF = 0.27703729813800954
CALIBRATED_BODY_CDA = 0.0025733436871830284  # m^2


@dataclass(frozen=True)
class SwimParams:
    body_mass_dry: float = 318.0  # g, includes the polymer
    fin_area: float = 0.006  # m^2
    fin_lever: float = 0.08  # m
    water_density: float = 1000.0  # kg/m^3
    body_drag_coeff_area: float = CALIBRATED_BODY_CDA  # m^2
    thrust_coeff: float = CALIBRATED_THRUST_COEFF
    psi_min: float = PSI_MIN  # deg
    psi_max: float = PSI_MAX  # deg
    psi_max_growth: float = GROWTH_AT_PSI_MAX
    droop_exponent: float = 1.0
    swim_start_delay: float = 900.0  # s
    settle_time: float = 10.0  # s discarded before averaging
    fin_wobble: float = 0.75  # fraction of the headroom used by the fin-angle oscillation
    stroke_noise: float = 0.0  # relative sd of per-stroke thrust gain

    def __post_init__(self):
        for name in ("body_mass_dry", "fin_area", "fin_lever", "water_density",
                     "body_drag_coeff_area", "thrust_coeff", "psi_max_growth"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 <= self.psi_min < self.psi_max <= 90:
            raise ValueError("need 0 <= psi_min < psi_max <= 90")
        if self.droop_exponent < 0:
            raise ValueError("droop_exponent must be >= 0")
        if self.swim_start_delay < 0 or self.settle_time < 0:
            raise ValueError("swim_start_delay and settle_time must be >= 0")
        if not 0 <= self.fin_wobble <= 1:
            raise ValueError("fin_wobble must be in [0, 1]")
        if self.stroke_noise < 0:
            raise ValueError("stroke_noise must be >= 0")

    @property
    def thrust_scale(self) -> float:
        """N per (rad/s)^2 for one fin at sin(psi) = 1."""
        return 0.5 * self.water_density * self.thrust_coeff * self.fin_area * self.fin_lever**2

    @property
    def drag_scale(self) -> float:
        """N per (m/s)^2."""
        return 0.5 * self.water_density * self.body_drag_coeff_area


@dataclass(frozen=True)
class SwimState:
    t: float = 0.0
    x: float = 0.0
    v: float = 0.0
    growth: float = 0.0
    theta: float = 40.0


@dataclass(frozen=True)
class SwimResult:
    """Recorded swim, with time measured from the first fin stroke."""

    trajectory: TimeSeries
    velocity: TimeSeries
    fin_angle: TimeSeries
    command: TimeSeries
    growth: TimeSeries
    mass: TimeSeries
    avg_speed: float
    avg_fin_angle: float
    window: tuple[float, float]
    with_material: bool


def effective_fin_angle(growth: float, p: SwimParams) -> float:
    if not 0 <= growth < 1:
        raise ValueError(f"growth must be in [0, 1), got {growth}")
    return float(_psi_eff(np.asarray(growth, dtype=float), p))


def _psi_eff(growth: np.ndarray, p: SwimParams) -> np.ndarray:
    frac = np.minimum(growth / p.psi_max_growth, 1.0)
    # 0 ** 0 would lift an empty body straight to psi_max
    lift = np.where(frac > 0, np.power(np.maximum(frac, 1e-300), p.droop_exponent), 0.0)
    return p.psi_min + (p.psi_max - p.psi_min) * lift


def fin_thrust(theta_rate: float, psi_eff: float, p: SwimParams) -> float:
    """Surge thrust of one fin in N. Negative ``theta_rate`` is the power direction."""
    omega = math.radians(theta_rate)
    direction = -math.copysign(1.0, theta_rate) if theta_rate != 0 else 0.0
    return p.thrust_scale * omega**2 * math.sin(math.radians(psi_eff)) * direction


def body_drag(v: float, p: SwimParams) -> float:
    return -p.drag_scale * v * abs(v)


def _water(t, absorption: AbsorptionParams | None):
    if absorption is None:
        return np.zeros_like(np.asarray(t, dtype=float))
    return absorbed_mass(t, absorption)


def _advance(v, mass, impulse, drag_scale, dt):
    # drag linearised about the old speed: unconditionally stable, exact fixed point
    return (mass * v + impulse) / (mass + dt * drag_scale * np.abs(v))


def step_dynamics(
    s: SwimState,
    dt: float,
    p: SwimParams,
    sched: FinSchedule,
    a: AbsorptionParams | None,
    gains: Sequence[float] | None = None,
) -> SwimState:
    """One integration step. ``a=None`` means no absorbing material on board."""
    if not 0 < dt <= MAX_DT:
        raise ValueError(f"dt must be in (0, {MAX_DT}], got {dt}")
    t0, t1 = s.t, s.t + dt
    water0 = float(_water(t0, a))
    growth0 = water0 / a.capacity if a is not None else 0.0
    mass = (p.body_mass_dry + water0) / 1000.0
    psi = float(_psi_eff(np.asarray(growth0), p))
    delay = p.swim_start_delay
    g = None if gains is None else np.asarray(gains, dtype=float)
    if t1 > delay:
        lo = fin.stroke_integral(np.asarray(max(t0 - delay, 0.0)), sched, g)
        hi = fin.stroke_integral(np.asarray(t1 - delay), sched, g)
        impulse = 2 * p.thrust_scale * math.sin(math.radians(psi)) * float(hi - lo)
    else:
        impulse = 0.0
    v1 = float(_advance(s.v, mass, impulse, p.drag_scale, dt))
    water1 = float(_water(t1, a))
    theta = fin.command_at(t1 - delay, sched) if t1 >= delay else sched.theta_start
    return SwimState(t1, s.x + v1 * dt, v1, water1 / a.capacity if a is not None else 0.0, theta)


@dataclass(frozen=True)
class SwimCase:
    """Everything one swim run needs besides the time grid."""

    params: SwimParams = field(default_factory=SwimParams)
    absorption: AbsorptionParams | None = field(default_factory=AbsorptionParams)
    schedule: FinSchedule = field(default_factory=FinSchedule)
    seed: int = 0

    @property
    def with_material(self) -> bool:
        return self.absorption is not None


def _stroke_gains(case: SwimCase, n_cycles: int) -> np.ndarray | None:
    if case.params.stroke_noise == 0:
        return None
    rng = RngStream(case.seed, "swim/stroke")
    return np.maximum(0.0, 1.0 + case.params.stroke_noise * rng.normal(n_cycles))


def _n_steps(dt: float, duration: float) -> int:
    if not 0 < dt <= MAX_DT:
        raise ConfigError(f"dt: must be in (0, {MAX_DT}] for swim runs, got {dt}")
    n = int(round(duration / dt))
    if abs(n * dt - duration) > 1e-9 * max(1.0, duration):
        raise ConfigError(f"duration: {duration} s is not a whole number of {dt} s steps")
    return n


def _window(p: SwimParams, duration: float) -> tuple[float, float]:
    if p.settle_time >= duration:
        raise ConfigError(f"duration: {duration} s leaves nothing after the {p.settle_time} s settle time")
    return p.settle_time, duration


def _simulate(cases: Sequence[SwimCase], dt: float, duration: float):
    """Batched integration over cases sharing a time grid.

    Returns swim-relative times plus (batch, n+1) arrays of speed, water mass,
    growth and dynamic mass in kg.
    """
    n = _n_steps(dt, duration)
    tau = np.arange(n + 1) * dt
    b = len(cases)
    water = np.empty((b, n + 1))
    growth = np.empty((b, n + 1))
    impulse = np.empty((b, n))
    drag = np.empty(b)
    for i, case in enumerate(cases):
        p = case.params
        water[i] = _water(p.swim_start_delay + tau, case.absorption)
        growth[i] = water[i] / case.absorption.capacity if case.with_material else 0.0
        period = fin.cycle_period(case.schedule)
        gains = _stroke_gains(case, int(math.floor(duration / period)) + 2)
        strokes = np.diff(fin.stroke_integral(tau, case.schedule, gains))
        sin_psi = np.sin(np.radians(_psi_eff(growth[i, :-1], p)))
        impulse[i] = 2 * p.thrust_scale * sin_psi * strokes
        drag[i] = p.drag_scale
    mass = (np.array([c.params.body_mass_dry for c in cases])[:, None] + water) / 1000.0

    v = np.zeros((b, n + 1))
    vel = np.zeros(b)
    # transpose once so each step reads a contiguous row
    mass_t = np.ascontiguousarray(mass[:, :-1].T)
    imp_t = np.ascontiguousarray(impulse.T)
    drag_dt = drag * dt
    out = np.empty((n, b))
    for k in range(n):
        vel = (mass_t[k] * vel + imp_t[k]) / (mass_t[k] + drag_dt * np.abs(vel))
        out[k] = vel
    v[:, 1:] = out.T
    return tau, v, water, growth, mass


def _fin_angle_display(tau, growth, case: SwimCase) -> np.ndarray:
    """Fin angle to the motion axis: effective angle plus a zero-mean stroke wobble."""
    p, sched = case.params, case.schedule
    psi = _psi_eff(growth, p)
    theta = fin.commands(tau, sched)
    centre = fin.mean_command(sched)
    span = sched.theta_start - centre
    shape = (theta - centre) / span if span > 0 else np.zeros_like(theta)
    # shape spans [-(centre - theta_end)/span, 1]; keep the angle inside [0, 90]
    lo = (centre - sched.theta_end) / span if span > 0 else 0.0
    headroom = np.minimum(psi / max(lo, 1e-12), 90.0 - psi)
    return psi + p.fin_wobble * headroom * shape


def simulate_cases(cases: Sequence[SwimCase], dt: float, duration: float) -> list[SwimResult]:
    tau, v, water, growth, mass = _simulate(cases, dt, duration)
    results = []
    for i, case in enumerate(cases):
        p = case.params
        window = _window(p, duration)
        x = np.concatenate([[0.0], np.cumsum(v[i, 1:]) * dt])
        angle = _fin_angle_display(tau, growth[i], case)
        velocity = TimeSeries(dt, v[i], "v", "m/s")
        fin_angle = TimeSeries(dt, angle, "fin_angle", "deg")
        results.append(SwimResult(
            trajectory=TimeSeries(dt, x, "x", "m"),
            velocity=velocity,
            fin_angle=fin_angle,
            command=TimeSeries(dt, fin.commands(tau, case.schedule), "theta_cmd", "deg"),
            growth=TimeSeries(dt, growth[i], "growth", "1"),
            mass=TimeSeries(dt, mass[i] * 1000.0, "mass", "g"),
            avg_speed=time_average(velocity, *window),
            avg_fin_angle=time_average(fin_angle, *window),
            window=window,
            with_material=case.with_material,
        ))
    return results


def average_speeds(cases: Sequence[SwimCase], dt: float, duration: float, chunk: int = 256) -> np.ndarray:
    """Windowed mean speeds for many cases without keeping the series."""
    out = np.empty(len(cases))
    for start in range(0, len(cases), chunk):
        part = cases[start:start + chunk]
        tau, v, *_ = _simulate(part, dt, duration)
        for j, case in enumerate(part):
            lo, hi = _window(case.params, duration)
            mask = (tau >= lo - 1e-12) & (tau <= hi + 1e-12)
            out[start + j] = v[j, mask].mean()
    return out


def case_from_config(cfg: ScenarioConfig) -> SwimCase:
    if not cfg.kind.is_swim:
        raise ConfigError(f"kind: {cfg.kind.value} is not a swim scenario")
    try:
        params = SwimParams(**cfg.section("swim"))
        schedule = FinSchedule(**cfg.section("fin"))
        absorption = AbsorptionParams(**cfg.section("absorption"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.kind is ScenarioKind.SWIM_WITHOUT_MATERIAL:
        absorption = None
    return SwimCase(params, absorption, schedule, cfg.seed)


def run_swim(cfg: ScenarioConfig) -> SwimResult:
    return simulate_cases([case_from_config(cfg)], cfg.dt, cfg.duration)[0]


def run_swim_many(cfgs: Sequence[ScenarioConfig]) -> list[SwimResult]:
    if not cfgs:
        return []
    grid = {(c.dt, c.duration) for c in cfgs}
    if len(grid) != 1:
        return [run_swim(c) for c in cfgs]
    return simulate_cases([case_from_config(c) for c in cfgs], cfgs[0].dt, cfgs[0].duration)


def steady_speed(thrust: float, p: SwimParams) -> float:
    """Speed at which body drag balances a constant total thrust."""
    return math.copysign(math.sqrt(abs(thrust) / p.drag_scale), thrust)


def speed_ratio_closed_form(p: SwimParams = SwimParams()) -> float:
    """Heavy-body limit of the with/without speed ratio: sqrt(sin psi_max / sin psi_min)."""
    return math.sqrt(math.sin(math.radians(p.psi_max)) / math.sin(math.radians(p.psi_min)))


def _with_scales(p: SwimParams, thrust_scale: float, drag_scale: float) -> SwimParams:
    geometry = 0.5 * p.water_density * p.fin_area * p.fin_lever**2
    return replace(
        p,
        thrust_coeff=float(thrust_scale / geometry),
        body_drag_coeff_area=float(2.0 * drag_scale / p.water_density),
    )


def calibrate_swim(
    targets: dict[str, float],
    p: SwimParams = SwimParams(),
    absorption: AbsorptionParams = AbsorptionParams(),
    schedule: FinSchedule = FinSchedule(),
    dt: float = 0.005,
    duration: float = 60.0,
    seed: int = 0,
    tol: float = 0.01,
) -> SwimParams:
    """Fit the thrust coefficient and body drag area to the two mean speeds.

    With thrust scale ``T`` and drag scale ``c``, speeds scale exactly with
    ``sqrt(T/c)`` while ``sqrt(T*c)`` alone sets how much inertia smooths the stroke
    ripple, and therefore the with/without speed ratio. So the fit is a 1-D root
    search on ``sqrt(T*c)`` for the ratio followed by a closed-form rescale.
    """
    v_with, v_without = float(targets["v_with"]), float(targets["v_without"])
    if not (v_with > 0 and v_without > 0):
        raise CalibrationError("swim: target speeds must be positive")
    if v_with <= v_without:
        raise CalibrationError(
            f"swim: with-material target {v_with} m/s must exceed without-material {v_without} m/s"
        )
    target_ratio = v_with / v_without

    def pair(betas: np.ndarray) -> np.ndarray:
        cases = []
        for beta in betas:
            q = _with_scales(p, beta, beta)
            cases.append(SwimCase(q, absorption, schedule, seed))
            cases.append(SwimCase(q, None, schedule, seed))
        return average_speeds(cases, dt, duration).reshape(-1, 2)

    log_betas = np.linspace(-5.0, 2.0, 57)
    speeds = pair(np.exp(log_betas))
    resid = speeds[:, 0] / speeds[:, 1] - target_ratio
    crossings = np.nonzero(np.sign(resid[:-1]) * np.sign(resid[1:]) < 0)[0]
    if crossings.size == 0:
        raise CalibrationError(
            f"swim: no inertia scale reproduces speed ratio {target_ratio:.4f} "
            f"(model spans {np.nanmin(speeds[:, 0] / speeds[:, 1]):.4f}.."
            f"{np.nanmax(speeds[:, 0] / speeds[:, 1]):.4f})"
        )
    # several crossings: keep the one with the fastest swimmer, nearest the force-balance plateau
    best = max(crossings, key=lambda i: speeds[i, 0])
    lo, hi = log_betas[best], log_betas[best + 1]

    def f(log_beta):
        s = pair(np.array([math.exp(log_beta)]))[0]
        return s[0] / s[1] - target_ratio

    try:
        log_beta = brentq(f, lo, hi, xtol=1e-12, rtol=1e-12, maxiter=100)
    except (RuntimeError, ValueError) as exc:
        raise CalibrationError(f"swim: ratio search did not converge: {exc}") from exc
    beta = math.exp(log_beta)
    u_with = float(pair(np.array([beta]))[0, 0])
    scale = v_with / u_with
    fitted = _with_scales(p, beta * scale, beta / scale)

    check = average_speeds(
        [SwimCase(fitted, absorption, schedule, seed), SwimCase(fitted, None, schedule, seed)], dt, duration
    )
    for got, want in zip(check, (v_with, v_without)):
        if abs(got - want) > tol * want:
            raise CalibrationError(f"swim: residual {abs(got - want) / want:.3%} exceeds {tol:.0%}")
    return fitted
