"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, echoed in the terminal summary.
"""
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from greema_sim import fin, stiffness as stf, swim, uptake
from greema_sim.absorption import AbsorptionParams, AbsorptionState, absorbed_mass, calibrate_rate, step
from greema_sim.analysis import MarkerTrack, SegmentTrack, fin_angle_series, velocity_series
from greema_sim.config import parse_config, validate
from greema_sim.fin import FinSchedule
from greema_sim.golden import compare_golden
from greema_sim.runner import UPTAKE_TRIALS, run_scenario, run_swim_pair
from greema_sim.swim import SwimCase, SwimParams
from greema_sim.uptake import UptakeParams

ROOT = Path(__file__).resolve().parents[1]
N_SAMPLES = 10_000
V_WITH, V_WITHOUT = 0.158, 0.101
PSI_WITH, PSI_WITHOUT = 73.607, 24.087


def test_fin_schedule(verdict):
    s = FinSchedule()
    period = fin.cycle_period(s)
    t = np.random.default_rng(1).uniform(0.0, 1000.0, N_SAMPLES)
    base = fin.commands(t, s)
    shifted = fin.commands(t + period, s)
    eps = 1e-6
    jump = np.abs(fin.commands(t + eps, s) - base)
    dense = fin.commands(np.linspace(0.0, 3 * period, 300_001), s)
    scalar_ok = all(fin.command_at(x, s) == pytest.approx(y, abs=1e-9) for x, y in zip(t[:500], base[:500]))
    ok = (
        abs(period - 11 / 6) <= 1e-9
        and dense.min() == -60.0 and dense.max() == 40.0
        and np.all((base >= -60.0) & (base <= 40.0))
        and np.max(np.abs(shifted - base)) <= 1e-9
        and np.max(jump) <= 300.0 * eps + 1e-9
        and scalar_ok
    )
    verdict("1 fin schedule", ok,
            f"period={period!r}, range=[{dense.min()}, {dense.max()}], "
            f"max periodicity err={np.max(np.abs(shifted - base)):.2e} deg, "
            f"max jump over 1us={np.max(jump):.2e} deg ({N_SAMPLES} instants)")


def test_absorption(verdict):
    rate = calibrate_rate(325.0, 900.0, 400.0)
    a = AbsorptionParams(capacity=400.0, rate=rate)
    m900 = float(absorbed_mass(900.0, a))
    total = SwimParams().body_mass_dry + m900
    rng = np.random.default_rng(2)
    t1, t2 = np.sort(rng.uniform(0, 1e4, (2, N_SAMPLES)), axis=0)
    monotone = bool(np.all(absorbed_mass(t2, a) >= absorbed_mass(t1, a)))
    t0, da, db = rng.uniform(0, 5e3, (3, 1000))
    semigroup = max(
        abs(step(step(AbsorptionState(x, absorbed_mass(x, a)), u, a), w, a).water_mass
            - step(AbsorptionState(x, absorbed_mass(x, a)), u + w, a).water_mass)
        for x, u, w in zip(t0, da + 1e-3, db + 1e-3)
    )
    ok = abs(m900 - 325.0) <= 1e-6 and abs(total - 643.0) <= 0.5 and monotone and semigroup <= 1e-9
    verdict("2 absorption", ok,
            f"k={rate:.6e} 1/s, m(900 s)={m900:.9f} g, robot mass={total:.3f} g, "
            f"monotone={monotone}, max semigroup err={semigroup:.1e} g")


@pytest.fixture(scope="module")
def calibrated():
    return swim.calibrate_swim({"v_with": V_WITH, "v_without": V_WITHOUT})


def test_swim_calibration(verdict, calibrated):
    a = AbsorptionParams()
    res = swim.simulate_cases([SwimCase(calibrated, a), SwimCase(calibrated, None)], 0.005, 60.0)
    v_with, v_without = res[0].avg_speed, res[1].avg_speed
    resid = max(abs(v_with - V_WITH) / V_WITH, abs(v_without - V_WITHOUT) / V_WITHOUT)

    # +-20% on every parameter the fit leaves alone
    perturbed = []
    names = ["body_mass_dry", "water_density", "droop_exponent", "fin_wobble", "swim_start_delay", "settle_time"]
    for name in names:
        for f in (0.8, 1.2):
            perturbed.append((name, f, replace(calibrated, **{name: getattr(calibrated, name) * f}), a))
    for name in ("capacity", "rate"):
        for f in (0.8, 1.2):
            perturbed.append((name, f, calibrated, replace(a, **{name: getattr(a, name) * f})))
    cases = []
    for _, _, p, ab in perturbed:
        cases += [SwimCase(p, ab), SwimCase(p, None)]
    speeds = swim.average_speeds(cases, 0.005, 60.0).reshape(-1, 2)
    band = np.max(np.abs(speeds / [V_WITH, V_WITHOUT] - 1))
    worst = perturbed[int(np.argmax(np.max(np.abs(speeds / [V_WITH, V_WITHOUT] - 1), axis=1)))]

    angle_err = max(abs(res[0].avg_fin_angle - PSI_WITH), abs(res[1].avg_fin_angle - PSI_WITHOUT))
    ok = resid < 0.01 and band <= 0.10 and angle_err <= 2.0
    verdict("3 swim calibration", ok,
            f"speeds {v_with:.5f}/{v_without:.5f} m/s (residual {resid:.2%}), "
            f"worst of {len(perturbed)} perturbations {band:.2%} ({worst[0]} x{worst[1]}), "
            f"fin angles {res[0].avg_fin_angle:.3f}/{res[1].avg_fin_angle:.3f} deg")


def test_comparative_ordering(verdict):
    # documented draw ranges; seeds act through per-stroke thrust noise
    rng = np.random.default_rng(20240)
    base, a0 = SwimParams(), AbsorptionParams()
    cases = []
    for _ in range(100):
        p = replace(
            base,
            body_mass_dry=base.body_mass_dry * rng.uniform(0.8, 1.2),
            thrust_coeff=base.thrust_coeff * math.exp(rng.uniform(-math.log(2), math.log(2))),
            body_drag_coeff_area=base.body_drag_coeff_area * math.exp(rng.uniform(-math.log(2), math.log(2))),
            droop_exponent=rng.uniform(0.0, 3.0),
            stroke_noise=rng.uniform(0.0, 0.1),
            water_density=base.water_density * rng.uniform(0.8, 1.2),
        )
        a = replace(a0, capacity=rng.uniform(350.0, 1000.0), rate=a0.rate * rng.uniform(0.8, 1.2))
        for seed in range(10):
            cases += [SwimCase(p, a, seed=seed), SwimCase(p, None, seed=seed)]
    v = swim.average_speeds(cases, 0.005, 60.0).reshape(-1, 2)
    wins = int(np.sum(v[:, 0] > v[:, 1]))
    verdict("4 comparative ordering", wins == len(v),
            f"with-material faster in {wins}/{len(v)} runs, min ratio {np.min(v[:, 0] / v[:, 1]):.3f}")


def test_model_consistency(verdict, calibrated):
    closed = swim.speed_ratio_closed_form()
    measured = V_WITH / V_WITHOUT
    v = swim.average_speeds([SwimCase(calibrated, AbsorptionParams()), SwimCase(calibrated, None)], 0.005, 60.0)
    sim = v[0] / v[1]
    ok = abs(closed - 1.533) < 5e-4 and abs(closed / measured - 1) <= 0.05 and 1.45 <= sim <= 1.65
    verdict("5 model consistency", ok,
            f"closed form {closed:.4f} vs measured {measured:.4f} ({abs(closed / measured - 1):.2%}), simulated {sim:.4f}")


def test_soil_uptake(verdict):
    free = uptake.simulate(replace(UptakeParams(), jam_prob=0.0), 0)
    fit = uptake.calibrate_uptake(UPTAKE_TRIALS)
    runs = [uptake.simulate(fit, seed) for seed in range(1000)]
    pooled = uptake.pooled_mean_per_cycle(runs)
    totals = np.array([r.total for r in runs])
    inside = float(np.mean((totals >= 50) & (totals <= 600)))
    conserved = all(r.total == math.fsum(o.grabbed for o in r.outcomes) for r in runs)
    capped = all(r.total <= r.capacity for r in runs)
    target = 1460 / 86
    ok = free.cycles == 15 and abs(pooled / target - 1) <= 0.05 and inside >= 0.95 and conserved and capped
    verdict("6 soil uptake", ok,
            f"jam-free cycles={free.cycles}, pooled mean {pooled:.3f} g vs {target:.3f} g "
            f"({abs(pooled / target - 1):.2%}), {inside:.1%} of totals in [50, 600] g "
            f"(range {totals.min():.0f}-{totals.max():.0f} g), conservation={conserved}")


def test_stiffness_orderings(verdict):
    p = stf.StiffnessParams()
    k = lambda w, rep=1, q=p: stf.effective_stiffness(True, w, rep, q)
    empty = stf.effective_stiffness(False, 0.0, 1, p)
    checks = {
        "11%>0%": k(0.11) > k(0.0),
        "11%>20%": k(0.11) > k(0.20),
        "filled>empty": all(k(w) > empty for w in (0.0, 0.11, 0.20)),
    }
    for deg in (0.5, 0.9, 0.99):
        q = replace(p, degradation=deg)
        checks[f"decay@{deg}"] = all(k(w, 1, q) > k(w, 2, q) > k(w, 3, q) for w in (0.0, 0.11, 0.20))
    verdict("7 stiffness orderings", all(checks.values()), ", ".join(f"{n}={v}" for n, v in checks.items()))


def test_analysis_oracle(verdict):
    dt = 0.01
    t = np.arange(0, 5 + dt / 2, dt)
    motions = {
        "linear": (0.158 * t, np.full_like(t, 0.158)),
        "quadratic": (0.05 * t**2, 0.1 * t),
        "sinusoidal": (0.1 * np.sin(2 * np.pi * t), 0.2 * np.pi * np.cos(2 * np.pi * t)),
    }
    errs = {n: float(np.max(np.abs(velocity_series(MarkerTrack(t, x)).values - dv))) for n, (x, dv) in motions.items()}
    origin = MarkerTrack([0.0, dt], [0.0, 0.0], [0.0, 0.0])
    angles = {}
    for deg, (bx, by) in {0: (1, 0), 45: (1, 1), 90: (0, 1)}.items():
        tip = MarkerTrack([0.0, dt], [bx, bx], [by, by])
        angles[deg] = fin_angle_series(SegmentTrack(origin, tip)).values
    exact = all(np.all(v == deg) for deg, v in angles.items())
    ok = all(e <= 1e-3 for e in errs.values()) and exact
    verdict("8 analysis oracle", ok,
            ", ".join(f"{n} max err {e:.1e} m/s" for n, e in errs.items()) + f", canonical angles exact={exact}")


def test_determinism_and_goldens(verdict, tmp_path):
    identical = {}
    for raw in ({"kind": "swim_with_material", "seed": 1, "dt": 0.01, "duration": 20.0},
                {"kind": "soil_uptake", "seed": 7},
                {"kind": "stiffness_sweep", "seed": 0}):
        cfg = validate(raw)
        a, b = tmp_path / cfg.kind.value / "a", tmp_path / cfg.kind.value / "b"
        run_scenario(cfg, a)
        run_scenario(cfg, b)
        files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        identical[cfg.kind.value] = bool(files) and all((a / f).read_bytes() == (b / f).read_bytes() for f in files)

    run_swim_pair(parse_config(ROOT / "configs" / "swim_reference.json"), tmp_path / "pair")
    run_scenario(parse_config(ROOT / "configs" / "soil_reference.json"), tmp_path / "soil")
    reports = {
        "swim_pair": compare_golden(tmp_path / "pair", ROOT / "tests" / "golden" / "swim_pair"),
        "soil": compare_golden(tmp_path / "soil", ROOT / "tests" / "golden" / "soil"),
    }
    for r in reports.values():
        for line in r.lines():
            print(line)
    ok = all(identical.values()) and all(r.ok and r.compared for r in reports.values())
    verdict("9 determinism", ok,
            f"byte-identical reruns {identical}, goldens "
            + ", ".join(f"{n}: {len(r.compared)} files {'ok' if r.ok else 'FAILED'}" for n, r in reports.items()))
