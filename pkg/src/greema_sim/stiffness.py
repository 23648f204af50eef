"""Bending stiffness of the hose arm with and without a soil-filled bag.

Filling raises stiffness by a moisture-dependent gain that peaks at an intermediate
water content; every repeated loading of a filled hose loses a constant fraction.
Defaults are placeholders chosen only to respect the measured orderings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SWEEP_MOISTURES = (0.0, 0.11, 0.20)
SWEEP_REPETITIONS = 5


@dataclass(frozen=True)
class StiffnessParams:
    k_empty: float = 0.05  # N/mm
    fill_gain: float = 2.0
    moisture_peak: float = 0.11
    moisture_width: float = 0.10
    degradation: float = 0.9  # per repeated loading
    lever: float = 300.0  # mm from the fixed section
    max_deflection: float = 60.0  # mm, end of the linear range

    def __post_init__(self):
        if self.k_empty <= 0:
            raise ValueError("k_empty must be > 0")
        if self.fill_gain < 0:
            raise ValueError("fill_gain must be >= 0")
        if not 0 <= self.moisture_peak <= 1:
            raise ValueError("moisture_peak must be in [0, 1]")
        if self.moisture_width <= 0:
            raise ValueError("moisture_width must be > 0")
        if not 0 < self.degradation <= 1:
            raise ValueError("degradation must be in (0, 1]")
        if self.lever <= 0 or self.max_deflection <= 0:
            raise ValueError("lever and max_deflection must be > 0")


@dataclass(frozen=True)
class StiffnessCurve:
    displacement: np.ndarray  # mm
    load: np.ndarray  # N


def moisture_factor(w: float, p: StiffnessParams) -> float:
    if not 0 <= w <= 1:
        raise ValueError(f"moisture must be in [0, 1], got {w}")
    return math.exp(-(((w - p.moisture_peak) / p.moisture_width) ** 2))


def effective_stiffness(filled: bool, w: float, repetition: int, p: StiffnessParams) -> float:
    if repetition < 1:
        raise ValueError(f"repetition counts from 1, got {repetition}")
    if not filled:
        return p.k_empty
    return p.k_empty * (1 + p.fill_gain * moisture_factor(w, p)) * p.degradation ** (repetition - 1)


def load_displacement(delta, k: float, max_deflection: float = StiffnessParams.max_deflection):
    """Linearised load (N) at deflection ``delta`` (mm)."""
    d = np.asarray(delta, dtype=float)
    if np.any(d < 0):
        raise ValueError("deflection must be >= 0")
    if np.any(d > max_deflection):
        raise ValueError(f"deflection beyond the {max_deflection} mm linear range")
    out = k * d
    return float(out) if out.ndim == 0 else out


def curve(k: float, p: StiffnessParams, n: int = 13) -> StiffnessCurve:
    d = np.linspace(0.0, p.max_deflection, n)
    return StiffnessCurve(d, load_displacement(d, k, p.max_deflection))


def sweep(p: StiffnessParams, moistures=SWEEP_MOISTURES, repetitions: int = SWEEP_REPETITIONS) -> list[dict]:
    """Empty hose plus each moisture, each loaded ``repetitions`` times."""
    conditions = [("empty", False, None)] + [(f"filled_{round(w * 100):d}pct", True, w) for w in moistures]
    rows = []
    for name, filled, w in conditions:
        for rep in range(1, repetitions + 1):
            rows.append({
                "condition": name,
                "filled": filled,
                "moisture": w,
                "repetition": rep,
                "k": effective_stiffness(filled, 0.0 if w is None else w, rep, p),
            })
    return rows
