"""Superabsorbent-polymer water uptake as a first-order saturation law.

Absorbed water follows ``m(t) = C_eff * (1 - exp(-k t))`` where ``C_eff`` is the
bag-limited capacity (well below what the polymer could hold on its own).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CalibrationError

#: Mass absorbed during the 15 minute soak before swimming (643 g - 318 g).
SOAK_MASS = 325.0
SOAK_TIME = 900.0
DEFAULT_CAPACITY = 400.0


def calibrate_rate(target_mass: float, target_time: float, capacity: float) -> float:
    """Rate constant that puts ``target_mass`` in the bag at ``target_time``."""
    if target_time <= 0:
        raise CalibrationError(f"absorption: target_time must be > 0, got {target_time}")
    if capacity <= 0:
        raise CalibrationError(f"absorption: capacity must be > 0, got {capacity}")
    if not (0 < target_mass < capacity):
        raise CalibrationError(
            f"absorption: target mass {target_mass} g is unreachable with capacity {capacity} g"
        )
    return math.log(capacity / (capacity - target_mass)) / target_time


DEFAULT_RATE = calibrate_rate(SOAK_MASS, SOAK_TIME, DEFAULT_CAPACITY)


@dataclass(frozen=True)
class AbsorptionParams:
    sap_mass: float = 15.0  # g
    capacity: float = DEFAULT_CAPACITY  # g, bag-limited
    rate: float = DEFAULT_RATE  # 1/s
    intrinsic_capacity_per_gram: float = 300.0  # ml/g
    intrinsic_time: float = 80.0  # s to reach the intrinsic capacity

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError("capacity must be > 0")
        if self.rate <= 0:
            raise ValueError("rate must be > 0")
        if self.sap_mass <= 0:
            raise ValueError("sap_mass must be > 0")
        if self.capacity > self.sap_mass * self.intrinsic_capacity_per_gram:
            raise ValueError(
                f"capacity {self.capacity} g exceeds what {self.sap_mass} g of polymer can hold "
                f"({self.sap_mass * self.intrinsic_capacity_per_gram} g)"
            )


@dataclass(frozen=True)
class AbsorptionState:
    t: float = 0.0
    water_mass: float = 0.0


def absorbed_mass(t, p: AbsorptionParams):
    """Water held at time ``t`` (scalar or array). Rejects negative times."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("t must be >= 0")
    out = -p.capacity * np.expm1(-p.rate * arr)
    return float(out) if out.ndim == 0 else out


def growth_fraction(s: AbsorptionState, p: AbsorptionParams) -> float:
    return s.water_mass / p.capacity


def step(s: AbsorptionState, dt: float, p: AbsorptionParams) -> AbsorptionState:
    # exact update: the deficit to capacity decays by exp(-k dt)
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    deficit = p.capacity - s.water_mass
    return AbsorptionState(s.t + dt, p.capacity - deficit * math.exp(-p.rate * dt))
