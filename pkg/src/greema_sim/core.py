"""Shared primitives: angle conversion, uniform time series, scenario config, RNG streams."""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

STEP_TOL = 1e-12


class SimError(Exception):
    """Base class for simulator errors."""


class ConfigError(SimError, ValueError):
    pass


class EngineError(SimError, RuntimeError):
    pass


class CalibrationError(SimError, RuntimeError):
    pass


def deg_to_rad(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"angle must be finite, got {x!r}")
    return x * math.pi / 180.0


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled series with ``t[0] == 0``.

    ``unit`` tags the values (``m``, ``m/s``, ``deg``, ``g``, ``N``).
    """

    dt: float
    values: np.ndarray
    name: str = "value"
    unit: str = ""

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a non-empty 1-D sequence")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt

    def __len__(self) -> int:
        return self.values.size


def make_series(dt: float, values: Sequence[float], name: str = "value", unit: str = "") -> TimeSeries:
    return TimeSeries(dt, np.asarray(values, dtype=float), name=name, unit=unit)


def time_average(s: TimeSeries, t_start: float, t_end: float) -> float:
    """Mean of the samples whose time lies in ``[t_start, t_end]`` (inclusive)."""
    t = s.t
    if not (0 <= t_start < t_end):
        raise ValueError(f"bad window [{t_start}, {t_end}]")
    if t_end > t[-1] + STEP_TOL:
        raise ValueError(f"window end {t_end} beyond last sample {t[-1]}")
    mask = (t >= t_start - STEP_TOL) & (t <= t_end + STEP_TOL)
    if not mask.any():
        raise ValueError(f"no samples in window [{t_start}, {t_end}]")
    return float(s.values[mask].mean())


class ScenarioKind(str, enum.Enum):
    SWIM_WITH_MATERIAL = "swim_with_material"
    SWIM_WITHOUT_MATERIAL = "swim_without_material"
    SOIL_UPTAKE = "soil_uptake"
    STIFFNESS_SWEEP = "stiffness_sweep"

    @property
    def is_swim(self) -> bool:
        return self in (ScenarioKind.SWIM_WITH_MATERIAL, ScenarioKind.SWIM_WITHOUT_MATERIAL)


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment run.

    For swim kinds ``duration`` is the recorded swim after the start delay.
    ``robot`` maps section names (``swim``, ``absorption``, ``fin``, ``uptake``,
    ``stiffness``) to parameter overrides.
    """

    kind: ScenarioKind
    seed: int
    duration: float = 60.0
    dt: float = 0.005
    robot: dict[str, dict[str, Any]] = field(default_factory=dict)
    output_dir: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ConfigError(f"duration: must be > 0, got {self.duration!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt: must be > 0, got {self.dt!r}")
        if self.dt > self.duration:
            raise ConfigError(f"dt: must not exceed duration ({self.dt} > {self.duration})")
        if not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed: must be a 64-bit unsigned integer, got {self.seed!r}")

    def section(self, name: str) -> dict[str, Any]:
        return dict(self.robot.get(name, {}))

    def with_kind(self, kind: ScenarioKind | str) -> "ScenarioConfig":
        return ScenarioConfig(ScenarioKind(kind), self.seed, self.duration, self.dt, self.robot, self.output_dir)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return ScenarioConfig(self.kind, seed, self.duration, self.dt, self.robot, self.output_dir)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "seed": self.seed,
            "duration": self.duration,
            "dt": self.dt,
            "robot": {k: dict(v) for k, v in sorted(self.robot.items())},
        }


def _label_key(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")


class RngStream:
    """Named random stream derived from ``(seed, stream_id)``.

    The stream id is hashed into the spawn key of a :class:`numpy.random.SeedSequence`
    driving a counter-based Philox generator, so two ids never share state and the
    sequence for one id does not depend on draws made from any other.
    """

    def __init__(self, seed: int, stream_id: str = "root"):
        self.seed = int(seed)
        self.stream_id = stream_id
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(_label_key(stream_id),))
        self._gen = np.random.Generator(np.random.Philox(ss))
        self._children: dict[str, RngStream] = {}

    def child(self, label: str) -> "RngStream":
        """Sub-stream ``stream_id/label``; repeated calls return the same object."""
        if label not in self._children:
            self._children[label] = RngStream(self.seed, f"{self.stream_id}/{label}")
        return self._children[label]

    def uniform(self, size=None):
        return self._gen.random(size)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id!r})"
