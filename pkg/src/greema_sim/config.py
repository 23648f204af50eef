"""Strict JSON scenario configs: unknown keys are errors, defaults are filled in."""
from __future__ import annotations

import dataclasses
import json
import numbers
from pathlib import Path
from typing import Any

from .absorption import AbsorptionParams
from .core import ConfigError, ScenarioConfig, ScenarioKind
from .fin import FinSchedule
from .stiffness import StiffnessParams
from .swim import SwimParams
from .uptake import UptakeParams

DEFAULT_DT = 0.005
DEFAULT_DURATION = 60.0

TOP_LEVEL = {"kind", "seed", "duration", "dt", "robot", "output_dir"}

SECTIONS: dict[ScenarioKind, dict[str, type]] = {
    ScenarioKind.SWIM_WITH_MATERIAL: {"swim": SwimParams, "absorption": AbsorptionParams, "fin": FinSchedule},
    ScenarioKind.SWIM_WITHOUT_MATERIAL: {"swim": SwimParams, "absorption": AbsorptionParams, "fin": FinSchedule},
    ScenarioKind.SOIL_UPTAKE: {"uptake": UptakeParams},
    ScenarioKind.STIFFNESS_SWEEP: {"stiffness": StiffnessParams},
}


def _number(where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return value


def validate(raw: Any) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = sorted(set(raw) - TOP_LEVEL)
    if unknown:
        raise ConfigError(f"config: unknown key {unknown[0]!r}")
    for key in ("kind", "seed"):
        if key not in raw:
            raise ConfigError(f"config: missing required key {key!r}")
    try:
        kind = ScenarioKind(raw["kind"])
    except ValueError:
        choices = ", ".join(k.value for k in ScenarioKind)
        raise ConfigError(f"kind: {raw['kind']!r} is not one of {choices}") from None
    seed = raw["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")

    robot = raw.get("robot", {})
    if not isinstance(robot, dict):
        raise ConfigError("robot: expected an object")
    allowed = SECTIONS[kind]
    resolved: dict[str, dict[str, Any]] = {}
    for name, block in robot.items():
        if name not in allowed:
            raise ConfigError(f"robot: unknown key {name!r} for kind {kind.value}")
        if not isinstance(block, dict):
            raise ConfigError(f"robot.{name}: expected an object")
        fields = {f.name for f in dataclasses.fields(allowed[name])}
        for key, value in block.items():
            if key not in fields:
                raise ConfigError(f"robot.{name}: unknown key {key!r}")
            _number(f"robot.{name}.{key}", value)
        try:
            allowed[name](**block)
        except ValueError as exc:
            raise ConfigError(f"robot.{name}: {exc}") from exc
        resolved[name] = dict(sorted(block.items()))

    out = raw.get("output_dir")
    return ScenarioConfig(
        kind=kind,
        seed=seed,
        duration=float(_number("duration", raw.get("duration", DEFAULT_DURATION))),
        dt=float(_number("dt", raw.get("dt", DEFAULT_DT))),
        robot=resolved,
        output_dir=Path(out) if out is not None else None,
    )


def parse_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return validate(raw)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def default_config(kind: ScenarioKind | str, seed: int = 0) -> ScenarioConfig:
    return validate({"kind": ScenarioKind(kind).value, "seed": seed})
