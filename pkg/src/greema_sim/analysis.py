"""Tracking-style post-processing: speeds from marker tracks, fin angles from segments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import STEP_TOL, TimeSeries, time_average


@dataclass(frozen=True)
class MarkerTrack:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        x = np.asarray(self.x, dtype=float)
        y = np.zeros_like(x) if self.y is None else np.asarray(self.y, dtype=float)
        if not (t.shape == x.shape == y.shape) or t.ndim != 1:
            raise ValueError("t, x and y must be aligned 1-D arrays")
        if t.size >= 2:
            steps = np.diff(t)
            if steps[0] <= 0 or np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, t[-1]):
                raise ValueError("marker track must be uniformly sampled")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


@dataclass(frozen=True)
class SegmentTrack:
    a: MarkerTrack
    b: MarkerTrack

    def __post_init__(self):
        if self.a.t.shape != self.b.t.shape or np.any(np.abs(self.a.t - self.b.t) > STEP_TOL):
            raise ValueError("segment endpoints must share a time base")


def velocity_series(m: MarkerTrack) -> TimeSeries:
    """Speed along x: central differences inside, one-sided at the ends.

    The end stencils are second order when there are at least three samples, so a
    quadratic track is differentiated exactly everywhere.
    """
    if m.t.size < 2:
        raise ValueError("need at least two samples")
    edge = 2 if m.t.size >= 3 else 1
    return TimeSeries(m.dt, np.gradient(m.x, m.dt, edge_order=edge), "v", "m/s")


def fin_angle_series(s: SegmentTrack) -> TimeSeries:
    """Angle between segment AB and the x axis, folded into [0, 90] deg."""
    dx = s.b.x - s.a.x
    dy = s.b.y - s.a.y
    if np.any(np.hypot(dx, dy) == 0):
        raise ValueError("segment endpoints coincide")
    ang = np.degrees(np.abs(np.arctan2(dy, dx)))
    ang = np.where(ang > 90.0, 180.0 - ang, ang)
    dt = s.a.dt if s.a.t.size >= 2 else 1.0
    return TimeSeries(dt, ang, "fin_angle", "deg")


def summarize_swim(velocity: TimeSeries, angle: TimeSeries, window: tuple[float, float]) -> dict[str, float]:
    return {
        "avg_speed": time_average(velocity, *window),
        "avg_angle": time_average(angle, *window),
    }


def segment_from_angle(anchor: MarkerTrack, angle_deg, length: float = 0.1) -> SegmentTrack:
    """Fin long-side endpoints for a given angle to the motion axis (side view)."""
    rad = np.radians(np.asarray(angle_deg, dtype=float))
    tip = MarkerTrack(anchor.t, anchor.x + length * np.cos(rad), anchor.y + length * np.sin(rad))
    return SegmentTrack(anchor, tip)


def track_from_series(x: TimeSeries) -> MarkerTrack:
    return MarkerTrack(x.t, x.values)
