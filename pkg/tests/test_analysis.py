import numpy as np
import pytest
from hypothesis import given, strategies as st

from greema_sim.analysis import (
    MarkerTrack,
    SegmentTrack,
    fin_angle_series,
    segment_from_angle,
    summarize_swim,
    velocity_series,
)
from greema_sim.core import make_series


def _track(dt, n, f):
    t = np.arange(n) * dt
    return MarkerTrack(t, f(t))


def test_velocity_examples():
    np.testing.assert_allclose(velocity_series(_track(0.1, 20, lambda t: t)).values, 1.0, atol=1e-12)
    assert np.all(velocity_series(_track(0.1, 20, lambda t: 0 * t)).values == 0)
    v = velocity_series(_track(0.1, 21, lambda t: t**2))
    assert v.values[10] == pytest.approx(2.0, abs=1e-12)
    assert len(v) == 21


def test_velocity_needs_two_samples():
    with pytest.raises(ValueError):
        velocity_series(MarkerTrack([0.0], [1.0]))


def test_non_uniform_track_rejected():
    with pytest.raises(ValueError):
        MarkerTrack([0.0, 0.1, 0.3], [0, 0, 0])


def _seg(bx, by):
    a = MarkerTrack([0.0, 1.0], [0.0, 0.0], [0.0, 0.0])
    b = MarkerTrack([0.0, 1.0], [bx, bx], [by, by])
    return SegmentTrack(a, b)


@pytest.mark.parametrize("bx, by, deg", [(1, 0, 0.0), (0, 1, 90.0), (1, 1, 45.0), (-1, 1, 45.0), (-1, 0, 0.0)])
def test_fin_angle_canonical(bx, by, deg):
    np.testing.assert_allclose(fin_angle_series(_seg(bx, by)).values, deg, atol=1e-12)


def test_coincident_endpoints():
    with pytest.raises(ValueError):
        fin_angle_series(_seg(0, 0))


def test_summarize_swim():
    v = make_series(0.1, [0.158] * 11)
    a = make_series(0.1, [73.607] * 11)
    s = summarize_swim(v, a, (0.0, 1.0))
    assert s["avg_speed"] == pytest.approx(0.158)
    assert s["avg_angle"] == pytest.approx(73.607)
    halves = make_series(0.1, [0.1] * 5 + [0.2] * 5)
    assert summarize_swim(halves, halves, (0.0, 0.9))["avg_speed"] == pytest.approx(0.15)


def test_segment_round_trip():
    anchor = _track(0.01, 100, lambda t: 0.1 * t)
    angles = np.linspace(0, 90, 100)
    np.testing.assert_allclose(fin_angle_series(segment_from_angle(anchor, angles)).values, angles, atol=1e-9)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_angle_folding(ax, ay, bx, by):
    if np.hypot(bx - ax, by - ay) < 1e-6:
        return
    a = MarkerTrack([0.0, 1.0], [ax, ax], [ay, ay])
    b = MarkerTrack([0.0, 1.0], [bx, bx], [by, by])
    fwd = fin_angle_series(SegmentTrack(a, b)).values
    rev = fin_angle_series(SegmentTrack(b, a)).values
    assert np.all((fwd >= 0) & (fwd <= 90))
    np.testing.assert_allclose(fwd, rev, atol=1e-9)
