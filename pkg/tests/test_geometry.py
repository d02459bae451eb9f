"""Frame construction and the world/relative round trip."""

import math

import pytest
from hypothesis import given, strategies as st

from relspace.geometry import (
    ObjectFrame,
    Pose2,
    RelativeCoord,
    frame_for,
    to_relative,
    to_world,
    wrap_angle,
)

finite = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)
angles = st.floats(-20.0, 20.0, allow_nan=False, allow_infinity=False)


def test_wrap_angle_range():
    for a in (-7.5, -math.pi, 0.0, math.pi, 9.1, 2.0 * math.pi):
        w = wrap_angle(a)
        assert 0.0 <= w < 2.0 * math.pi
        # wrapping must not move the angle off its equivalence class
        assert math.isclose(
            math.cos(w), math.cos(a), abs_tol=1e-12
        ) and math.isclose(math.sin(w), math.sin(a), abs_tol=1e-12)


def test_frame_points_at_robot():
    # the object-to-robot ray is the zero direction, so the robot itself
    # sits at theta = 0 in every frame
    obj = Pose2(1.0, -2.0)
    robot = Pose2(4.0, 2.0)
    frame = frame_for(obj, robot)
    rel = to_relative(robot, frame)
    assert rel.theta == pytest.approx(0.0, abs=1e-12)
    assert rel.l == pytest.approx(5.0, abs=1e-12)


def test_counter_clockwise_convention():
    # robot due east of the object; a point due north of the object is a
    # quarter turn counter-clockwise from the object-to-robot ray
    frame = frame_for(Pose2(0.0, 0.0), Pose2(3.0, 0.0))
    rel = to_relative(Pose2(0.0, 2.0), frame)
    assert rel.theta == pytest.approx(math.pi / 2.0, abs=1e-12)
    assert rel.l == pytest.approx(2.0, abs=1e-12)


def test_degenerate_inputs_raise():
    with pytest.raises(ValueError):
        frame_for(Pose2(1.0, 1.0), Pose2(1.0, 1.0))
    frame = frame_for(Pose2(0.0, 0.0), Pose2(1.0, 0.0))
    with pytest.raises(ValueError):
        to_relative(Pose2(0.0, 0.0), frame)
    with pytest.raises(ValueError):
        RelativeCoord(-0.5, 0.0)
    with pytest.raises(ValueError):
        Pose2(math.nan, 0.0)


@given(ox=finite, oy=finite, f=angles, l=st.floats(1e-3, 40.0), th=angles)
def test_round_trip_world(ox, oy, f, l, th):
    # distances below a millimetre at room scale lose the 1e-9 guarantee
    # to float cancellation, and the simulator never produces them
    frame = ObjectFrame(Pose2(ox, oy), f)
    rel = RelativeCoord(l, th)
    back = to_relative(to_world(frame, rel), frame)
    assert abs(back.l - rel.l) < 1e-9
    # compare directions on the circle to dodge the wrap seam
    d = (back.theta - rel.theta + math.pi) % (2.0 * math.pi) - math.pi
    assert abs(d) < 1e-9


@given(px=finite, py=finite, ox=finite, oy=finite, f=angles)
def test_round_trip_relative(px, py, ox, oy, f):
    frame = ObjectFrame(Pose2(ox, oy), f)
    point = Pose2(px, py)
    if point.distance_to(frame.origin) < 1e-6:
        return
    rel = to_relative(point, frame)
    back = to_world(frame, rel)
    assert back.distance_to(point) < 1e-9
