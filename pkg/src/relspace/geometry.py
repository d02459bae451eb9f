"""Planar geometry linking world coordinates to object-relative ones.

A spatial observation is expressed relative to a reference object as a
distance ``l`` and a direction ``theta``.  The direction is measured
counter-clockwise from the ray that points from the object towards the
robot, so the same world position reads differently depending on which
object (and which robot pose) anchors the frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians into ``[0, 2*pi)``."""
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return 0.0 if a == TWO_PI else a


@dataclass(frozen=True)
class Pose2:
    """A point in the world plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose components must be finite")

    def distance_to(self, other: "Pose2") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass(frozen=True)
class RelativeCoord:
    """Distance and direction of a point in an object's frame."""

    l: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.l) and math.isfinite(self.theta)):
            raise ValueError("relative coordinates must be finite")
        if self.l < 0.0:
            raise ValueError(f"distance must be non-negative, got {self.l}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class ObjectFrame:
    """An object position plus the world bearing of its object-to-robot ray."""

    origin: Pose2
    f: float

    def __post_init__(self):
        if not math.isfinite(self.f):
            raise ValueError("frame bearing must be finite")
        object.__setattr__(self, "f", wrap_angle(self.f))


def frame_for(obj: Pose2, robot: Pose2) -> ObjectFrame:
    """Build the frame anchored at ``obj`` and oriented towards ``robot``."""
    if obj.distance_to(robot) == 0.0:
        raise ValueError("object and robot coincide, frame bearing undefined")
    f = math.atan2(robot.y - obj.y, robot.x - obj.x)
    return ObjectFrame(obj, f)


def to_world(frame: ObjectFrame, rel: RelativeCoord) -> Pose2:
    """Map object-relative coordinates to a world position."""
    bearing = frame.f + rel.theta
    return Pose2(
        frame.origin.x + rel.l * math.cos(bearing),
        frame.origin.y + rel.l * math.sin(bearing),
    )


def to_relative(point: Pose2, frame: ObjectFrame) -> RelativeCoord:
    """Express a world position in an object's frame.

    The direction of a point sitting exactly on the frame origin is
    undefined, so that case raises.
    """
    dx = point.x - frame.origin.x
    dy = point.y - frame.origin.y
    l = math.hypot(dx, dy)
    if l == 0.0:
        raise ValueError("point coincides with the frame origin")
    theta = wrap_angle(math.atan2(dy, dx) - frame.f)
    return RelativeCoord(l, theta)
