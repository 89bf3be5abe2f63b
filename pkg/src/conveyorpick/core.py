"""Shared geometry, workspace, object, and plan types.

Conventions used throughout the package: the belt moves from right to
left at unit speed, so an object's x coordinate decreases by exactly the
elapsed time. All times and lengths are dimensionless doubles; robot
speeds are expressed relative to the belt speed. Objects are dropped off
at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

#: absolute tolerance for floating-point comparisons across the package
ABS_TOL = 1e-9


@dataclass(frozen=True)
class Point2:
    """A point in the planar workspace."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point components must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


ORIGIN = Point2(0.0, 0.0)


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned reachable rectangle on the belt.

    The drop-off location is pinned to the origin and the bottom edge to
    y = 0; the robot base sits somewhere on the y = 0 line.
    """

    x_left: float
    x_right: float
    y_top: float
    y_bottom: float = 0.0
    robot_base: Point2 = ORIGIN
    dropoff: Point2 = ORIGIN

    def __post_init__(self) -> None:
        if not self.x_left < self.x_right:
            raise ValueError(f"require x_left < x_right, got [{self.x_left}, {self.x_right}]")
        if self.y_bottom != 0.0:
            raise ValueError("the workspace bottom edge is pinned to y = 0")
        if not self.y_top > 0.0:
            raise ValueError(f"require y_top > 0, got {self.y_top}")
        if self.dropoff != ORIGIN:
            raise ValueError("the drop-off location is pinned to the origin")
        if self.robot_base.y != 0.0:
            raise ValueError("the robot base must lie on the y = 0 line")

    @property
    def width(self) -> float:
        return self.x_right - self.x_left

    @property
    def height(self) -> float:
        return self.y_top - self.y_bottom

    def contains(self, p: Point2, tol: float = 0.0) -> bool:
        return (
            self.x_left - tol <= p.x <= self.x_right + tol
            and self.y_bottom - tol <= p.y <= self.y_top + tol
        )


@dataclass(frozen=True)
class ConveyorObject:
    """An object riding the belt, identified by its spawn state."""

    id: int
    spawn_pos: Point2
    spawn_time: float = 0.0


def position_at(obj: ConveyorObject, t: float) -> Point2:
    """Position of *obj* at time ``t`` under unit-speed leftward advection.

    Raises ``ValueError`` if the object has not spawned yet at ``t``.
    """
    if t < obj.spawn_time:
        raise ValueError(
            f"object {obj.id} spawns at t={obj.spawn_time}, queried at t={t}"
        )
    return Point2(obj.spawn_pos.x - (t - obj.spawn_time), obj.spawn_pos.y)


@dataclass(frozen=True)
class PickPlan:
    """An ordered picking sequence with per-pick completion times.

    ``pick_times`` holds the cumulative completion time after each
    executed pick. A plan is feasible only when every requested object is
    picked; otherwise ``total_time`` is ``+inf`` and ``order`` /
    ``pick_times`` cover the executable prefix.
    """

    order: tuple[int, ...] = ()
    pick_times: tuple[float, ...] = ()
    total_time: float = 0.0
    feasible: bool = True

    def __post_init__(self) -> None:
        if len(set(self.order)) != len(self.order):
            raise ValueError("plan order contains duplicate object ids")
        if len(self.pick_times) > len(self.order):
            raise ValueError("more pick times than picks")
        for a, b in zip(self.pick_times, self.pick_times[1:]):
            if not b > a:
                raise ValueError("pick times must be strictly increasing")
        if self.feasible:
            if len(self.pick_times) != len(self.order):
                raise ValueError("feasible plan must time every pick")
            expected = self.pick_times[-1] if self.pick_times else 0.0
            if self.total_time != expected:
                raise ValueError("feasible plan total must equal its last pick time")
        elif not math.isinf(self.total_time):
            raise ValueError("infeasible plan total must be +inf")

    def __len__(self) -> int:
        return len(self.order)

    @property
    def picks_completed(self) -> int:
        return len(self.pick_times)

    @property
    def last_pick_time(self) -> float:
        return self.pick_times[-1] if self.pick_times else 0.0
