"""Robot time models and the shortest pick-and-place time computation.

Every model answers two static questions about a point p in the
workspace: how long the end-effector needs to travel from its drop-off
rest pose to p (``go_time``), and how long it needs to return from p to
the drop-off pose (``return_time``). Intercepting a moving object then
reduces to the fixed point t = go_time(x - t, y), solved in closed form
for the telescoping arm and numerically otherwise. Precomputed tables
make the lookup cheap enough for the sequence planners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from . import _kernels
from ._kernels import KIND_TABLE, KIND_TELESCOPING, _EMPTY_GRID
from .core import ORIGIN, Point2, Workspace


class MissReason(Enum):
    EXITS_WORKSPACE = "exits_workspace"
    UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class PnpOutcome:
    """Result of attempting one pick-and-place cycle on a moving object."""

    total_time: float
    intercept_time: float
    pick_point: Point2 | None
    miss_reason: MissReason | None = None

    @classmethod
    def hit(cls, total_time: float, intercept_time: float, pick_point: Point2) -> "PnpOutcome":
        if not 0.0 <= intercept_time <= total_time:
            raise ValueError("require 0 <= intercept_time <= total_time")
        return cls(total_time, intercept_time, pick_point)

    @classmethod
    def miss(cls, reason: MissReason) -> "PnpOutcome":
        return cls(math.inf, math.inf, None, reason)

    @property
    def is_hit(self) -> bool:
        return self.miss_reason is None

    @property
    def is_miss(self) -> bool:
        return self.miss_reason is not None


class UnreachableTargetError(ValueError):
    """A static target lies outside the robot's reachable set."""


@runtime_checkable
class ReachTimeModel(Protocol):
    """Anything that can time a move to and from a static point."""

    def go_time(self, p: Point2) -> float: ...

    def return_time(self, p: Point2) -> float: ...


@dataclass(frozen=True)
class KernelForm:
    """Flat numeric description consumed by the compiled planners."""

    kind: int
    base_x: float
    v_e: float
    go_grid: np.ndarray
    return_grid: np.ndarray
    gx0: float
    gdx: float
    gy0: float
    gdy: float

    @property
    def args(self) -> tuple:
        return (
            self.kind, self.base_x, self.v_e, self.go_grid, self.return_grid,
            self.gx0, self.gdx, self.gy0, self.gdy,
        )


@dataclass(frozen=True)
class TelescopingArm:
    """Radially extending arm whose end-effector moves at fixed speed v_e.

    Rotation about the base is free; only the radial extension or
    retraction between the rest radius (base to drop-off distance) and
    the target radius takes time. v_e must exceed the belt speed.
    """

    v_e: float
    base: Point2 = ORIGIN

    def __post_init__(self) -> None:
        if not self.v_e > 1.0:
            raise ValueError(f"end-effector speed must exceed the belt speed 1, got {self.v_e}")
        if self.base.y != 0.0:
            raise ValueError("the arm base must lie on the y = 0 line")

    @property
    def rest_radius(self) -> float:
        return abs(self.base.x)

    def go_time(self, p: Point2) -> float:
        return abs(self.base.distance_to(p) - self.rest_radius) / self.v_e

    def return_time(self, p: Point2) -> float:
        return self.go_time(p)

    def kernel_form(self) -> KernelForm:
        return KernelForm(
            KIND_TELESCOPING, self.base.x, self.v_e, _EMPTY_GRID, _EMPTY_GRID,
            0.0, 1.0, 0.0, 1.0,
        )


@dataclass(frozen=True)
class JointProfile:
    """Per-joint velocity and acceleration limits (rad/s, rad/s^2)."""

    v_max: float
    a_max: float

    def __post_init__(self) -> None:
        if not (self.v_max > 0.0 and self.a_max > 0.0):
            raise ValueError("joint limits must be positive")


def joint_move_time(profiles: list[JointProfile], q_from: list[float], q_to: list[float]) -> float:
    """Rest-to-rest move duration: slowest joint under trapezoidal profiles.

    A joint displacement long enough to reach v_max cruises
    (|dq|/v + v/a); shorter moves use the triangular profile 2*sqrt(|dq|/a).
    Joints move simultaneously, so the maximum single-joint time governs.
    """
    if not (len(profiles) == len(q_from) == len(q_to)):
        raise ValueError("profiles and joint angle lists must have equal length")
    worst = 0.0
    for prof, qa, qb in zip(profiles, q_from, q_to):
        dq = abs(qb - qa)
        if dq == 0.0:
            continue
        if dq >= prof.v_max * prof.v_max / prof.a_max:
            t = dq / prof.v_max + prof.v_max / prof.a_max
        else:
            t = 2.0 * math.sqrt(dq / prof.a_max)
        if t > worst:
            worst = t
    return worst


class Elbow(Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class ScaraArm:
    """Two-revolute-joint planar arm timed through joint-space moves."""

    link1_len: float
    link2_len: float
    joint_profiles: tuple[JointProfile, JointProfile]
    base: Point2 = ORIGIN
    elbow: Elbow = Elbow.UP

    def __post_init__(self) -> None:
        if not (self.link1_len > 0.0 and self.link2_len > 0.0):
            raise ValueError("link lengths must be positive")
        if self.base.y != 0.0:
            raise ValueError("the arm base must lie on the y = 0 line")

    @property
    def reach_min(self) -> float:
        return abs(self.link1_len - self.link2_len)

    @property
    def reach_max(self) -> float:
        return self.link1_len + self.link2_len

    @property
    def dropoff_angles(self) -> tuple[float, float]:
        return scara_ik(self, ORIGIN)

    def go_time(self, p: Point2) -> float:
        try:
            target = scara_ik(self, p)
        except UnreachableTargetError:
            return math.inf
        return joint_move_time(list(self.joint_profiles), list(self.dropoff_angles), list(target))

    def return_time(self, p: Point2) -> float:
        try:
            target = scara_ik(self, p)
        except UnreachableTargetError:
            return math.inf
        return joint_move_time(list(self.joint_profiles), list(target), list(self.dropoff_angles))

    @classmethod
    def default_for_workspace(
        cls,
        workspace: Workspace,
        v_max: float = 4.0,
        a_max: float = 40.0,
        elbow: Elbow = Elbow.UP,
    ) -> "ScaraArm":
        """Arm sized to cover *workspace* from a base beside the belt.

        The base sits left of the workspace so the shoulder singularity
        (target at the base) stays outside the belt rectangle, which
        keeps the joint-space time field smooth over the whole table.
        Link lengths give a 20% reach margin past the farthest corner.
        """
        base = Point2(workspace.x_left - 0.2 * workspace.width, 0.0)
        corners = [
            Point2(workspace.x_left, workspace.y_bottom),
            Point2(workspace.x_left, workspace.y_top),
            Point2(workspace.x_right, workspace.y_bottom),
            Point2(workspace.x_right, workspace.y_top),
        ]
        far = max(base.distance_to(c) for c in corners)
        link = 0.6 * far
        prof = JointProfile(v_max, a_max)
        return cls(link, link, (prof, prof), base=base, elbow=elbow)


def _wrap_angle(a: float) -> float:
    """Normalize an angle into (-pi, pi]."""
    a = math.remainder(a, math.tau)
    if a <= -math.pi:
        a = math.pi
    return a


def scara_ik(arm: ScaraArm, target: Point2) -> tuple[float, float]:
    """Joint angles placing the end-effector at *target*.

    The elbow branch follows ``arm.elbow``; a target at the base with
    equal links takes the folded configuration (0, pi). Raises
    ``UnreachableTargetError`` outside the reachable annulus.
    """
    dx = target.x - arm.base.x
    dy = target.y - arm.base.y
    d2 = dx * dx + dy * dy
    l1, l2 = arm.link1_len, arm.link2_len
    d = math.sqrt(d2)
    if d > arm.reach_max + 1e-9 or d < arm.reach_min - 1e-9:
        raise UnreachableTargetError(
            f"target at distance {d:.6g} outside reach [{arm.reach_min:.6g}, {arm.reach_max:.6g}]"
        )
    if d == 0.0:
        # only reachable when the links fold back on themselves
        return (0.0, math.pi)
    c2 = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    c2 = min(1.0, max(-1.0, c2))
    theta2 = math.acos(c2)
    if arm.elbow is Elbow.DOWN:
        theta2 = -theta2
    alpha = math.atan2(dy, dx)
    beta = math.atan2(l2 * math.sin(theta2), l1 + l2 * math.cos(theta2))
    return (_wrap_angle(alpha - beta), _wrap_angle(theta2))


def scara_fk(arm: ScaraArm, theta1: float, theta2: float) -> Point2:
    """Forward kinematics of the two-link arm."""
    x = arm.base.x + arm.link1_len * math.cos(theta1) + arm.link2_len * math.cos(theta1 + theta2)
    y = arm.base.y + arm.link1_len * math.sin(theta1) + arm.link2_len * math.sin(theta1 + theta2)
    return Point2(x, y)


def telescoping_intercept(
    arm: TelescopingArm, obj_pos: Point2, workspace: Workspace | None = None
) -> PnpOutcome:
    """Earliest interception of an object currently at *obj_pos*.

    Solves the quadratic balancing the radial arm travel against the
    object's leftward drift; extension and retraction mirror each other,
    so the cycle total is twice the intercept time. Without a workspace
    the pick point is unconstrained.
    """
    k = arm.kernel_form()
    x_left = workspace.x_left if workspace is not None else -math.inf
    x_right = workspace.x_right if workspace is not None else math.inf
    if obj_pos.x < x_left:
        return PnpOutcome.miss(MissReason.EXITS_WORKSPACE)
    t = _kernels._intercept(*_intercept_args(k), obj_pos.x, obj_pos.y, x_left, x_right)
    if math.isfinite(t):
        return PnpOutcome.hit(2.0 * t, t, Point2(obj_pos.x - t, obj_pos.y))
    # classify the miss from the unconstrained root
    t_free = _kernels._intercept(*_intercept_args(k), obj_pos.x, obj_pos.y, -math.inf, math.inf)
    if math.isfinite(t_free) and obj_pos.x - t_free < x_left:
        return PnpOutcome.miss(MissReason.EXITS_WORKSPACE)
    return PnpOutcome.miss(MissReason.UNREACHABLE)


def _intercept_args(k: KernelForm) -> tuple:
    return (k.kind, k.base_x, k.v_e, k.go_grid, k.gx0, k.gdx, k.gy0, k.gdy)


def two_object_times(
    x1: float, x2: float, y1: float, y2: float, v_e: float
) -> tuple[float, float]:
    """Completion measure of both two-object picking orders.

    With base and drop-off at the origin, each pick's go phase lasts d,
    the belt distance the object travels before interception; the
    matching return phase lasts another d, so the second object is
    advected by 2*d before its own quadratic is solved. The returned
    values sum the go-phase durations (d1 + d2) per order - the full
    cycle time is exactly twice that, so order comparisons and relative
    gaps are unaffected by the convention.
    """
    if not v_e > 1.0:
        raise ValueError("end-effector speed must exceed the belt speed")

    def go_root(x: float, y: float) -> float:
        # (x - d)^2 + y^2 = v_e^2 d^2, smallest non-negative root
        a = v_e * v_e - 1.0
        b = 2.0 * x
        c = -(x * x + y * y)
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            if disc < -1e-12:
                raise ValueError(f"object at ({x}, {y}) cannot be caught at v_e={v_e}")
            disc = 0.0
        d = (-b + math.sqrt(disc)) / (2.0 * a)
        if d < 0.0:
            raise ValueError(f"object at ({x}, {y}) cannot be caught at v_e={v_e}")
        return d

    def order_time(xa: float, ya: float, xb: float, yb: float) -> float:
        d1 = go_root(xa, ya)
        d2 = go_root(xb - 2.0 * d1, yb)
        return d1 + d2

    t12 = order_time(x1, y1, x2, y2)
    t21 = order_time(x2, y2, x1, y1)
    return t12, t21


@dataclass(frozen=True)
class PnpTimeTable:
    """Precomputed go/return times sampled at workspace cell centers.

    Lookups interpolate bilinearly; the half-cell margins extrapolate
    linearly from the edge cells. Unreachable cells hold NaN and poison
    any interpolation touching them (result +inf). Go and return grids
    are stored separately because the two transitions may differ.
    """

    workspace: Workspace
    go_times: np.ndarray
    return_times: np.ndarray

    def __post_init__(self) -> None:
        rows, cols = self.go_times.shape
        if self.return_times.shape != (rows, cols):
            raise ValueError("go and return grids must have matching shape")
        if rows < 2 or cols < 2:
            raise ValueError(f"table resolution must be at least 2x2, got {rows}x{cols}")
        for grid in (self.go_times, self.return_times):
            finite = grid[np.isfinite(grid)]
            if finite.size and finite.min() < 0.0:
                raise ValueError("table times must be non-negative")

    @property
    def resolution(self) -> tuple[int, int]:
        return self.go_times.shape

    @property
    def cell_dx(self) -> float:
        return self.workspace.width / self.resolution[1]

    @property
    def cell_dy(self) -> float:
        return self.workspace.height / self.resolution[0]

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = self.resolution
        xs = self.workspace.x_left + (np.arange(cols) + 0.5) * self.cell_dx
        ys = self.workspace.y_bottom + (np.arange(rows) + 0.5) * self.cell_dy
        return xs, ys

    def reachable_fraction(self) -> float:
        ok = np.isfinite(self.go_times) & np.isfinite(self.return_times)
        return float(ok.mean())

    def kernel_form(self) -> KernelForm:
        return KernelForm(
            KIND_TABLE, 0.0, 0.0, self.go_times, self.return_times,
            self.workspace.x_left + 0.5 * self.cell_dx, self.cell_dx,
            self.workspace.y_bottom + 0.5 * self.cell_dy, self.cell_dy,
        )

    def go_time(self, p: Point2) -> float:
        k = self.kernel_form()
        return float(_kernels._bilinear(k.go_grid, k.gx0, k.gdx, k.gy0, k.gdy, p.x, p.y))

    def return_time(self, p: Point2) -> float:
        k = self.kernel_form()
        return float(_kernels._bilinear(k.return_grid, k.gx0, k.gdx, k.gy0, k.gdy, p.x, p.y))


def build_pnp_table(
    model: ReachTimeModel,
    workspace: Workspace,
    resolution: tuple[int, int] = (100, 100),
) -> PnpTimeTable:
    """Sample *model* at every workspace cell center.

    ``resolution`` is (rows, cols) over (y, x). Unreachable points are
    flagged NaN. Lookups at the sampled nodes reproduce the model
    exactly.
    """
    rows, cols = resolution
    if rows < 2 or cols < 2:
        raise ValueError(f"table resolution must be at least 2x2, got {rows}x{cols}")
    if workspace.width <= 0.0 or workspace.height <= 0.0:
        raise ValueError("workspace must have positive area")
    go = np.empty((rows, cols))
    ret = np.empty((rows, cols))
    dx = workspace.width / cols
    dy = workspace.height / rows
    for j in range(rows):
        y = workspace.y_bottom + (j + 0.5) * dy
        for i in range(cols):
            x = workspace.x_left + (i + 0.5) * dx
            p = Point2(x, y)
            g = model.go_time(p)
            r = model.return_time(p)
            go[j, i] = g if math.isfinite(g) else math.nan
            ret[j, i] = r if math.isfinite(r) else math.nan
    return PnpTimeTable(workspace, go, ret)


_TABLE_MAGIC = "conveyorpick-pnp-table v1"


def save_table(table: PnpTimeTable, path: str | Path) -> None:
    """Write *table* as hex-float text; round-trips bit-exactly."""
    ws = table.workspace
    rows, cols = table.resolution
    lines = [
        _TABLE_MAGIC,
        f"x_left {ws.x_left.hex()}",
        f"x_right {ws.x_right.hex()}",
        f"y_bottom {ws.y_bottom.hex()}",
        f"y_top {ws.y_top.hex()}",
        f"rows {rows}",
        f"cols {cols}",
    ]
    for name, grid in (("go", table.go_times), ("return", table.return_times)):
        lines.append(name)
        for j in range(rows):
            lines.append(" ".join(_float_to_text(v) for v in grid[j]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_table(path: str | Path) -> PnpTimeTable:
    """Read a table written by :func:`save_table`."""
    text = Path(path).read_text().splitlines()
    if not text or text[0] != _TABLE_MAGIC:
        raise ValueError(f"{path}: not a PnP time table file")
    header: dict[str, str] = {}
    idx = 1
    while idx < len(text) and text[idx] != "go":
        key, value = text[idx].split(maxsplit=1)
        header[key] = value
        idx += 1
    rows = int(header["rows"])
    cols = int(header["cols"])
    ws = Workspace(
        x_left=float.fromhex(header["x_left"]),
        x_right=float.fromhex(header["x_right"]),
        y_top=float.fromhex(header["y_top"]),
        y_bottom=float.fromhex(header["y_bottom"]),
    )

    def read_grid(start: int, label: str) -> tuple[np.ndarray, int]:
        if text[start] != label:
            raise ValueError(f"{path}: expected '{label}' section at line {start + 1}")
        grid = np.empty((rows, cols))
        for j in range(rows):
            vals = text[start + 1 + j].split()
            if len(vals) != cols:
                raise ValueError(f"{path}: row {j} has {len(vals)} values, expected {cols}")
            grid[j] = [_float_from_text(v) for v in vals]
        return grid, start + 1 + rows

    go, idx = read_grid(idx, "go")
    ret, idx = read_grid(idx, "return")
    return PnpTimeTable(ws, go, ret)


def _float_to_text(v: float) -> str:
    return "nan" if math.isnan(v) else float(v).hex()


def _float_from_text(s: str) -> float:
    return math.nan if s == "nan" else float.fromhex(s)


def lower_model(model) -> KernelForm:
    """Kernel form of *model*, for the compiled planners.

    Only the telescoping arm (closed form) and precomputed tables lower;
    other reach-time models must be wrapped with :func:`build_pnp_table`
    first, mirroring how complex robots are planned in practice.
    """
    form = getattr(model, "kernel_form", None)
    if form is None:
        raise TypeError(
            f"{type(model).__name__} has no compiled form; wrap it with "
            "build_pnp_table(model, workspace) and plan against the table"
        )
    return form()


def get_pnp_time(model, obj_pos: Point2, workspace: Workspace) -> PnpOutcome:
    """Best available PnP cycle for an object currently at *obj_pos*.

    The intercept time solves t = go_time(obj_pos.x - t, obj_pos.y) for
    its smallest non-negative root with the pick point inside the
    workspace; the total adds the return leg from the pick point.
    """
    if not workspace.y_bottom <= obj_pos.y <= workspace.y_top:
        raise ValueError(
            f"object y={obj_pos.y} outside workspace [{workspace.y_bottom}, {workspace.y_top}]"
        )
    if obj_pos.x < workspace.x_left:
        return PnpOutcome.miss(MissReason.EXITS_WORKSPACE)
    if isinstance(model, TelescopingArm):
        out = telescoping_intercept(model, obj_pos, workspace)
        return out
    form = getattr(model, "kernel_form", None)
    if form is not None:
        k = form()
        t = _kernels._intercept(
            *_intercept_args(k), obj_pos.x, obj_pos.y, workspace.x_left, workspace.x_right
        )
        if not math.isfinite(t):
            return PnpOutcome.miss(MissReason.UNREACHABLE)
        pick = Point2(obj_pos.x - t, obj_pos.y)
        back = float(
            _kernels._return_static(
                k.kind, k.base_x, k.v_e, k.return_grid, k.gx0, k.gdx, k.gy0, k.gdy, pick.x, pick.y
            )
        )
        if not math.isfinite(back):
            return PnpOutcome.miss(MissReason.UNREACHABLE)
        return PnpOutcome.hit(t + back, t, pick)
    return _scan_intercept(model, obj_pos, workspace)


def _scan_intercept(
    model: ReachTimeModel, obj_pos: Point2, workspace: Workspace, step: float = 0.01
) -> PnpOutcome:
    """Generic fixed-point solver: uniform scan for a sign change of
    g(t) = go_time(x - t, y) - t, then bisection to 1e-9."""
    x, y = obj_pos.x, obj_pos.y

    def g(t: float) -> float:
        return model.go_time(Point2(x - t, y)) - t

    t_lo = max(0.0, x - workspace.x_right)
    t_hi = x - workspace.x_left
    ga = g(t_lo)
    if ga == 0.0:
        return _finish_hit(model, x, y, t_lo)
    t_a = t_lo
    while t_a < t_hi:
        t_b = min(t_a + step, t_hi)
        gb = g(t_b)
        if math.isfinite(ga) and math.isfinite(gb) and (ga > 0.0) != (gb > 0.0):
            lo, hi = t_a, t_b
            glo = ga
            while hi - lo > 1e-9:
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if gm == 0.0:
                    lo = hi = mid
                    break
                if (glo > 0.0) == (gm > 0.0):
                    lo, glo = mid, gm
                else:
                    hi = mid
            return _finish_hit(model, x, y, 0.5 * (lo + hi))
        if math.isfinite(gb) and gb == 0.0:
            return _finish_hit(model, x, y, t_b)
        t_a, ga = t_b, gb
    return PnpOutcome.miss(MissReason.UNREACHABLE)


def _finish_hit(model: ReachTimeModel, x: float, y: float, t: float) -> PnpOutcome:
    pick = Point2(x - t, y)
    back = model.return_time(pick)
    if not math.isfinite(back):
        return PnpOutcome.miss(MissReason.UNREACHABLE)
    return PnpOutcome.hit(t + back, t, pick)
