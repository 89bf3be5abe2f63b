import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conveyorpick import ConveyorObject, PickPlan, Point2, Workspace, position_at


def test_position_at_zero_elapsed():
    obj = ConveyorObject(0, Point2(5.0, 2.0), 0.0)
    assert position_at(obj, 0.0) == Point2(5.0, 2.0)


def test_position_at_unit_speed_advection():
    obj = ConveyorObject(0, Point2(5.0, 2.0), 0.0)
    assert position_at(obj, 3.0) == Point2(2.0, 2.0)


def test_position_at_spawn_time_offset():
    obj = ConveyorObject(1, Point2(4.0, 1.0), 2.0)
    assert position_at(obj, 2.5) == Point2(3.5, 1.0)


def test_position_before_spawn_rejected():
    obj = ConveyorObject(1, Point2(4.0, 1.0), 2.0)
    with pytest.raises(ValueError):
        position_at(obj, 1.9)


coords = st.floats(-100.0, 100.0, allow_nan=False)
times = st.floats(0.0, 100.0, allow_nan=False)


@given(x=coords, y=st.floats(0.0, 50.0), t=times, delta=times)
def test_advection_is_linear(x, y, t, delta):
    obj = ConveyorObject(0, Point2(x, y), 0.0)
    a = position_at(obj, t)
    b = position_at(obj, t + delta)
    assert b.x == pytest.approx(a.x - delta, abs=1e-9)
    assert b.y == a.y


def test_point_requires_finite_components():
    with pytest.raises(ValueError):
        Point2(math.nan, 0.0)
    with pytest.raises(ValueError):
        Point2(0.0, math.inf)


def test_workspace_validation():
    with pytest.raises(ValueError):
        Workspace(x_left=5.0, x_right=-5.0, y_top=5.0)
    with pytest.raises(ValueError):
        Workspace(x_left=-5.0, x_right=5.0, y_top=0.0)
    with pytest.raises(ValueError):
        Workspace(x_left=-5.0, x_right=5.0, y_top=5.0, y_bottom=1.0)
    with pytest.raises(ValueError):
        Workspace(x_left=-5.0, x_right=5.0, y_top=5.0, robot_base=Point2(0.0, 1.0))


def test_workspace_contains():
    ws = Workspace(x_left=-5.0, x_right=5.0, y_top=5.0)
    assert ws.contains(Point2(0.0, 2.0))
    assert not ws.contains(Point2(-6.0, 2.0))
    assert not ws.contains(Point2(0.0, 5.5))
    assert ws.width == 10.0 and ws.height == 5.0


def test_pick_plan_rejects_duplicates():
    with pytest.raises(ValueError):
        PickPlan(order=(1, 1), pick_times=(1.0, 2.0), total_time=2.0)


def test_pick_plan_requires_increasing_times():
    with pytest.raises(ValueError):
        PickPlan(order=(0, 1), pick_times=(2.0, 2.0), total_time=2.0)


def test_pick_plan_total_must_match_last_pick():
    with pytest.raises(ValueError):
        PickPlan(order=(0,), pick_times=(1.0,), total_time=2.0)
    plan = PickPlan(order=(0,), pick_times=(1.5,), total_time=1.5)
    assert plan.feasible and plan.last_pick_time == 1.5


def test_infeasible_plan_total_is_inf():
    with pytest.raises(ValueError):
        PickPlan(order=(0, 1), pick_times=(1.0,), total_time=5.0, feasible=False)
    plan = PickPlan(order=(0, 1), pick_times=(1.0,), total_time=math.inf, feasible=False)
    assert plan.picks_completed == 1


def test_empty_plan():
    plan = PickPlan()
    assert len(plan) == 0 and plan.total_time == 0.0 and plan.feasible
