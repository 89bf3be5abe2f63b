import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conveyorpick import (
    Elbow,
    JointProfile,
    MissReason,
    Point2,
    ScaraArm,
    TelescopingArm,
    UnreachableTargetError,
    Workspace,
    build_pnp_table,
    get_pnp_time,
    joint_move_time,
    load_table,
    save_table,
    scara_fk,
    scara_ik,
    telescoping_intercept,
    two_object_times,
)


# --- telescoping interception -------------------------------------------------

def test_collinear_intercept():
    arm = TelescopingArm(v_e=2.0)
    out = telescoping_intercept(arm, Point2(3.0, 0.0))
    assert out.is_hit
    assert out.intercept_time == pytest.approx(1.0, abs=1e-12)
    assert out.total_time == pytest.approx(2.0, abs=1e-12)
    assert out.pick_point.x == pytest.approx(2.0, abs=1e-12)


def test_vertical_intercept():
    arm = TelescopingArm(v_e=2.0)
    out = telescoping_intercept(arm, Point2(0.0, 1.0))
    assert out.intercept_time == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-12)


def bisect_residual_root(arm, x, y, hi=100.0):
    """Independent oracle: bisection on the interception residual."""
    r0 = arm.rest_radius

    def residual(t):
        dist = math.hypot((x - t) - arm.base.x, y)
        return abs(dist - r0) / arm.v_e - t

    lo = 0.0
    assert residual(lo) >= 0.0
    assert residual(hi) < 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_intercept_matches_bisection_oracle():
    arm = TelescopingArm(v_e=2.0)
    out = telescoping_intercept(arm, Point2(1.0, 0.4))
    expected = bisect_residual_root(arm, 1.0, 0.4)
    assert out.intercept_time == pytest.approx(expected, abs=1e-9)


def test_intercept_with_offset_base_retraction_case():
    # object inside the base circle: the arm retracts to meet it
    arm = TelescopingArm(v_e=3.0, base=Point2(-2.0, 0.0))
    pos = Point2(-1.0, 0.5)
    assert math.hypot(pos.x - arm.base.x, pos.y) < arm.rest_radius
    out = telescoping_intercept(arm, pos)
    assert out.is_hit
    # fixed point: reaching the pick point takes exactly the intercept time
    assert arm.go_time(out.pick_point) == pytest.approx(out.intercept_time, abs=1e-9)
    oracle = bisect_residual_root(arm, pos.x, pos.y)
    assert out.intercept_time == pytest.approx(oracle, abs=1e-9)


def test_intercept_miss_exits_workspace():
    arm = TelescopingArm(v_e=1.2)
    ws = Workspace(x_left=-0.5, x_right=5.0, y_top=5.0)
    # high object with a slow arm: the interception point lies left of x_left
    out = telescoping_intercept(arm, Point2(2.0, 4.5), ws)
    assert out.is_miss and out.miss_reason is MissReason.EXITS_WORKSPACE


def test_intercept_object_already_left():
    arm = TelescopingArm(v_e=2.0)
    ws = Workspace(x_left=-5.0, x_right=5.0, y_top=5.0)
    out = telescoping_intercept(arm, Point2(-5.1, 1.0), ws)
    assert out.is_miss and out.miss_reason is MissReason.EXITS_WORKSPACE


def test_ve_must_beat_belt():
    with pytest.raises(ValueError):
        TelescopingArm(v_e=1.0)


@given(
    r=st.floats(0.1, 8.0),
    phi=st.floats(0.0, math.pi),
    ve=st.floats(1.2, 10.0),
)
@settings(deadline=None)
def test_radial_scaling_of_intercept_time(r, phi, ve):
    # with the base at the origin the intercept time is linear in the
    # radius along any fixed direction, hence monotone along rays
    arm = TelescopingArm(v_e=ve)
    p1 = Point2(r * math.cos(phi), r * math.sin(phi))
    p2 = Point2(2.0 * r * math.cos(phi), 2.0 * r * math.sin(phi))
    t1 = telescoping_intercept(arm, p1).intercept_time
    t2 = telescoping_intercept(arm, p2).intercept_time
    assert t2 == pytest.approx(2.0 * t1, rel=1e-9)


def test_reflection_symmetry_about_base_line():
    arm = TelescopingArm(v_e=2.5, base=Point2(1.0, 0.0))
    for x, y in [(3.0, 2.0), (-1.0, 0.7), (0.5, 4.2)]:
        up = telescoping_intercept(arm, Point2(x, y))
        down = telescoping_intercept(arm, Point2(x, -y))
        assert up.total_time == pytest.approx(down.total_time, abs=1e-12)


# --- two-object order analysis -------------------------------------------------

def test_two_object_times_near_crossover():
    t12, t21 = two_object_times(0.65, 0.65, 0.4, 0.7, 2.0)
    assert t12 == pytest.approx(t21, abs=1e-2)


def test_two_object_times_paper_magnitudes():
    t12, t21 = two_object_times(1.45, 1.45, 0.4, 0.7, 2.0)
    assert t21 == pytest.approx(0.77, abs=0.02)
    assert t12 - t21 == pytest.approx(0.09, abs=0.02)


def test_two_object_times_identical_objects():
    t12, t21 = two_object_times(1.3, 1.3, 0.8, 0.8, 2.0)
    assert t12 == t21


def test_two_object_times_requires_fast_arm():
    with pytest.raises(ValueError):
        two_object_times(1.0, 1.0, 0.5, 0.5, 0.9)


# --- SCARA kinematics -----------------------------------------------------------

def test_ik_full_extension():
    prof = JointProfile(1.0, 1.0)
    arm = ScaraArm(1.0, 1.0, (prof, prof))
    t1, t2 = scara_ik(arm, Point2(2.0, 0.0))
    assert t1 == pytest.approx(0.0, abs=1e-9)
    assert t2 == pytest.approx(0.0, abs=1e-9)


def test_ik_folded_at_base():
    prof = JointProfile(1.0, 1.0)
    arm = ScaraArm(1.0, 1.0, (prof, prof))
    t1, t2 = scara_ik(arm, Point2(0.0, 0.0))
    assert (t1, t2) == (0.0, math.pi)


def test_ik_unreachable():
    prof = JointProfile(1.0, 1.0)
    arm = ScaraArm(1.2, 0.8, (prof, prof))
    with pytest.raises(UnreachableTargetError):
        scara_ik(arm, Point2(2.5, 0.0))
    with pytest.raises(UnreachableTargetError):
        scara_ik(arm, Point2(0.1, 0.0))


@given(
    r=st.floats(0.45, 1.95),
    phi=st.floats(-math.pi, math.pi),
    elbow=st.sampled_from([Elbow.UP, Elbow.DOWN]),
)
@settings(deadline=None)
def test_fk_ik_round_trip(r, phi, elbow):
    prof = JointProfile(1.0, 1.0)
    arm = ScaraArm(1.2, 0.8, (prof, prof), elbow=elbow)
    target = Point2(r * math.cos(phi), r * math.sin(phi))
    angles = scara_ik(arm, target)
    back = scara_fk(arm, *angles)
    assert back.x == pytest.approx(target.x, abs=1e-9)
    assert back.y == pytest.approx(target.y, abs=1e-9)


def test_elbow_branches_mirror():
    prof = JointProfile(1.0, 1.0)
    up = ScaraArm(1.0, 1.0, (prof, prof), elbow=Elbow.UP)
    down = ScaraArm(1.0, 1.0, (prof, prof), elbow=Elbow.DOWN)
    t_up = scara_ik(up, Point2(1.2, 0.6))
    t_down = scara_ik(down, Point2(1.2, 0.6))
    assert t_up[1] == pytest.approx(-t_down[1])


# --- joint timing ----------------------------------------------------------------

def test_joint_move_time_zero():
    prof = JointProfile(1.0, 1.0)
    assert joint_move_time([prof, prof], [0.3, -0.2], [0.3, -0.2]) == 0.0


def test_joint_move_time_cruise():
    prof = JointProfile(1.0, 1.0)
    assert joint_move_time([prof], [0.0], [2.0]) == pytest.approx(3.0)


def test_joint_move_time_triangular():
    prof = JointProfile(1.0, 1.0)
    assert joint_move_time([prof], [0.0], [0.25]) == pytest.approx(1.0)


def test_joint_move_time_threshold_continuity():
    prof = JointProfile(2.0, 3.0)
    dq = prof.v_max**2 / prof.a_max
    below = joint_move_time([prof], [0.0], [dq - 1e-9])
    above = joint_move_time([prof], [0.0], [dq + 1e-9])
    assert below == pytest.approx(above, abs=1e-6)


def test_joint_move_time_slowest_joint_governs():
    fast = JointProfile(10.0, 100.0)
    slow = JointProfile(1.0, 1.0)
    t = joint_move_time([fast, slow], [0.0, 0.0], [1.0, 2.0])
    assert t == pytest.approx(3.0)


def test_joint_move_time_length_mismatch():
    with pytest.raises(ValueError):
        joint_move_time([JointProfile(1, 1)], [0.0], [1.0, 2.0])


# --- precomputed tables ----------------------------------------------------------

def test_table_exact_at_nodes(scara_arm, scara_table):
    xs, ys = scara_table.cell_centers()
    for i, j in [(0, 0), (50, 37), (99, 99), (13, 88)]:
        p = Point2(float(xs[i]), float(ys[j]))
        assert scara_table.go_time(p) == pytest.approx(scara_arm.go_time(p), abs=1e-12)


def test_table_midpoint_is_average(scara_table):
    xs, ys = scara_table.cell_centers()
    i, j = 40, 20
    mid = Point2(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]))
    corners = scara_table.go_times[j: j + 2, i: i + 2]
    assert scara_table.go_time(mid) == pytest.approx(float(corners.mean()), abs=1e-12)


def test_table_agreement_with_direct_model(scara_arm, scara_table, default_workspace):
    # relative error with an absolute floor at 2% of the field's range,
    # so the vanishing times right at the drop-off do not dominate
    rng = np.random.default_rng(3)
    floor = 0.02 * float(np.nanmax(scara_table.go_times))
    worst = 0.0
    for _ in range(1000):
        p = Point2(
            float(rng.uniform(default_workspace.x_left, default_workspace.x_right)),
            float(rng.uniform(0.0, default_workspace.y_top)),
        )
        direct = scara_arm.go_time(p)
        approx = scara_table.go_time(p)
        err = abs(approx - direct) / max(direct, floor)
        worst = max(worst, err)
    assert worst <= 0.01, f"max relative error {worst:.4%}"


def test_table_resolution_guard(scara_arm, default_workspace):
    with pytest.raises(ValueError):
        build_pnp_table(scara_arm, default_workspace, (1, 1))


def test_table_round_trip_bit_exact(tmp_path, default_workspace):
    arm = TelescopingArm(v_e=2.0)
    table = build_pnp_table(arm, default_workspace, (8, 12))
    path = tmp_path / "table.txt"
    save_table(table, path)
    loaded = load_table(path)
    np.testing.assert_array_equal(table.go_times, loaded.go_times)
    np.testing.assert_array_equal(table.return_times, loaded.return_times)
    assert loaded.workspace == table.workspace
    # a rewrite of the loaded table is byte-identical
    path2 = tmp_path / "table2.txt"
    save_table(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_table_flags_unreachable_cells(default_workspace):
    prof = JointProfile(4.0, 40.0)
    short_arm = ScaraArm(2.0, 2.0, (prof, prof), base=Point2(-7.0, 0.0))
    table = build_pnp_table(short_arm, default_workspace, (10, 10))
    assert 0.0 < table.reachable_fraction() < 1.0
    far = Point2(4.5, 4.5)
    assert math.isinf(table.go_time(far))


# --- the GetPnPTime surface ------------------------------------------------------

def test_get_pnp_time_collinear(default_workspace):
    arm = TelescopingArm(v_e=2.0)
    out = get_pnp_time(arm, Point2(3.0, 0.0), default_workspace)
    assert out.total_time == pytest.approx(2.0, abs=1e-12)


def test_get_pnp_time_object_gone(default_workspace, scara_table):
    arm = TelescopingArm(v_e=2.0)
    for model in (arm, scara_table):
        out = get_pnp_time(model, Point2(-5.5, 1.0), default_workspace)
        assert out.is_miss and out.miss_reason is MissReason.EXITS_WORKSPACE


def test_get_pnp_time_rejects_bad_y(default_workspace):
    arm = TelescopingArm(v_e=2.0)
    with pytest.raises(ValueError):
        get_pnp_time(arm, Point2(1.0, 6.0), default_workspace)


def test_scara_direct_fixed_point_residual(scara_arm, default_workspace):
    # the generic scan/bisection path must satisfy the fixed point to 1e-6
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(50):
        pos = Point2(float(rng.uniform(-4.0, 5.0)), float(rng.uniform(0.0, 5.0)))
        out = get_pnp_time(scara_arm, pos, default_workspace)
        if out.is_miss:
            continue
        residual = abs(scara_arm.go_time(out.pick_point) - out.intercept_time)
        assert residual <= 1e-6
        assert out.pick_point.x == pytest.approx(pos.x - out.intercept_time, abs=1e-9)
        checked += 1
    assert checked >= 40


def test_table_and_direct_interception_agree(scara_arm, scara_table, default_workspace):
    # table-backed kernel walk vs direct scan/bisection on the raw arm
    rng = np.random.default_rng(5)
    floor = 0.02 * float(np.nanmax(scara_table.go_times + scara_table.return_times))
    worst = 0.0
    for _ in range(200):
        pos = Point2(float(rng.uniform(-4.0, 5.0)), float(rng.uniform(0.0, 5.0)))
        direct = get_pnp_time(scara_arm, pos, default_workspace)
        approx = get_pnp_time(scara_table, pos, default_workspace)
        assert direct.is_hit == approx.is_hit
        if direct.is_hit:
            err = abs(approx.total_time - direct.total_time) / max(direct.total_time, floor)
            worst = max(worst, err)
    assert worst <= 0.01, f"max relative error {worst:.4%}"


def test_table_backed_fixed_point_is_exact(scara_table, default_workspace):
    # the piecewise-linear walk solves its own interpolant exactly
    rng = np.random.default_rng(17)
    for _ in range(100):
        pos = Point2(float(rng.uniform(-4.0, 5.0)), float(rng.uniform(0.0, 5.0)))
        out = get_pnp_time(scara_table, pos, default_workspace)
        if out.is_hit:
            residual = abs(scara_table.go_time(out.pick_point) - out.intercept_time)
            assert residual <= 1e-9
