"""Constraint residuals, Jacobian structure and bound pins."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlto import RobotModel, ad
from hlto.constraints import (assemble_bounds, contact_level_residual,
                              friction_cone_residuals, kinematic_box_residual,
                              lifted_force_residual, steering_bound_residual)
from hlto.transcription import FOOTZ_NODES


def rotz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def test_group_inventory_drive(drive_problem):
    got = {g.name: (g.kind, g.dim) for g in drive_problem.constraints.groups}
    assert got == {
        "collocation": ("eq", 336),
        "continuity": ("eq", 84),
        "contact_level": ("eq", 80),
        "kinematic_box": ("ineq", 384),
        "steering_range": ("ineq", 128),
        "friction_cone": ("ineq", 80),
        "initial_state": ("eq", 28),
        "final_com_velocity": ("eq", 3),
        "final_wheel_speed": ("eq", 4),
        "final_foot_posture": ("eq", 12),
    }


def test_group_inventory_crawl(crawl_problem):
    got = {g.name: (g.kind, g.dim) for g in crawl_problem.constraints.groups}
    assert got["lifted_force"] == ("eq", 6)
    assert got["swing_apex"] == ("eq", 1)
    assert got["contact_level"] == ("eq", 70)
    assert got["friction_cone"] == ("ineq", 70)


def test_every_group_jacobian_matches_dense_ad(drive_problem):
    z = drive_problem.perturbed(scale=0.02, seed=3)
    for g in drive_problem.constraints.groups:
        val, jac = g.value_and_jacobian(z)
        val2, jac2 = ad.jacobian(g.fn, z)
        dense = jac.toarray() if hasattr(jac, "toarray") else np.asarray(jac)
        assert np.max(np.abs(val - val2)) < 1e-12, g.name
        assert np.max(np.abs(dense - jac2)) < 1e-10, g.name
        assert g.times.shape == (g.dim,)
        assert np.all((g.times >= 0) & (g.times <= g.layout.T_f))


def test_crawl_groups_jacobians(crawl_problem):
    z = crawl_problem.perturbed(scale=0.02, seed=4)
    for g in crawl_problem.constraints.groups:
        if g.name not in ("lifted_force", "swing_apex", "collocation"):
            continue
        val, jac = g.value_and_jacobian(z)
        val2, jac2 = ad.jacobian(g.fn, z)
        dense = jac.toarray() if hasattr(jac, "toarray") else np.asarray(jac)
        assert np.max(np.abs(val - val2)) < 1e-12, g.name
        assert np.max(np.abs(dense - jac2)) < 1e-10, g.name


def test_linear_groups_are_affine(drive_problem):
    rng = np.random.default_rng(11)
    n = drive_problem.layout.n
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    for g in drive_problem.constraints.groups:
        if g.linear is None:
            continue
        a = 0.3
        mix = g.values(a * z1 + (1 - a) * z2)
        sup = a * g.values(z1) + (1 - a) * g.values(z2)
        assert np.allclose(mix, sup, atol=1e-9), g.name


def test_friction_rows_frozen(model):
    res = friction_cone_residuals(np.array([3.0, -1.0, 10.0]), model)
    assert np.allclose(res, [-2.0, -8.0, -6.0, -4.0, -10.0], atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(s=st.floats(1e-3, 1e3),
       fx=st.floats(-50, 50), fy=st.floats(-50, 50), fz=st.floats(-50, 200))
def test_friction_positive_homogeneity(s, fx, fy, fz):
    m = RobotModel()
    f = np.array([fx, fy, fz])
    assert np.allclose(friction_cone_residuals(s * f, m),
                       s * friction_cone_residuals(f, m),
                       rtol=1e-9, atol=1e-9)


def test_kinematic_box_frozen(model):
    yaw = 0.4
    r = np.array([1.0, 2.0, 0.7])
    offset = np.array([0.05, -0.02, 0.03])
    p_c = r + rotz(yaw) @ (model.nominal_feet[1] + offset)
    res = kinematic_box_residual(p_c, r, yaw, 1, model)
    expected = np.array([0.05 - 0.15, -0.02 - 0.10, 0.03 - 0.10,
                         -0.05 - 0.15, 0.02 - 0.10, -0.03 - 0.10])
    assert np.allclose(res, expected, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(yaw=st.floats(-np.pi, np.pi),
       dx=st.floats(-0.2, 0.2), dy=st.floats(-0.2, 0.2), dz=st.floats(-0.2, 0.2),
       foot=st.integers(0, 3))
def test_kinematic_box_yaw_invariance(yaw, dx, dy, dz, foot):
    m = RobotModel()
    r = np.array([0.3, -0.2, 0.7])
    offset = np.array([dx, dy, dz])
    p0 = r + m.nominal_feet[foot] + offset
    res0 = kinematic_box_residual(p0, r, 0.0, foot, m)
    p1 = r + rotz(yaw) @ (m.nominal_feet[foot] + offset)
    res1 = kinematic_box_residual(p1, r, yaw, foot, m)
    assert np.allclose(res0, res1, atol=1e-9)


def test_steering_bound_frozen(model):
    res = steering_bound_residual(0.3, 0.1, model)
    assert np.allclose(res, [-2.618 - 0.2, 0.2 - 2.618], atol=1e-12)
    hot = steering_bound_residual(2.9, 0.1, model)
    assert hot[1] > 0


def test_contact_and_lift_residual_identity(model):
    assert contact_level_residual(0.02, model) == pytest.approx(0.02)
    assert np.allclose(lifted_force_residual(np.array([1.0, -2.0, 3.0])),
                       [1.0, -2.0, 3.0])


def test_steering_group_measures_relative_angle(drive_problem):
    lay = drive_problem.layout
    z = drive_problem.z0.copy()
    group = {g.name: g for g in drive_problem.constraints.groups}["steering_range"]
    base = group.values(z)
    assert np.all(base < 0)
    yaw_shift = 0.5
    for k in range(lay.N):
        for node in range(lay.d + 1):
            z[lay.state_index(k, node, 5)] += yaw_shift
            for i in range(4):
                z[lay.state_index(k, node, 14 + 3 * i)] += yaw_shift
    assert np.allclose(group.values(z), base, atol=1e-9)


def test_bounds_pitch_guard(drive_problem, model):
    lay = drive_problem.layout
    lb, ub = drive_problem.lb, drive_problem.ub
    cap = np.pi / 2 - 0.1
    for k in range(lay.N):
        for node in range(lay.d + 1):
            if k == 0 and node == 0:
                continue  # overridden by the initial-state pin
            c = lay.state_index(k, node, 4)
            assert lb[c] == pytest.approx(-cap)
            assert ub[c] == pytest.approx(cap)
    c0 = lay.state_index(0, 0, 4)
    assert lb[c0] == ub[c0] == drive_problem.x0[4]


def test_bounds_contact_pins(crawl_problem, model):
    lay = crawl_problem.layout
    lb, ub = crawl_problem.lb, crawl_problem.ub
    for k in range(lay.N):
        for i in range(4):
            fz_cols = [lay.footz_index(k, node, i) for node in range(FOOTZ_NODES)]
            u2_cols = [lay.u2_index(k, node, i) for node in range(lay.d)]
            if lay.contact_mask[k, i]:
                for c in fz_cols:
                    assert lb[c] == ub[c] == model.z_ground
                for c in u2_cols:
                    assert lb[c] == ub[c] == 0.0
                c = lay.u1_index(k, lay.force_col(i, 2))
                assert lb[c] == 0.0
            else:
                for a in range(3):
                    c = lay.u1_index(k, lay.force_col(i, a))
                    assert lb[c] == ub[c] == 0.0


def test_bounds_terminal_wheel_stop(drive_problem):
    lay = drive_problem.layout
    lb, ub = drive_problem.lb, drive_problem.ub
    for i in range(4):
        c = lay.u1_index(lay.N - 1, lay.v_col(i))
        assert lb[c] == ub[c] == 0.0


def test_bounds_actuator_ranges(drive_problem, model):
    lay = drive_problem.layout
    lb, ub = drive_problem.lb, drive_problem.ub
    for k in range(lay.N):
        for i in range(4):
            c = lay.u1_index(k, lay.sigma_dot_col(i))
            assert lb[c] == model.sigma_dot_range[0]
            assert ub[c] == model.sigma_dot_range[1]
            if k < lay.N - 1:
                c = lay.u1_index(k, lay.v_col(i))
                assert lb[c] == model.v_range[0]
                assert ub[c] == model.v_range[1]


def test_bounds_initial_state_pin(drive_problem):
    lay = drive_problem.layout
    lb, ub = drive_problem.lb, drive_problem.ub
    x0 = drive_problem.x0
    from hlto.constraints import PI2_OF_STATE
    for s in range(28):
        p = PI2_OF_STATE[s]
        if p >= 0:
            c = lay.state_index(0, 0, p)
            assert lb[c] == ub[c] == x0[s]


def test_bounds_reject_conflicting_initial_height(crawl_problem, model):
    bad = crawl_problem.x0.copy()
    bad[14] = 0.05
    with pytest.raises(ValueError):
        assemble_bounds(crawl_problem.layout, model, bad)


def test_initial_guess_nearly_feasible(drive_problem):
    z0 = drive_problem.z0
    cons = drive_problem.constraints
    by_name = {g.name: g for g in cons.groups}
    assert np.max(np.abs(by_name["initial_state"].values(z0))) < 1e-9
    assert np.max(np.abs(by_name["contact_level"].values(z0))) < 1e-12
    assert np.max(by_name["kinematic_box"].values(z0)) < 1e-9
    assert np.max(by_name["friction_cone"].values(z0)) < 1e-9
    clipped = np.clip(z0, drive_problem.lb, drive_problem.ub)
    off_box = np.nonzero(np.abs(clipped - z0) > 1e-12)[0]
    terminal_v = {lay.u1_index(lay.N - 1, lay.v_col(i)) for i in range(4)
                  for lay in [drive_problem.layout]}
    assert set(off_box.tolist()) <= terminal_v
    assert np.max(np.abs(clipped - z0), initial=0.0) < 0.1
