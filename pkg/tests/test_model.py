"""Dynamics model checks against independent oracles."""

import json

import numpy as np
import pytest

from hlto import (NUM_FEET, RobotModel, SingularPitch, State, nominal_state,
                  rolling_residual, state_derivative_vector, wheel_spin_rate)
from hlto.model import (Control, euler_accel, euler_rate_matrix,
                        euler_rate_matrix_dot, euler_rates_to_omega,
                        state_derivative)


def standing_vector(model):
    return nominal_state(model).as_vector()


def equilibrium_controls(model):
    u1 = np.zeros(20)
    for i in range(NUM_FEET):
        u1[3 * i + 2] = -model.mass * model.gravity[2] / NUM_FEET
    return u1


def test_equilibrium_is_fixed_point(model):
    x = standing_vector(model)
    dx = state_derivative_vector(x, equilibrium_controls(model), np.zeros(4), model)
    assert np.linalg.norm(dx) < 1e-12


def test_free_fall_matches_gravity(model):
    x = standing_vector(model)
    x[6:9] = [0.1, -0.2, 0.3]
    dx = state_derivative_vector(x, np.zeros(20), np.zeros(4), model)
    assert np.allclose(dx[0:3], x[6:9])
    assert np.allclose(dx[6:9], model.gravity)
    assert np.allclose(dx[9:12], 0.0)
    assert np.allclose(dx[12:], 0.0)


def test_pure_torque_angular_acceleration(model):
    # one vertical force pair offset fore/aft makes a pure pitch torque at
    # zero attitude, where Euler accelerations equal body accelerations
    x = standing_vector(model)
    u1 = np.zeros(20)
    u1[2] = 50.0  # LF up
    state = State.from_vector(x)
    control = Control.from_vectors(u1, np.zeros(4))
    torque = np.zeros(3)
    for i in range(NUM_FEET):
        arm = state.feet[i].p_c - state.r
        torque += np.cross(arm, control.f_c[i])
    expected = np.linalg.solve(model.inertia, torque)
    dx = state_derivative_vector(x, u1, np.zeros(4), model)
    assert np.allclose(dx[9:12], expected, atol=1e-12)


def test_translation_decouples_from_torque(model):
    x = standing_vector(model)
    u1 = np.zeros(20)
    u1[0:3] = [5.0, -2.0, 40.0]
    dx = state_derivative_vector(x, u1, np.zeros(4), model)
    assert np.allclose(dx[6:9], model.gravity + u1[0:3] / model.mass)


def test_euler_rate_matrix_determinant():
    rng = np.random.default_rng(11)
    for _ in range(200):
        theta = rng.uniform(-1.3, 1.3, 3)
        C = euler_rate_matrix(theta)
        assert abs(np.linalg.det(C) - np.cos(theta[1])) < 1e-12


def test_euler_rate_matrix_dot_matches_fd():
    rng = np.random.default_rng(12)
    for _ in range(50):
        theta = rng.uniform(-1.0, 1.0, 3)
        theta_dot = rng.standard_normal(3)
        eps = 1e-7
        fd = (euler_rate_matrix(theta + eps * theta_dot)
              - euler_rate_matrix(theta - eps * theta_dot)) / (2 * eps)
        assert np.allclose(euler_rate_matrix_dot(theta, theta_dot), fd, atol=1e-8)


def test_omega_mapping_matches_matrix():
    rng = np.random.default_rng(13)
    for _ in range(100):
        theta = rng.uniform(-1.2, 1.2, 3)
        theta_dot = rng.standard_normal(3)
        omega = euler_rates_to_omega(theta, theta_dot)
        assert np.allclose(omega, euler_rate_matrix(theta) @ theta_dot, atol=1e-13)


def test_euler_accel_round_trip():
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(1000):
        theta = rng.uniform(-1.2, 1.2, 3)
        theta_dot = rng.standard_normal(3)
        theta_ddot = rng.standard_normal(3)
        C = euler_rate_matrix(theta)
        Cd = euler_rate_matrix_dot(theta, theta_dot)
        omega_dot = C @ theta_ddot + Cd @ theta_dot
        back = euler_accel(theta, theta_dot, omega_dot)
        worst = max(worst, np.abs(back - theta_ddot).max())
    assert worst < 1e-9


def test_euler_accel_guards_singularity():
    theta = np.array([0.0, np.pi / 2 - 0.01, 0.0])
    with pytest.raises(SingularPitch):
        euler_accel(theta, np.zeros(3), np.zeros(3))


def test_rolling_residual_identity_on_derivative(model):
    rng = np.random.default_rng(15)
    for _ in range(50):
        x = standing_vector(model)
        x[6:12] = rng.standard_normal(6) * 0.2
        for i in range(NUM_FEET):
            x[15 + 4 * i] = rng.uniform(-2.0, 2.0)
        u1 = rng.standard_normal(20)
        dx = state_derivative_vector(x, u1, rng.standard_normal(4), model)
        for i in range(NUM_FEET):
            res = rolling_residual(dx[12 + 4 * i], dx[13 + 4 * i], x[15 + 4 * i])
            assert abs(res) < 1e-14


def test_wheel_spin_rate(model):
    sigma = 0.7
    speed = 0.35
    p_dot = np.array([speed * np.cos(sigma), speed * np.sin(sigma), 0.0])
    assert np.isclose(wheel_spin_rate(p_dot, sigma, model),
                      speed / model.wheel_radius)
    lateral = np.array([-np.sin(sigma), np.cos(sigma), 0.0])
    assert abs(wheel_spin_rate(lateral, sigma, model)
               - rolling_residual(lateral[0], lateral[1], sigma + np.pi / 2)
               / model.wheel_radius) < 1e-12


def test_foot_rates_follow_heading(model):
    x = standing_vector(model)
    u1 = np.zeros(20)
    u2 = np.array([0.05, -0.02, 0.0, 0.01])
    for i in range(NUM_FEET):
        x[15 + 4 * i] = 0.3 * i
        u1[12 + i] = 0.5 + 0.1 * i
        u1[16 + i] = -0.2 + 0.1 * i
    dx = state_derivative_vector(x, u1, u2, model)
    for i in range(NUM_FEET):
        v, sig = u1[12 + i], x[15 + 4 * i]
        assert np.isclose(dx[12 + 4 * i], v * np.cos(sig))
        assert np.isclose(dx[13 + 4 * i], v * np.sin(sig))
        assert np.isclose(dx[14 + 4 * i], u2[i])
        assert np.isclose(dx[15 + 4 * i], u1[16 + i])


def test_state_derivative_object_vector_agree(model):
    rng = np.random.default_rng(16)
    x = standing_vector(model)
    x[3:6] = [0.1, -0.2, 0.4]
    x[6:12] = rng.standard_normal(6) * 0.3
    u1 = rng.standard_normal(20) * 10
    u2 = rng.standard_normal(4) * 0.1
    dx_vec = state_derivative_vector(x, u1, u2, model)
    ds = state_derivative(State.from_vector(x), Control.from_vectors(u1, u2), model)
    assert np.allclose(dx_vec, ds, atol=1e-13)


def test_pitch_guard_in_state_derivative(model):
    x = standing_vector(model)
    x[4] = np.pi / 2 - 0.05
    with pytest.raises(SingularPitch):
        state_derivative_vector(x, np.zeros(20), np.zeros(4), model)


def test_robot_json_round_trip(model):
    again = RobotModel.from_json(model.to_json())
    assert np.allclose(again.inertia, model.inertia)
    assert np.allclose(again.nominal_feet, model.nominal_feet)
    assert again.mass == model.mass
    with pytest.raises(ValueError):
        RobotModel.from_json({"mass": 10.0, "bogus_key": 1})


def test_state_vector_round_trip(model):
    x = standing_vector(model)
    x[3:6] = [0.05, -0.1, 0.2]
    state = State.from_vector(x)
    assert np.allclose(state.as_vector(), x)


def test_model_validation():
    with pytest.raises(ValueError):
        RobotModel(mass=-1.0)
    with pytest.raises(ValueError):
        RobotModel(box_bounds=np.array([0.1, -0.1, 0.1]))
    with pytest.raises(ValueError):
        RobotModel(z_fly=-0.1)
