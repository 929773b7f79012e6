"""Collocation grid, bases, layout packing and spline evaluation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlto import (GridMismatch, SplineTrajectory, TranscriptionConfig,
                  UnsupportedOrder, VariableLayout, gauss_legendre_nodes,
                  gauss_legendre_weights, initial_guess, nominal_state,
                  pure_drive_schedule, resample_decision,
                  trajectory_from_decision)
from hlto.gait import CONTACT, LIFT, GaitSchedule, Phase, crawl_schedule
from hlto.transcription import FOOTZ_NODES, PI2_DIM, LagrangeBasis


def shifted_legendre(d):
    """Shifted Legendre polynomial on [0, 1] via the three-term recurrence."""
    x = np.polynomial.polynomial.Polynomial([-1.0, 2.0])  # maps [0,1] to [-1,1]
    p_prev = np.polynomial.polynomial.Polynomial([1.0])
    p = x
    for n in range(1, d):
        p, p_prev = ((2 * n + 1) * x * p - n * p_prev) / (n + 1), p
    return p if d >= 1 else p_prev


def test_nodes_are_legendre_roots():
    for d in range(1, 6):
        nodes = gauss_legendre_nodes(d)
        assert len(nodes) == d
        assert np.all((0 < nodes) & (nodes < 1))
        assert np.all(np.diff(nodes) > 0)
        poly = shifted_legendre(d)
        assert np.max(np.abs(poly(nodes))) < 1e-12


def test_weights_positive_and_normalized():
    for d in range(1, 6):
        w = gauss_legendre_weights(d)
        assert np.all(w > 0)
        assert np.isclose(w.sum(), 1.0, atol=1e-14)


@settings(max_examples=80, deadline=None)
@given(d=st.integers(1, 5), data=st.data())
def test_quadrature_exactness_up_to_2d_minus_1(d, data):
    p = data.draw(st.integers(0, 2 * d - 1))
    nodes = gauss_legendre_nodes(d)
    w = gauss_legendre_weights(d)
    assert np.isclose(np.dot(w, nodes ** p), 1.0 / (p + 1), atol=1e-13)


def test_quadrature_not_exact_beyond_2d():
    for d in range(1, 6):
        nodes = gauss_legendre_nodes(d)
        w = gauss_legendre_weights(d)
        assert abs(np.dot(w, nodes ** (2 * d)) - 1.0 / (2 * d + 1)) > 1e-10


def test_unsupported_order():
    with pytest.raises(UnsupportedOrder):
        gauss_legendre_nodes(0)
    with pytest.raises(UnsupportedOrder):
        gauss_legendre_weights(6)
    with pytest.raises(UnsupportedOrder):
        TranscriptionConfig(n_intervals=2, horizon=1.0, degree=7)


def test_lagrange_basis_interpolates():
    pts = (0.0, 0.3, 0.7, 1.0)
    basis = LagrangeBasis(pts)
    assert np.allclose(basis.eval_matrix(np.array(pts)), np.eye(4), atol=1e-13)
    taus = np.linspace(0, 1, 17)
    coeffs = np.array([1.0, -2.0, 0.5, 3.0])
    vals = basis.eval_matrix(taus) @ coeffs
    poly = np.polynomial.polynomial.Polynomial
    fit = np.polynomial.polynomial.polyfit(np.array(pts), coeffs, 3)
    assert np.allclose(vals, np.polynomial.polynomial.polyval(taus, fit), atol=1e-11)
    eps = 1e-7
    dvals = basis.deriv_matrix(taus) @ coeffs
    fd = (basis.eval_matrix(taus + eps) - basis.eval_matrix(taus - eps)) @ coeffs / (2 * eps)
    assert np.allclose(dvals, fd, atol=1e-6)


def layout(n=4, horizon=0.8, degree=3):
    cfg = TranscriptionConfig(n_intervals=n, horizon=horizon, degree=degree)
    return VariableLayout(cfg, pure_drive_schedule(horizon))


def test_block_layout_offsets():
    lay = layout()
    assert lay.block == 24 * 4 + 3 * 4 + 20 + 3 * 4
    assert lay.n == 4 * lay.block
    assert lay.off_u1 == 24 * 4 + 12
    assert lay.state_index(0, 0, 0) == 0
    assert lay.state_index(1, 0, 0) == lay.block
    assert lay.u1_index(2, 5) == 2 * lay.block + lay.off_u1 + 5


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_pack_split_round_trip(seed):
    lay = layout()
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(lay.n)
    xs, fz, u1, u2 = lay.split(z)
    assert xs.shape == (4, 4, PI2_DIM)
    assert fz.shape == (4, FOOTZ_NODES, 4)
    assert u1.shape == (4, 20)
    assert u2.shape == (4, 3, 4)
    assert np.array_equal(lay.pack(xs, fz, u1, u2), z)


def test_node_times_grid():
    lay = layout(n=2, horizon=1.0)
    times = lay.node_times()
    assert times.shape == (2, 4)
    assert np.isclose(times[0, 0], 0.0)
    assert np.isclose(times[1, 0], 0.5)
    assert np.all(np.diff(times.ravel()) > 0)


def test_grid_mismatch_raises():
    cfg = TranscriptionConfig(n_intervals=4, horizon=0.8, degree=3)
    with pytest.raises(GridMismatch):
        VariableLayout(cfg, pure_drive_schedule(1.0))
    off_knot = GaitSchedule(
        horizon=0.8,
        feet=(
            (Phase(CONTACT, 0.0, 0.3), Phase(LIFT, 0.3, 0.5), Phase(CONTACT, 0.5, 0.8)),
        ) + ((Phase(CONTACT, 0.0, 0.8),),) * 3,
    )
    with pytest.raises(GridMismatch):
        VariableLayout(cfg, off_knot)


def exact_cubic_decision(lay):
    """Decision vector whose nodal values follow fixed cubics of time."""
    coeff = np.linspace(0.1, 1.3, PI2_DIM)
    times = lay.node_times()

    def cubic(dim, t):
        return coeff[dim] * (t ** 3 - 0.4 * t + 0.2) + dim * 0.01

    xs = np.empty((lay.N, lay.d + 1, PI2_DIM))
    for dim in range(PI2_DIM):
        xs[:, :, dim] = cubic(dim, times)
    fz_times = lay.footz_node_times()
    fz = np.empty((lay.N, FOOTZ_NODES, 4))
    for i in range(4):
        fz[:, :, i] = 0.3 * fz_times ** 2 - 0.1 * fz_times + 0.05 * i
    u1 = np.zeros((lay.N, 20))
    u2 = np.zeros((lay.N, lay.d, 4))
    return lay.pack(xs, fz, u1, u2), cubic


def test_spline_reproduces_nodal_polynomials():
    lay = layout(n=5, horizon=1.0)
    z, cubic = exact_cubic_decision(lay)
    traj = trajectory_from_decision(z, lay)
    ts = np.linspace(0, 1.0, 101)
    states = traj.sample(ts)
    from hlto.transcription import STATE_OF_PI2
    for j, dim in enumerate(STATE_OF_PI2):
        assert np.allclose(states[:, dim], cubic(j, ts), atol=1e-10)
    footz = traj.sample(ts)[:, [14, 18, 22, 26]]
    for i in range(4):
        assert np.allclose(footz[:, i], 0.3 * ts ** 2 - 0.1 * ts + 0.05 * i,
                           atol=1e-10)
    rate = traj.foot_z_rate(ts)
    assert np.allclose(rate[:, 2], 0.6 * ts - 0.1, atol=1e-9)
    drate = traj.pi2_rate(ts)
    assert np.allclose(drate[:, 0], 0.1 * (3 * ts ** 2 - 0.4), atol=1e-9)


def test_u1_left_interval_ownership():
    lay = layout(n=4, horizon=0.8)
    rng = np.random.default_rng(5)
    z = rng.standard_normal(lay.n)
    traj = trajectory_from_decision(z, lay)
    u1 = traj.u1_at([0.0, 0.19, 0.2, 0.41, 0.8])
    _, _, u1_blocks, _ = lay.split(z)
    assert np.array_equal(u1[0], u1_blocks[0])
    assert np.array_equal(u1[1], u1_blocks[0])
    assert np.array_equal(u1[2], u1_blocks[0])
    assert np.array_equal(u1[3], u1_blocks[2])
    assert np.array_equal(u1[4], u1_blocks[3])


def test_trajectory_out_of_horizon():
    lay = layout()
    traj = trajectory_from_decision(np.zeros(lay.n), lay)
    from hlto import OutOfHorizon
    with pytest.raises(OutOfHorizon):
        traj.sample([0.9])


def test_trajectory_json_round_trip():
    lay = layout(n=3, horizon=0.6)
    rng = np.random.default_rng(7)
    traj = trajectory_from_decision(rng.standard_normal(lay.n), lay)
    again = SplineTrajectory.from_json(traj.to_json())
    ts = np.linspace(0, 0.6, 23)
    assert np.allclose(traj.sample(ts), again.sample(ts), atol=0)
    assert again.horizon == traj.horizon


def test_resample_identity():
    lay = layout(n=4, horizon=0.8)
    z, _ = exact_cubic_decision(lay)
    traj = trajectory_from_decision(z, lay)
    z2 = resample_decision(traj, lay)
    xs, fz, _, _ = lay.split(z)
    xs2, fz2, _, _ = lay.split(z2)
    assert np.allclose(xs, xs2, atol=1e-11)
    assert np.allclose(fz, fz2, atol=1e-11)
    traj2 = trajectory_from_decision(z2, lay)
    ts = np.linspace(0, 0.8, 41)
    assert np.allclose(traj.sample(ts), traj2.sample(ts), atol=1e-10)


def test_resample_finer_preserves_states():
    coarse = layout(n=2, horizon=0.8)
    fine = layout(n=8, horizon=0.8)
    z, _ = exact_cubic_decision(coarse)
    traj = trajectory_from_decision(z, coarse)
    z_fine = resample_decision(traj, fine)
    traj_fine = trajectory_from_decision(z_fine, fine)
    ts = np.linspace(0, 0.8, 33)
    assert np.allclose(traj.sample(ts), traj_fine.sample(ts), atol=1e-9)


def test_initial_guess_shape_and_grounding(model):
    horizon, n = 0.8, 4
    sched = crawl_schedule(horizon, 1, 0.4, grid=n)
    cfg = TranscriptionConfig(n_intervals=n, horizon=horizon, degree=3)
    lay = VariableLayout(cfg, sched)
    stand = nominal_state(model)

    class Duck:
        goal_position = stand.r + np.array([0.05, 0.0, 0.0])
        goal_theta = np.zeros(3)
        schedule = sched

        def model(self):
            return model

        def initial_state_vector(self, m):
            return stand.as_vector()

    z = initial_guess(Duck(), lay)
    assert z.shape == (lay.n,)
    assert np.all(np.isfinite(z))
    xs, fz, u1, u2 = lay.split(z)
    for k in range(n):
        for i in range(4):
            if lay.contact_mask[k, i]:
                assert np.allclose(fz[k, :, i], model.z_ground, atol=1e-12)
    total_fz = u1[0, 2:12:3].sum()
    assert np.isclose(total_fz, -model.mass * model.gravity[2], rtol=1e-6)
