"""Orthogonal collocation transcription of the locomotion optimal control problem.

Each of N equal intervals carries an independent block of decision variables
(the lifted formulation; continuity between blocks is an explicit constraint):

  - nodal values of a degree-d polynomial for 24 state dims (everything except
    foot heights) at the points {0} union the d Gauss-Legendre nodes,
  - nodal values of a degree-2 polynomial for the 4 foot heights at
    {0} union the 2 Gauss-Legendre nodes,
  - one constant control slab u1 = [forces (12), wheel speeds (4), steer rates (4)],
  - free vertical foot velocities u2 at each of the d collocation nodes.

Collocation residuals are scaled by the interval length h, i.e. they compare
d(poly)/dtau against h * f(state, control).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.optimize
from numpy.polynomial import Polynomial

from . import ad
from .gait import GaitSchedule, OutOfHorizon
from .model import NUM_FEET, RobotModel, State, nominal_state

STATE_DIM = 28
PI2_DIM = 24
U1_DIM = 20
FOOTZ_NODES = 3  # quadratic foot-height polynomial: {0} + 2 GL nodes

# 24 polynomial dims in block order -> position in the 28-dim state vector
STATE_OF_PI2 = np.array(
    list(range(12)) + [12 + 4 * i + j for i in range(4) for j in (0, 1, 3)]
)
STATE_OF_FOOTZ = np.array([14 + 4 * i for i in range(4)])
PI2_OF_STATE = np.full(STATE_DIM, -1)
PI2_OF_STATE[STATE_OF_PI2] = np.arange(PI2_DIM)


class UnsupportedOrder(ValueError):
    """Collocation order outside the supported range."""


class GridMismatch(ValueError):
    """Gait phase boundaries do not land on the planning grid."""


def gauss_legendre_nodes(d: int) -> np.ndarray:
    """Gauss-Legendre collocation nodes on (0, 1)."""
    if not 1 <= d <= 5:
        raise UnsupportedOrder(f"collocation order {d} not in 1..5")
    x, _ = np.polynomial.legendre.leggauss(d)
    return (x + 1.0) / 2.0


def gauss_legendre_weights(d: int) -> np.ndarray:
    """Quadrature weights matching gauss_legendre_nodes; they sum to 1."""
    if not 1 <= d <= 5:
        raise UnsupportedOrder(f"collocation order {d} not in 1..5")
    _, w = np.polynomial.legendre.leggauss(d)
    return w / 2.0


class LagrangeBasis:
    """Lagrange polynomials on a fixed set of points, with derivatives."""

    def __init__(self, points: Sequence[float]):
        self.points = np.asarray(points, dtype=float)
        self.polys = []
        for i, pi in enumerate(self.points):
            p = Polynomial([1.0])
            for j, pj in enumerate(self.points):
                if j != i:
                    p = p * Polynomial([-pj, 1.0]) / (pi - pj)
            self.polys.append(p)
        self.derivs = [p.deriv() for p in self.polys]

    def eval_matrix(self, taus) -> np.ndarray:
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        return np.stack([p(taus) for p in self.polys], axis=-1)

    def deriv_matrix(self, taus) -> np.ndarray:
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        return np.stack([p(taus) for p in self.derivs], axis=-1)


_BASIS_CACHE: dict = {}


def _basis(points: tuple) -> LagrangeBasis:
    if points not in _BASIS_CACHE:
        _BASIS_CACHE[points] = LagrangeBasis(points)
    return _BASIS_CACHE[points]


@dataclass(frozen=True)
class TranscriptionConfig:
    n_intervals: int
    horizon: float
    degree: int = 3

    def __post_init__(self):
        if self.n_intervals < 1:
            raise ValueError("need at least one interval")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.degree not in (2, 3, 4):
            raise UnsupportedOrder(f"state polynomial degree {self.degree} not in 2..4")


class VariableLayout:
    """Index bookkeeping for the flat decision vector plus cached basis data."""

    def __init__(self, config: TranscriptionConfig, schedule: GaitSchedule):
        if abs(schedule.horizon - config.horizon) > 1e-9:
            raise GridMismatch("schedule horizon differs from transcription horizon")
        N, d = config.n_intervals, config.degree
        self.config = config
        self.schedule = schedule
        self.N = N
        self.d = d
        self.T_f = config.horizon
        self.h = config.horizon / N

        tol = 1e-9 * max(1.0, self.T_f)
        for phases in schedule.feet:
            for ph in phases:
                for t in (ph.start, ph.end):
                    if abs(t / self.h - round(t / self.h)) * self.h > tol:
                        raise GridMismatch(
                            f"phase boundary {t} not on the grid of {N} intervals"
                        )

        self.nodes = gauss_legendre_nodes(d)
        self.quad_weights = gauss_legendre_weights(d)
        self.basis2 = _basis((0.0,) + tuple(self.nodes))
        self.basis1 = _basis((0.0,) + tuple(gauss_legendre_nodes(2)))
        self.D2 = self.basis2.deriv_matrix(self.nodes)  # (d, d+1)
        self.E2 = self.basis2.eval_matrix([1.0])[0]  # (d+1,)
        self.P1 = self.basis1.eval_matrix(self.nodes)  # (d, 3)
        self.D1 = self.basis1.deriv_matrix(self.nodes)  # (d, 3)
        self.E1 = self.basis1.eval_matrix([1.0])[0]  # (3,)

        self.off_fz = PI2_DIM * (d + 1)
        self.off_u1 = self.off_fz + 4 * FOOTZ_NODES
        self.off_u2 = self.off_u1 + U1_DIM
        self.block = self.off_u2 + 4 * d
        self.n = N * self.block

        mids = (np.arange(N) + 0.5) * self.h
        self.contact_mask = np.array(
            [[schedule.in_contact(i, t) for i in range(NUM_FEET)] for t in mids]
        )
        self.interval_times = np.arange(N) * self.h

    # -- flat indices --------------------------------------------------------

    def state_index(self, k: int, node: int, dim: int) -> int:
        return k * self.block + node * PI2_DIM + dim

    def footz_index(self, k: int, node: int, foot: int) -> int:
        return k * self.block + self.off_fz + node * 4 + foot

    def u1_index(self, k: int, j: int) -> int:
        return k * self.block + self.off_u1 + j

    def u2_index(self, k: int, node: int, foot: int) -> int:
        return k * self.block + self.off_u2 + node * 4 + foot

    def force_col(self, i: int, axis: int) -> int:
        return 3 * i + axis

    def v_col(self, i: int) -> int:
        return 12 + i

    def sigma_dot_col(self, i: int) -> int:
        return 16 + i

    # -- block views ----------------------------------------------------------

    def split(self, z):
        """Decision vector -> (xs, fz, u1, u2) with leading interval axis."""
        N, d = self.N, self.d
        zb = z.reshape(N, self.block)
        xs = zb[:, : self.off_fz].reshape(N, d + 1, PI2_DIM)
        fz = zb[:, self.off_fz : self.off_u1].reshape(N, FOOTZ_NODES, 4)
        u1 = zb[:, self.off_u1 : self.off_u2]
        u2 = zb[:, self.off_u2 :].reshape(N, d, 4)
        return xs, fz, u1, u2

    def pack(self, xs, fz, u1, u2) -> np.ndarray:
        z = np.empty((self.N, self.block))
        z[:, : self.off_fz] = xs.reshape(self.N, -1)
        z[:, self.off_fz : self.off_u1] = fz.reshape(self.N, -1)
        z[:, self.off_u1 : self.off_u2] = u1
        z[:, self.off_u2 :] = u2.reshape(self.N, -1)
        return z.reshape(-1)

    def node_times(self) -> np.ndarray:
        """(N, d+1) absolute times of the nodal points of every interval."""
        taus = np.concatenate([[0.0], self.nodes])
        return self.interval_times[:, None] + taus[None, :] * self.h

    def footz_node_times(self) -> np.ndarray:
        taus = np.concatenate([[0.0], gauss_legendre_nodes(2)])
        return self.interval_times[:, None] + taus[None, :] * self.h


def build_layout(config: TranscriptionConfig, schedule: GaitSchedule) -> VariableLayout:
    return VariableLayout(config, schedule)


# ---------------------------------------------------------------------------
# residual cores (batched over intervals, Dual-capable)


def _combine(M: np.ndarray, nodal):
    """Contract constant (rows, p) against nodal (N, p, w) -> (N, rows, w)."""
    if isinstance(nodal, ad.Dual):
        return ad.Dual(np.matmul(M, nodal.val), np.matmul(M, nodal.tan))
    return np.matmul(M, nodal)


def _node_components(pts, fzn, u1, u2):
    """Kernel inputs from node values; shapes broadcast over (N, d)."""
    return {
        "r": [pts[:, :, 0], pts[:, :, 1], pts[:, :, 2]],
        "theta": [pts[:, :, 3], pts[:, :, 4], pts[:, :, 5]],
        "r_dot": [pts[:, :, 6], pts[:, :, 7], pts[:, :, 8]],
        "theta_dot": [pts[:, :, 9], pts[:, :, 10], pts[:, :, 11]],
        "px": [pts[:, :, 12 + 3 * i] for i in range(4)],
        "py": [pts[:, :, 13 + 3 * i] for i in range(4)],
        "sigma": [pts[:, :, 14 + 3 * i] for i in range(4)],
        "pz": [fzn[:, :, i] for i in range(4)],
        "fx": [u1[:, 3 * i][:, None] for i in range(4)],
        "fy": [u1[:, 3 * i + 1][:, None] for i in range(4)],
        "fz": [u1[:, 3 * i + 2][:, None] for i in range(4)],
        "v": [u1[:, 12 + i][:, None] for i in range(4)],
        "sigma_dot": [u1[:, 16 + i][:, None] for i in range(4)],
        "u2": [u2[:, :, i] for i in range(4)],
    }


def collocation_core(xs, fz, u1, u2, layout: VariableLayout, model: RobotModel):
    """All-interval collocation residuals: ((N, d, 24), (N, d, 4))."""
    from .model import _state_rate_components

    h = layout.h
    pts = xs[:, 1:, :]
    dxs = _combine(layout.D2, xs)
    fzn = _combine(layout.P1, fz)
    dfz = _combine(layout.D1, fz)
    comp = _node_components(pts, fzn, u1, u2)
    rates = _state_rate_components(comp, model, eps=0.1)
    res2 = ad.stack(
        [dxs[:, :, s] - h * rates[STATE_OF_PI2[s]] for s in range(PI2_DIM)], axis=-1
    )
    res1 = ad.stack([dfz[:, :, i] - h * u2[:, :, i] for i in range(4)], axis=-1)
    return res2, res1


def collocation_residuals(interval_vars, layout: VariableLayout, model: RobotModel):
    """Residual vector of one interval block, ordered [state rows, foot-z rows]."""
    d = layout.d
    xs = interval_vars[: layout.off_fz].reshape(1, d + 1, PI2_DIM)
    fz = interval_vars[layout.off_fz : layout.off_u1].reshape(1, FOOTZ_NODES, 4)
    u1 = interval_vars[layout.off_u1 : layout.off_u2].reshape(1, U1_DIM)
    u2 = interval_vars[layout.off_u2 :].reshape(1, d, 4)
    res2, res1 = collocation_core(xs, fz, u1, u2, layout, model)
    return ad.concatenate(
        [res2.reshape(d * PI2_DIM), res1.reshape(d * 4)], axis=0
    )


def _end_state28(xs, fz, layout):
    """Polynomial values at tau=1 for each interval, in state order (N, 28)."""
    end24 = None
    for i in range(layout.d + 1):
        term = layout.E2[i] * xs[:, i, :]
        end24 = term if end24 is None else end24 + term
    endz = None
    for i in range(FOOTZ_NODES):
        term = layout.E1[i] * fz[:, i, :]
        endz = term if endz is None else endz + term
    cols = []
    for s in range(STATE_DIM):
        p = PI2_OF_STATE[s]
        if p >= 0:
            cols.append(end24[:, p])
        else:
            cols.append(endz[:, list(STATE_OF_FOOTZ).index(s)])
    return ad.stack(cols, axis=-1)


def _start_state28(xs, fz):
    cols = []
    for s in range(STATE_DIM):
        p = PI2_OF_STATE[s]
        if p >= 0:
            cols.append(xs[:, 0, p])
        else:
            cols.append(fz[:, 0, list(STATE_OF_FOOTZ).index(s)])
    return ad.stack(cols, axis=-1)


def continuity_core(xs, fz, layout: VariableLayout):
    """Knot mismatches pi_k(1) - x_{k+1}(0), state order, shape (N-1, 28)."""
    ends = _end_state28(xs[:-1], fz[:-1], layout)
    starts = _start_state28(xs[1:], fz[1:])
    return ends - starts


def continuity_residuals(vars_k, vars_k1, layout: VariableLayout):
    """28-dim knot mismatch between two adjacent interval blocks."""
    z2 = ad.concatenate([vars_k, vars_k1], axis=0)
    xs, fz, _, _ = layout.split(z2)
    return continuity_core(xs, fz, layout).reshape(STATE_DIM)


# ---------------------------------------------------------------------------
# trajectories


def _owning_intervals(ts: np.ndarray, h: float, N: int):
    """Left-convention interval ownership: knots belong to the interval ending there."""
    ks = np.ceil(ts / h - 1e-9).astype(int) - 1
    ks = np.clip(ks, 0, N - 1)
    taus = ts / h - ks
    return ks, taus


@dataclass
class SplineTrajectory:
    """Piecewise-polynomial solution: per-interval nodal values plus controls."""

    horizon: float
    degree: int
    xs: np.ndarray  # (N, d+1, 24)
    fz: np.ndarray  # (N, 3, 4)
    u1: np.ndarray  # (N, 20)
    u2: np.ndarray  # (N, d, 4)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.fz = np.asarray(self.fz, dtype=float)
        self.u1 = np.asarray(self.u1, dtype=float)
        self.u2 = np.asarray(self.u2, dtype=float)
        self.N = self.xs.shape[0]
        self.h = self.horizon / self.N
        self._b2 = _basis((0.0,) + tuple(gauss_legendre_nodes(self.degree)))
        self._b1 = _basis((0.0,) + tuple(gauss_legendre_nodes(2)))

    def _check(self, ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if np.any(ts < -1e-9) or np.any(ts > self.horizon + 1e-9):
            raise OutOfHorizon(f"time outside [0, {self.horizon}]")
        return ts

    def sample(self, ts) -> np.ndarray:
        """States at the given times, shape (len(ts), 28)."""
        ts = self._check(ts)
        ks, taus = _owning_intervals(ts, self.h, self.N)
        L2 = self._b2.eval_matrix(taus)
        L1 = self._b1.eval_matrix(taus)
        out = np.empty((len(ts), STATE_DIM))
        out[:, STATE_OF_PI2] = np.einsum("tp,tpw->tw", L2, self.xs[ks])
        out[:, STATE_OF_FOOTZ] = np.einsum("tp,tpw->tw", L1, self.fz[ks])
        return out

    def state28(self, t: float) -> np.ndarray:
        return self.sample([t])[0]

    def foot_z_rate(self, ts) -> np.ndarray:
        """d/dt of the foot-height polynomials, shape (len(ts), 4)."""
        ts = self._check(ts)
        ks, taus = _owning_intervals(ts, self.h, self.N)
        D1 = self._b1.deriv_matrix(taus)
        return np.einsum("tp,tpw->tw", D1, self.fz[ks]) / self.h

    def pi2_rate(self, ts) -> np.ndarray:
        """d/dt of the order-d state polynomials, shape (len(ts), 24)."""
        ts = self._check(ts)
        ks, taus = _owning_intervals(ts, self.h, self.N)
        D2 = self._b2.deriv_matrix(taus)
        return np.einsum("tp,tpw->tw", D2, self.xs[ks]) / self.h

    def u1_at(self, ts) -> np.ndarray:
        ts = self._check(ts)
        ks, _ = _owning_intervals(ts, self.h, self.N)
        return self.u1[ks]

    def controls_at(self, ts) -> np.ndarray:
        """(len(ts), 24): the interval's u1 slab plus u2 = d(foot z)/dt."""
        return np.concatenate([self.u1_at(ts), self.foot_z_rate(ts)], axis=1)

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "degree": self.degree,
            "xs": self.xs.tolist(),
            "fz": self.fz.tolist(),
            "u1": self.u1.tolist(),
            "u2": self.u2.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SplineTrajectory":
        return cls(
            horizon=float(data["horizon"]),
            degree=int(data["degree"]),
            xs=np.asarray(data["xs"], dtype=float),
            fz=np.asarray(data["fz"], dtype=float),
            u1=np.asarray(data["u1"], dtype=float),
            u2=np.asarray(data["u2"], dtype=float),
        )

    @classmethod
    def from_file(cls, path) -> "SplineTrajectory":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def trajectory_from_decision(z: np.ndarray, layout: VariableLayout) -> SplineTrajectory:
    xs, fz, u1, u2 = layout.split(np.asarray(z, dtype=float))
    return SplineTrajectory(
        horizon=layout.T_f, degree=layout.d,
        xs=xs.copy(), fz=fz.copy(), u1=u1.copy(), u2=u2.copy(),
    )


def eval_trajectory(trajectory: SplineTrajectory, t: float) -> State:
    """State value object at time t (knots resolve to the left interval)."""
    return State.from_vector(trajectory.state28(t))


# ---------------------------------------------------------------------------
# initial guess


def _yaw_base_to_world(yaw: float) -> np.ndarray:
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _lift_bump(schedule: GaitSchedule, foot: int, t: float, model: RobotModel) -> float:
    for ph in schedule.lift_phases(foot):
        if ph.start <= t <= ph.end:
            s = (t - ph.start) / ph.duration
            return model.z_ground + (model.z_fly - model.z_ground) * 4.0 * s * (1.0 - s)
    return model.z_ground


def _lift_bump_rate(schedule: GaitSchedule, foot: int, t: float, model: RobotModel) -> float:
    for ph in schedule.lift_phases(foot):
        if ph.start <= t <= ph.end:
            s = (t - ph.start) / ph.duration
            return (model.z_fly - model.z_ground) * (4.0 - 8.0 * s) / ph.duration
    return 0.0


def _support_forces(contact: np.ndarray, feet_xy: np.ndarray, com_xy: np.ndarray,
                    weight: float) -> np.ndarray:
    """Vertical force per contact foot balancing weight and CoM torque.

    Nonnegative least squares on [sum w = weight, sum w (p - r) = 0]; feet not
    in contact get zero.
    """
    idx = np.flatnonzero(contact)
    out = np.zeros(len(contact))
    if idx.size == 0:
        return out
    A = np.vstack([
        np.ones(idx.size),
        feet_xy[idx, 0] - com_xy[0],
        feet_xy[idx, 1] - com_xy[1],
    ])
    b = np.array([weight, 0.0, 0.0])
    w, _ = scipy.optimize.nnls(A, b)
    out[idx] = w
    return out


def initial_guess(scenario, layout: VariableLayout) -> np.ndarray:
    """Straight-line interpolation toward the goal with equilibrium forces.

    CoM and yaw interpolate linearly from the initial state to the goal, feet
    track their nominal stance under the interpolated pose, foot heights follow
    parabolic bumps peaking at z_fly over lift windows with matching vertical
    speeds, and contact forces balance weight and torque statically per
    interval.  Steering angles point along each foot's path and wheel speeds
    match its pace, so the rolling conditions start out nearly satisfied and
    the solver is not forced through a costly re-steering detour.
    """
    model = scenario.model()
    x0 = scenario.initial_state_vector(model)
    N, d = layout.N, layout.d
    schedule = layout.schedule

    r0, th0 = x0[0:3], x0[3:6]
    rg = np.asarray(scenario.goal_position, dtype=float)
    thg = np.asarray(scenario.goal_theta, dtype=float)

    def pose(t: float):
        a = t / layout.T_f
        return r0 + a * (rg - r0), th0 + a * (thg - th0)

    xs = np.zeros((N, d + 1, PI2_DIM))
    fz = np.zeros((N, FOOTZ_NODES, 4))
    u1 = np.zeros((N, U1_DIM))
    u2 = np.zeros((N, d, 4))

    rdot = (rg - r0) / layout.T_f
    thdot = (thg - th0) / layout.T_f

    def foot_path_rate(yaw, nom):
        """World-frame xy velocity of a foot pinned to the interpolated pose."""
        c, s = np.cos(yaw), np.sin(yaw)
        return np.array([
            rdot[0] + thdot[2] * (-s * nom[0] - c * nom[1]),
            rdot[1] + thdot[2] * (c * nom[0] - s * nom[1]),
        ])

    t_nodes = layout.node_times()
    sigma = np.zeros((NUM_FEET, N, d + 1))
    for k in range(N):
        for j in range(d + 1):
            yaw = pose(t_nodes[k, j])[1][2]
            for i in range(NUM_FEET):
                rate = foot_path_rate(yaw, model.nominal_feet[i])
                if np.hypot(rate[0], rate[1]) > 1e-9:
                    sigma[i, k, j] = np.arctan2(rate[1], rate[0])
                else:
                    sigma[i, k, j] = yaw
    for i in range(NUM_FEET):
        sigma[i] = np.unwrap(sigma[i].reshape(-1)).reshape(N, d + 1)

    for k in range(N):
        for j in range(d + 1):
            t = t_nodes[k, j]
            r, th = pose(t)
            row = np.empty(PI2_DIM)
            row[0:3] = r
            row[3:6] = th
            row[6:9] = rdot
            row[9:12] = thdot
            rot = _yaw_base_to_world(th[2])
            for i in range(NUM_FEET):
                p = r + rot @ model.nominal_feet[i]
                row[12 + 3 * i] = p[0]
                row[13 + 3 * i] = p[1]
                row[14 + 3 * i] = sigma[i, k, j]
            xs[k, j] = row

    tz_nodes = layout.footz_node_times()
    for k in range(N):
        for j in range(FOOTZ_NODES):
            t = tz_nodes[k, j]
            for i in range(NUM_FEET):
                if schedule.in_contact(i, t):
                    fz[k, j, i] = model.z_ground
                else:
                    fz[k, j, i] = _lift_bump(schedule, i, t, model)

    weight = -model.mass * model.gravity[2]
    v_lo, v_hi = model.v_range
    for k in range(N):
        t_mid = (k + 0.5) * layout.h
        r, th = pose(t_mid)
        rot = _yaw_base_to_world(th[2])
        feet_xy = np.array([(r + rot @ model.nominal_feet[i])[:2] for i in range(NUM_FEET)])
        w = _support_forces(layout.contact_mask[k], feet_xy, r[:2], weight)
        for i in range(NUM_FEET):
            u1[k, 3 * i + 2] = w[i]
            if layout.contact_mask[k, i]:
                pace = np.linalg.norm(foot_path_rate(th[2], model.nominal_feet[i]))
                u1[k, 12 + i] = np.clip(pace, v_lo, v_hi)

    # vertical foot speeds consistent with the bump splines
    for k in range(N):
        for j in range(d):
            t = (k + layout.nodes[j]) * layout.h
            for i in range(NUM_FEET):
                if not schedule.in_contact(i, t):
                    u2[k, j, i] = _lift_bump_rate(schedule, i, t, model)

    # the first nodal point is the initial state, exactly
    xs[0, 0] = x0[STATE_OF_PI2]
    fz[0, 0] = x0[STATE_OF_FOOTZ]
    return layout.pack(xs, fz, u1, u2)


def resample_decision(traj: SplineTrajectory, layout: VariableLayout) -> np.ndarray:
    """Decision vector for ``layout`` tracking an existing trajectory.

    Nodal values sample the trajectory at the new node times, u1 slabs are
    read at interval midpoints, and u2 follows the source foot-height spline
    derivative.  Used to warm-start a fine grid from a coarse solution.
    """
    N, d = layout.N, layout.d
    T_src = traj.horizon
    t2 = np.clip(layout.node_times().reshape(-1), 0.0, T_src)
    xs = traj.sample(t2)[:, STATE_OF_PI2].reshape(N, d + 1, PI2_DIM)
    t1 = np.clip(layout.footz_node_times().reshape(-1), 0.0, T_src)
    fz = traj.sample(t1)[:, STATE_OF_FOOTZ].reshape(N, FOOTZ_NODES, 4)
    t_mid = np.clip((np.arange(N) + 0.5) * layout.h, 0.0, T_src)
    u1 = traj.u1_at(t_mid).copy()
    tu = (np.arange(N)[:, None] + layout.nodes[None, :]) * layout.h
    u2 = traj.foot_z_rate(np.clip(tu.reshape(-1), 0.0, T_src)).reshape(N, d, 4)
    return layout.pack(xs, fz, u1, u2)


def decision_scales(layout: VariableLayout, model: RobotModel) -> np.ndarray:
    """Per-column magnitudes of the decision vector, for preconditioning.

    Kinematic quantities are O(1) in SI units while contact forces live on the
    weight scale, so force columns get m*|g|/4 and everything else 1.  Fixed
    and model-derived: solves stay deterministic and auditable in original
    units.
    """
    s = np.ones(layout.n)
    f_scale = model.mass * abs(model.gravity[2]) / 4.0
    for k in range(layout.N):
        for i in range(NUM_FEET):
            for a in range(3):
                s[layout.u1_index(k, layout.force_col(i, a))] = f_scale
    return s
