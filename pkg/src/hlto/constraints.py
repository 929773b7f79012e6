"""Constraint clauses of the locomotion NLP and their assembly.

Equalities: collocation dynamics, knot continuity, contact foot level, zero
force on lifted feet, swing apex height, and the boundary conditions (initial
state, zero final CoM velocity, zero final wheel speeds, feet at the nominal
stance under the final pose).  Inequalities (residual <= 0 feasible): the
kinematic box around each nominal foot position, the steering range relative
to yaw, and linearized friction cones with unilateral normal forces.

Groups whose residuals are affine in the decision vector carry an explicit
sparse (A, b); the nonlinear ones (collocation, box, final feet) know their
block structure so Jacobians come out of one compressed forward-AD sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from . import ad
from .gait import LIFT
from .model import NUM_FEET, RobotModel
from .transcription import (
    FOOTZ_NODES,
    PI2_DIM,
    PI2_OF_STATE,
    STATE_DIM,
    STATE_OF_FOOTZ,
    STATE_OF_PI2,
    SplineTrajectory,
    VariableLayout,
    _combine,
    _owning_intervals,
)

EQ = "eq"
INEQ = "ineq"


# ---------------------------------------------------------------------------
# pointwise clause residuals (also used by the dense audit)


def contact_level_residual(foot_z, model: RobotModel):
    """Height of a contact foot above the ground plane; zero when feasible."""
    return foot_z - model.z_ground


def lifted_force_residual(f):
    """Force on a lifted foot; must vanish componentwise."""
    return np.asarray(f, dtype=float)


def apex_residual(trajectory: SplineTrajectory, foot: int, lift_phase, model: RobotModel):
    """Foot height at the lift midpoint minus the required apex height."""
    state = trajectory.state28(lift_phase.midpoint)
    return state[14 + 4 * foot] - model.z_fly


def kinematic_box_residual(p_c, r, theta_z, foot: int, model: RobotModel):
    """Six box faces around the nominal foot position in the yawed base frame.

    Order: [+x, +y, +z, -x, -y, -z] face violations; all entries <= 0 inside.
    """
    c, s = ad.cos(theta_z), ad.sin(theta_z)
    dx = p_c[..., 0] - r[..., 0]
    dy = p_c[..., 1] - r[..., 1]
    dz = p_c[..., 2] - r[..., 2]
    nom = model.nominal_feet[foot]
    bx = c * dx + s * dy - nom[0]
    by = -s * dx + c * dy - nom[1]
    bz = dz - nom[2]
    bounds = model.box_bounds
    return ad.stack(
        [bx - bounds[0], by - bounds[1], bz - bounds[2],
         -bx - bounds[0], -by - bounds[1], -bz - bounds[2]],
        axis=-1,
    )


def steering_bound_residual(sigma, theta_z, model: RobotModel):
    """Steering angle relative to yaw against its range: [lower, upper] residuals."""
    rel = sigma - theta_z
    return ad.stack(
        [model.sigma_range[0] - rel, rel - model.sigma_range[1]], axis=-1
    )


def friction_cone_residuals(f, model: RobotModel):
    """Linearized cone rows [fx+, fx-, fy+, fy-, unilateral], <= 0 feasible."""
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    mu = model.mu
    return ad.stack(
        [fx - mu * fz, -fx - mu * fz, fy - mu * fz, -fy - mu * fz, -fz], axis=-1
    )


# ---------------------------------------------------------------------------
# constraint groups


@dataclass
class ConstraintGroup:
    """One named clause: a residual function plus Jacobian structure."""

    name: str
    kind: str  # EQ or INEQ
    dim: int
    fn: Callable  # decision vector (ndarray or Dual) -> residuals
    times: np.ndarray  # enforcement time per row
    layout: VariableLayout
    linear: Optional[tuple] = None  # (A csr, b); residual = A @ z + b
    structure: tuple = ("dense", None)  # ("uniform", rows_per_interval) | ("single", k0)

    def __post_init__(self):
        if self.linear is not None:
            A, b = self.linear
            self._AT = A.T.tocsr()
            self.linear = (A.tocsr(), b)
        self.times = np.asarray(self.times, dtype=float)
        if self.times.shape != (self.dim,):
            raise ValueError(f"{self.name}: times/dim mismatch")

    # -- evaluation ----------------------------------------------------------

    def values(self, z: np.ndarray) -> np.ndarray:
        if self.linear is not None:
            A, b = self.linear
            return A @ z + b
        return self.fn(z)

    def jacobian(self, z: np.ndarray) -> sp.csr_matrix:
        if self.linear is not None:
            return self.linear[0]
        return self.value_and_jacobian(z)[1]

    def value_and_jacobian(self, z: np.ndarray):
        if self.linear is not None:
            return self.values(z), self.linear[0]
        lay = self.layout
        kind, info = self.structure
        if kind == "dense":
            val, jac = ad.jacobian(self.fn, z)
            return val, sp.csr_matrix(jac)
        out = self.fn(ad.Dual(z, _block_seeds(lay)))
        val, tan = out.val, out.tan
        if kind == "uniform":
            R = info
            data = np.moveaxis(tan.reshape(lay.block, lay.N, R), 0, 2).reshape(-1)
            indices = np.tile(
                np.arange(lay.block), self.dim
            ) + np.repeat(np.arange(lay.N), R * lay.block) * lay.block
            indptr = np.arange(self.dim + 1) * lay.block
        elif kind == "single":
            k0 = info
            data = tan.T.reshape(-1)
            indices = np.tile(np.arange(lay.block) + k0 * lay.block, self.dim)
            indptr = np.arange(self.dim + 1) * lay.block
        else:
            raise ValueError(f"unknown structure {kind}")
        jac = sp.csr_matrix((data, indices, indptr), shape=(self.dim, lay.n))
        return val, jac

    def jac_t_dot(self, z: np.ndarray, w: np.ndarray, tan=None) -> np.ndarray:
        """J(z)^T w without materializing J when a compressed tangent is given."""
        if self.linear is not None:
            return self._AT @ w
        lay = self.layout
        kind, info = self.structure
        if tan is None:
            tan = self.fn(ad.Dual(z, _block_seeds(lay))).tan
        if kind == "uniform":
            R = info
            contrib = np.einsum("cnr,nr->nc", tan.reshape(lay.block, lay.N, R), w.reshape(lay.N, R))
            return contrib.reshape(-1)
        if kind == "single":
            g = np.zeros(lay.n)
            k0 = info
            g[k0 * lay.block : (k0 + 1) * lay.block] = tan @ w
            return g
        return self.jacobian(z).T @ w


_SEED_CACHE: dict = {}


def _block_seeds(layout: VariableLayout) -> np.ndarray:
    """(block, n) compressed seed matrix: direction c hits column c of every block."""
    key = (id(layout), layout.N, layout.block)
    if key not in _SEED_CACHE:
        seeds = np.zeros((layout.block, layout.n))
        cols = np.arange(layout.n)
        seeds[cols % layout.block, cols] = 1.0
        _SEED_CACHE[key] = seeds
    return _SEED_CACHE[key]


def parity_seeds(layout: VariableLayout) -> np.ndarray:
    """(2*block, n) seeds separating even and odd interval blocks."""
    key = ("parity", id(layout), layout.N, layout.block)
    if key not in _SEED_CACHE:
        seeds = np.zeros((2 * layout.block, layout.n))
        cols = np.arange(layout.n)
        k = cols // layout.block
        seeds[(k % 2) * layout.block + cols % layout.block, cols] = 1.0
        _SEED_CACHE[key] = seeds
    return _SEED_CACHE[key]


@dataclass
class ConstraintSet:
    """Ordered clause groups over one decision vector."""

    n: int
    groups: list = field(default_factory=list)

    def group(self, name: str) -> ConstraintGroup:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)

    def names(self):
        return [g.name for g in self.groups]

    def equalities(self):
        return [g for g in self.groups if g.kind == EQ]

    def inequalities(self):
        return [g for g in self.groups if g.kind == INEQ]

    def eval_all(self, z: np.ndarray) -> dict:
        return {g.name: g.values(z) for g in self.groups}

    def max_violations(self, z: np.ndarray) -> dict:
        out = {}
        for g in self.groups:
            vals = g.values(z)
            if g.kind == EQ:
                out[g.name] = float(np.max(np.abs(vals))) if vals.size else 0.0
            else:
                out[g.name] = float(np.max(np.maximum(vals, 0.0))) if vals.size else 0.0
        return out

    def total_rows(self) -> int:
        return sum(g.dim for g in self.groups)


# ---------------------------------------------------------------------------
# assembly


def _contact_pairs(layout: VariableLayout):
    ks, feet = np.nonzero(layout.contact_mask)
    return ks, feet


def _flight_pairs(layout: VariableLayout):
    ks, feet = np.nonzero(~layout.contact_mask)
    return ks, feet


def _lift_events(layout: VariableLayout):
    """(foot, interval, tau, t_mid) for each lift midpoint."""
    events = []
    for foot, ph in layout.schedule.all_lifts():
        t_mid = ph.midpoint
        ks, taus = _owning_intervals(np.array([t_mid]), layout.h, layout.N)
        events.append((foot, int(ks[0]), float(taus[0]), t_mid))
    return events


def _collocation_group(layout: VariableLayout, model: RobotModel) -> ConstraintGroup:
    from .transcription import collocation_core

    N, d = layout.N, layout.d

    def fn(z):
        xs, fz, u1, u2 = layout.split(z)
        res2, res1 = collocation_core(xs, fz, u1, u2, layout, model)
        return ad.concatenate(
            [res2.reshape(N, d * PI2_DIM), res1.reshape(N, d * 4)], axis=1
        ).reshape(N * d * STATE_DIM)

    node_t = layout.interval_times[:, None] + layout.nodes[None, :] * layout.h  # (N, d)
    times = np.concatenate(
        [np.repeat(node_t, PI2_DIM).reshape(N, -1), np.repeat(node_t, 4).reshape(N, -1)],
        axis=1,
    ).reshape(-1)
    R = d * STATE_DIM
    return ConstraintGroup(
        name="collocation", kind=EQ, dim=N * R, fn=fn, times=times,
        layout=layout, structure=("uniform", R),
    )


def _continuity_group(layout: VariableLayout) -> ConstraintGroup:
    from .transcription import continuity_core

    N, d = layout.N, layout.d

    def fn(z):
        xs, fz, _, _ = layout.split(z)
        return continuity_core(xs, fz, layout).reshape((N - 1) * STATE_DIM)

    rows, cols, data = [], [], []
    for k in range(N - 1):
        for s in range(STATE_DIM):
            row = k * STATE_DIM + s
            p = PI2_OF_STATE[s]
            if p >= 0:
                for i in range(d + 1):
                    rows.append(row)
                    cols.append(layout.state_index(k, i, p))
                    data.append(layout.E2[i])
                rows.append(row)
                cols.append(layout.state_index(k + 1, 0, p))
                data.append(-1.0)
            else:
                f = int(np.where(STATE_OF_FOOTZ == s)[0][0])
                for i in range(FOOTZ_NODES):
                    rows.append(row)
                    cols.append(layout.footz_index(k, i, f))
                    data.append(layout.E1[i])
                rows.append(row)
                cols.append(layout.footz_index(k + 1, 0, f))
                data.append(-1.0)
    dim = (N - 1) * STATE_DIM
    A = sp.csr_matrix((data, (rows, cols)), shape=(dim, layout.n))
    times = np.repeat(layout.interval_times[1:], STATE_DIM) if N > 1 else np.zeros(0)
    return ConstraintGroup(
        name="continuity", kind=EQ, dim=dim, fn=fn, times=times,
        layout=layout, linear=(A, np.zeros(dim)),
    )


def _contact_level_group(layout: VariableLayout, model: RobotModel) -> ConstraintGroup:
    ks, feet = _contact_pairs(layout)
    taus = np.concatenate([[0.0], layout.nodes, [1.0]])
    C1 = layout.basis1.eval_matrix(taus)  # (d+2, 3)
    P, M = len(ks), len(taus)

    def fn(z):
        _, fz, _, _ = layout.split(z)
        evals = []
        for j in range(M):
            acc = C1[j, 0] * fz[:, 0, :]
            for i in range(1, FOOTZ_NODES):
                acc = acc + C1[j, i] * fz[:, i, :]
            evals.append(acc)
        stackd = ad.stack(evals, axis=-1)  # (N, 4, M)
        return (stackd[ks, feet, :] - model.z_ground).reshape(P * M)

    rows, cols, data = [], [], []
    for p in range(P):
        for j in range(M):
            for i in range(FOOTZ_NODES):
                rows.append(p * M + j)
                cols.append(layout.footz_index(ks[p], i, feet[p]))
                data.append(C1[j, i])
    dim = P * M
    A = sp.csr_matrix((data, (rows, cols)), shape=(dim, layout.n))
    b = np.full(dim, -model.z_ground)
    times = (layout.interval_times[ks][:, None] + taus[None, :] * layout.h).reshape(-1)
    return ConstraintGroup(
        name="contact_level", kind=EQ, dim=dim, fn=fn, times=times,
        layout=layout, linear=(A, b),
    )


def _lifted_force_group(layout: VariableLayout) -> ConstraintGroup:
    ks, feet = _flight_pairs(layout)
    P = len(ks)

    def fn(z):
        _, _, u1, _ = layout.split(z)
        cols_f = (3 * feet[:, None] + np.arange(3)[None, :])
        return u1[ks[:, None], cols_f].reshape(P * 3)

    rows, cols, data = [], [], []
    for p in range(P):
        for a in range(3):
            rows.append(p * 3 + a)
            cols.append(layout.u1_index(ks[p], 3 * feet[p] + a))
            data.append(1.0)
    A = sp.csr_matrix((data, (rows, cols)), shape=(P * 3, layout.n))
    times = np.repeat(layout.interval_times[ks], 3)
    return ConstraintGroup(
        name="lifted_force", kind=EQ, dim=P * 3, fn=fn, times=times,
        layout=layout, linear=(A, np.zeros(P * 3)),
    )


def _apex_group(layout: VariableLayout, model: RobotModel) -> ConstraintGroup:
    events = _lift_events(layout)
    E = len(events)
    L = [layout.basis1.eval_matrix([tau])[0] for (_, _, tau, _) in events]

    def fn(z):
        _, fz, _, _ = layout.split(z)
        vals = []
        for e, (foot, k, _, _) in enumerate(events):
            acc = L[e][0] * fz[k, 0, foot]
            for i in range(1, FOOTZ_NODES):
                acc = acc + L[e][i] * fz[k, i, foot]
            vals.append(acc - model.z_fly)
        if not vals:
            return np.zeros(0)
        return ad.stack(vals, axis=-1).reshape(E)

    rows, cols, data = [], [], []
    for e, (foot, k, _, _) in enumerate(events):
        for i in range(FOOTZ_NODES):
            rows.append(e)
            cols.append(layout.footz_index(k, i, foot))
            data.append(L[e][i])
    A = sp.csr_matrix((data, (rows, cols)), shape=(E, layout.n))
    b = np.full(E, -model.z_fly)
    times = np.array([t for (_, _, _, t) in events])
    return ConstraintGroup(
        name="swing_apex", kind=EQ, dim=E, fn=fn, times=times,
        layout=layout, linear=(A, b),
    )


def _initial_state_group(layout: VariableLayout, x0: np.ndarray) -> ConstraintGroup:
    from .transcription import _start_state28

    def fn(z):
        xs, fz, _, _ = layout.split(z)
        return _start_state28(xs[:1], fz[:1]).reshape(STATE_DIM) - x0

    rows, cols, data = [], [], []
    for s in range(STATE_DIM):
        p = PI2_OF_STATE[s]
        if p >= 0:
            cols.append(layout.state_index(0, 0, p))
        else:
            f = int(np.where(STATE_OF_FOOTZ == s)[0][0])
            cols.append(layout.footz_index(0, 0, f))
        rows.append(s)
        data.append(1.0)
    A = sp.csr_matrix((data, (rows, cols)), shape=(STATE_DIM, layout.n))
    return ConstraintGroup(
        name="initial_state", kind=EQ, dim=STATE_DIM, fn=fn,
        times=np.zeros(STATE_DIM), layout=layout, linear=(A, -x0.copy()),
    )


def _final_com_velocity_group(layout: VariableLayout) -> ConstraintGroup:
    from .transcription import _end_state28

    def fn(z):
        xs, fz, _, _ = layout.split(z)
        end = _end_state28(xs[-1:], fz[-1:], layout)
        return end[:, 6:9].reshape(3)

    rows, cols, data = [], [], []
    for a in range(3):
        for i in range(layout.d + 1):
            rows.append(a)
            cols.append(layout.state_index(layout.N - 1, i, 6 + a))
            data.append(layout.E2[i])
    A = sp.csr_matrix((data, (rows, cols)), shape=(3, layout.n))
    return ConstraintGroup(
        name="final_com_velocity", kind=EQ, dim=3, fn=fn,
        times=np.full(3, layout.T_f), layout=layout, linear=(A, np.zeros(3)),
    )


def _final_wheel_speed_group(layout: VariableLayout) -> ConstraintGroup:
    def fn(z):
        _, _, u1, _ = layout.split(z)
        return u1[layout.N - 1, 12:16]

    rows = list(range(4))
    cols = [layout.u1_index(layout.N - 1, 12 + i) for i in range(4)]
    A = sp.csr_matrix((np.ones(4), (rows, cols)), shape=(4, layout.n))
    return ConstraintGroup(
        name="final_wheel_speed", kind=EQ, dim=4, fn=fn,
        times=np.full(4, layout.T_f), layout=layout, linear=(A, np.zeros(4)),
    )


def _final_foot_posture_group(layout: VariableLayout, model: RobotModel) -> ConstraintGroup:
    from .transcription import _end_state28

    def fn(z):
        xs, fz, _, _ = layout.split(z)
        end = _end_state28(xs[-1:], fz[-1:], layout)  # (1, 28)
        tz = end[:, 5]
        c, s = ad.cos(tz), ad.sin(tz)
        rows = []
        for i in range(NUM_FEET):
            dx = end[:, 12 + 4 * i] - end[:, 0]
            dy = end[:, 13 + 4 * i] - end[:, 1]
            dz = end[:, 14 + 4 * i] - end[:, 2]
            nom = model.nominal_feet[i]
            rows.append(c * dx + s * dy - nom[0])
            rows.append(-s * dx + c * dy - nom[1])
            rows.append(dz - nom[2])
        return ad.stack(rows, axis=-1).reshape(12)

    return ConstraintGroup(
        name="final_foot_posture", kind=EQ, dim=12, fn=fn,
        times=np.full(12, layout.T_f), layout=layout,
        structure=("single", layout.N - 1),
    )


def _kinematic_box_group(layout: VariableLayout, model: RobotModel) -> ConstraintGroup:
    N, d = layout.N, layout.d
    R = (d + 1) * NUM_FEET * 6

    def fn(z):
        xs, fz, _, _ = layout.split(z)
        fz_parts = [fz[:, 0, :]]
        for j in range(d):
            acc = layout.P1[j, 0] * fz[:, 0, :]
            for i in range(1, FOOTZ_NODES):
                acc = acc + layout.P1[j, i] * fz[:, i, :]
            fz_parts.append(acc)
        fzv = ad.stack(fz_parts, axis=1)  # (N, d+1, 4)
        tz = xs[:, :, 5]
        c, s = ad.cos(tz), ad.sin(tz)
        per_foot = []
        for i in range(NUM_FEET):
            dx = xs[:, :, 12 + 3 * i] - xs[:, :, 0]
            dy = xs[:, :, 13 + 3 * i] - xs[:, :, 1]
            dz = fzv[:, :, i] - xs[:, :, 2]
            nom = model.nominal_feet[i]
            bx = c * dx + s * dy - nom[0]
            by = -s * dx + c * dy - nom[1]
            bz = dz - nom[2]
            B = model.box_bounds
            per_foot.append(
                ad.stack(
                    [bx - B[0], by - B[1], bz - B[2], -bx - B[0], -by - B[1], -bz - B[2]],
                    axis=-1,
                )
            )  # (N, d+1, 6)
        return ad.stack(per_foot, axis=2).reshape(N * R)

    times = np.repeat(layout.node_times().reshape(-1), NUM_FEET * 6)
    return ConstraintGroup(
        name="kinematic_box", kind=INEQ, dim=N * R, fn=fn, times=times,
        layout=layout, structure=("uniform", R),
    )


def _steering_group(layout: VariableLayout, model: RobotModel) -> ConstraintGroup:
    N, d = layout.N, layout.d
    R = (d + 1) * NUM_FEET * 2

    def fn(z):
        xs, _, _, _ = layout.split(z)
        tz = xs[:, :, 5]
        per_foot = []
        for i in range(NUM_FEET):
            rel = xs[:, :, 14 + 3 * i] - tz
            per_foot.append(
                ad.stack(
                    [model.sigma_range[0] - rel, rel - model.sigma_range[1]], axis=-1
                )
            )
        return ad.stack(per_foot, axis=2).reshape(N * R)

    rows, cols, data, b = [], [], [], []
    row = 0
    for k in range(N):
        for node in range(d + 1):
            for i in range(NUM_FEET):
                sig = layout.state_index(k, node, 14 + 3 * i)
                yaw = layout.state_index(k, node, 5)
                rows += [row, row]
                cols += [sig, yaw]
                data += [-1.0, 1.0]
                b.append(model.sigma_range[0])
                row += 1
                rows += [row, row]
                cols += [sig, yaw]
                data += [1.0, -1.0]
                b.append(-model.sigma_range[1])
                row += 1
    A = sp.csr_matrix((data, (rows, cols)), shape=(N * R, layout.n))
    times = np.repeat(layout.node_times().reshape(-1), NUM_FEET * 2)
    return ConstraintGroup(
        name="steering_range", kind=INEQ, dim=N * R, fn=fn, times=times,
        layout=layout, linear=(A, np.array(b)),
    )


def _friction_group(layout: VariableLayout, model: RobotModel) -> ConstraintGroup:
    ks, feet = _contact_pairs(layout)
    P = len(ks)
    mu = model.mu

    def fn(z):
        _, _, u1, _ = layout.split(z)
        fx = u1[ks, 3 * feet]
        fy = u1[ks, 3 * feet + 1]
        fzc = u1[ks, 3 * feet + 2]
        return ad.stack(
            [fx - mu * fzc, -fx - mu * fzc, fy - mu * fzc, -fy - mu * fzc, -fzc],
            axis=-1,
        ).reshape(P * 5)

    rows, cols, data = [], [], []
    for p in range(P):
        cx = layout.u1_index(ks[p], 3 * feet[p])
        cy = layout.u1_index(ks[p], 3 * feet[p] + 1)
        cz = layout.u1_index(ks[p], 3 * feet[p] + 2)
        for local, entries in enumerate(
            [[(cx, 1.0), (cz, -mu)], [(cx, -1.0), (cz, -mu)],
             [(cy, 1.0), (cz, -mu)], [(cy, -1.0), (cz, -mu)], [(cz, -1.0)]]
        ):
            for col, val in entries:
                rows.append(p * 5 + local)
                cols.append(col)
                data.append(val)
    A = sp.csr_matrix((data, (rows, cols)), shape=(P * 5, layout.n))
    times = np.repeat(layout.interval_times[ks], 5)
    return ConstraintGroup(
        name="friction_cone", kind=INEQ, dim=P * 5, fn=fn, times=times,
        layout=layout, linear=(A, np.zeros(P * 5)),
    )


def boundary_residuals(decision, scenario, layout: VariableLayout, model: RobotModel):
    """Concatenated boundary clauses: initial state, final CoM velocity,
    final wheel speeds, final feet at nominal stance."""
    x0 = scenario.initial_state_vector(model)
    parts = [
        _initial_state_group(layout, x0).fn(decision),
        _final_com_velocity_group(layout).fn(decision),
        _final_wheel_speed_group(layout).fn(decision),
        _final_foot_posture_group(layout, model).fn(decision),
    ]
    return ad.concatenate(parts, axis=0)


def assemble(scenario, layout: VariableLayout, model: RobotModel) -> ConstraintSet:
    """Full clause list for one solve; empty groups are dropped."""
    x0 = scenario.initial_state_vector(model)
    groups = [
        _collocation_group(layout, model),
        _continuity_group(layout),
        _contact_level_group(layout, model),
        _lifted_force_group(layout),
        _apex_group(layout, model),
        _kinematic_box_group(layout, model),
        _steering_group(layout, model),
        _friction_group(layout, model),
        _initial_state_group(layout, x0),
        _final_com_velocity_group(layout),
        _final_wheel_speed_group(layout),
        _final_foot_posture_group(layout, model),
    ]
    groups = [g for g in groups if g.dim > 0]
    return ConstraintSet(n=layout.n, groups=groups)


# ---------------------------------------------------------------------------
# variable bounds


def actuator_bounds(layout: VariableLayout, model: RobotModel):
    """Box bounds from actuation limits: steer rates everywhere, wheel speeds
    during contact; forces and u2 otherwise unbounded here."""
    lb = np.full(layout.n, -np.inf)
    ub = np.full(layout.n, np.inf)
    for k in range(layout.N):
        for i in range(NUM_FEET):
            c = layout.u1_index(k, layout.sigma_dot_col(i))
            lb[c], ub[c] = model.sigma_dot_range
            if layout.contact_mask[k, i]:
                c = layout.u1_index(k, layout.v_col(i))
                lb[c], ub[c] = model.v_range
    return lb, ub


def assemble_bounds(layout: VariableLayout, model: RobotModel, x0: np.ndarray,
                    pitch_margin: float = 0.1):
    """Actuator boxes plus structural pins realized as equal bounds.

    Pins: the initial nodal state, contact-phase foot heights and u2, zero
    force on lifted feet, zero wheel speed over the last interval.  The pitch
    guard band keeps every iterate clear of the Euler-rate singularity.
    """
    lb, ub = actuator_bounds(layout, model)
    N, d = layout.N, layout.d

    pitch_cap = np.pi / 2 - pitch_margin
    for k in range(N):
        for node in range(d + 1):
            c = layout.state_index(k, node, 4)
            lb[c], ub[c] = -pitch_cap, pitch_cap

    ks, feet = _contact_pairs(layout)
    for k, i in zip(ks, feet):
        for node in range(FOOTZ_NODES):
            c = layout.footz_index(k, node, i)
            lb[c] = ub[c] = model.z_ground
        for node in range(d):
            c = layout.u2_index(k, node, i)
            lb[c] = ub[c] = 0.0
        c = layout.u1_index(k, layout.force_col(i, 2))
        lb[c] = max(lb[c], 0.0)  # unilateral normal force

    ks, feet = _flight_pairs(layout)
    for k, i in zip(ks, feet):
        for a in range(3):
            c = layout.u1_index(k, layout.force_col(i, a))
            lb[c] = ub[c] = 0.0

    for i in range(NUM_FEET):
        c = layout.u1_index(N - 1, layout.v_col(i))
        lb[c] = ub[c] = 0.0

    for s in range(STATE_DIM):
        p = PI2_OF_STATE[s]
        if p >= 0:
            c = layout.state_index(0, 0, p)
        else:
            f = int(np.where(STATE_OF_FOOTZ == s)[0][0])
            c = layout.footz_index(0, 0, f)
            if layout.contact_mask[0, f] and abs(x0[s] - model.z_ground) > 1e-9:
                raise ValueError(
                    f"initial foot {f} height {x0[s]} conflicts with ground contact"
                )
        lb[c] = ub[c] = x0[s]
    return lb, ub
