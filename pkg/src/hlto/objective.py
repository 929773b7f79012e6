"""Cost terms of the locomotion NLP.

Integral-type terms (CoM acceleration, goal tracking, feet-to-nominal) use
Gauss-Legendre quadrature h * w_j over the collocation nodes of every
interval.  Control-regularization terms (wheel speed, steer rate, force rate)
are plain sums over the per-interval control slabs.  Term functions return the
unweighted values; ``total_cost`` applies the gamma weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from . import ad
from .model import RobotModel
from .transcription import VariableLayout, _combine

NUM_FEET = 4


@dataclass(frozen=True)
class Weights:
    gamma_acc: float = 1.0
    gamma_goal: float = 10.0
    gamma_force: float = 5e-4
    gamma_feet: float = 20.0
    gamma_speed: float = 1.0
    gamma_yaw: float = 1.5
    acc_select: np.ndarray = field(default_factory=lambda: np.ones(3))
    goal_select: np.ndarray = field(default_factory=lambda: np.ones(6))
    speed_contact_only: bool = False

    def __post_init__(self):
        object.__setattr__(self, "acc_select", np.asarray(self.acc_select, dtype=float))
        object.__setattr__(self, "goal_select", np.asarray(self.goal_select, dtype=float))
        for name in ("gamma_acc", "gamma_goal", "gamma_force", "gamma_feet",
                     "gamma_speed", "gamma_yaw"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.acc_select.shape != (3,) or self.goal_select.shape != (6,):
            raise ValueError("selection vectors must have shapes (3,) and (6,)")

    def replace(self, **kwargs) -> "Weights":
        data = {name: getattr(self, name) for name in self.__dataclass_fields__}
        data.update(kwargs)
        return Weights(**data)


@dataclass(frozen=True)
class GoalSpec:
    position: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        if self.position.shape != (3,) or self.theta.shape != (3,):
            raise ValueError("goal position and theta must have shape (3,)")

    @property
    def target6(self) -> np.ndarray:
        return np.concatenate([self.position, self.theta])


# ---------------------------------------------------------------------------
# per-interval vectors (summed by the public scalar terms)


def _acc_vec(z, layout: VariableLayout, weights: Weights):
    xs, _, _, _ = layout.split(z)
    drd = _combine(layout.D2, xs[:, :, 6:9])  # d(r_dot poly)/dtau at nodes, (N, d, 3)
    sel = weights.acc_select
    sq = (
        sel[0] * drd[:, :, 0] * drd[:, :, 0]
        + sel[1] * drd[:, :, 1] * drd[:, :, 1]
        + sel[2] * drd[:, :, 2] * drd[:, :, 2]
    )
    return (sq * (layout.quad_weights / layout.h)).sum(axis=1)


def _goal_vec(z, layout: VariableLayout, weights: Weights, goal: GoalSpec):
    xs, _, _, _ = layout.split(z)
    target = goal.target6
    sel = weights.goal_select
    sq = None
    for a in range(6):
        diff = xs[:, 1:, a] - target[a]
        term = sel[a] * diff * diff
        sq = term if sq is None else sq + term
    return sq.sum(axis=1)


def _feet_components(z, layout: VariableLayout, model: RobotModel):
    """Foot-placement residuals in the yaw-aligned body frame, 12 arrays of
    shape (N, d): x, y, z deviation from the nominal stance per foot."""
    xs, fz, _, _ = layout.split(z)
    fzn = _combine(layout.P1, fz)  # (N, d, 4)
    tz = xs[:, 1:, 5]
    c, s = ad.cos(tz), ad.sin(tz)
    comps = []
    for i in range(NUM_FEET):
        dx = xs[:, 1:, 12 + 3 * i] - xs[:, 1:, 0]
        dy = xs[:, 1:, 13 + 3 * i] - xs[:, 1:, 1]
        dz = fzn[:, :, i] - xs[:, 1:, 2]
        nom = model.nominal_feet[i]
        comps.append(c * dx + s * dy - nom[0])
        comps.append(-s * dx + c * dy - nom[1])
        comps.append(dz - nom[2])
    return comps


def _feet_vec(z, layout: VariableLayout, model: RobotModel):
    sq = None
    for e in _feet_components(z, layout, model):
        term = e * e
        sq = term if sq is None else sq + term
    return sq.sum(axis=1)


def _speed_vec(z, layout: VariableLayout, weights: Weights):
    _, _, u1, _ = layout.split(z)
    v = u1[:, 12:16]
    sq = v * v
    if weights.speed_contact_only:
        sq = sq * layout.contact_mask.astype(float)
    return sq.sum(axis=1)


def _steer_vec(z, layout: VariableLayout):
    _, _, u1, _ = layout.split(z)
    sd = u1[:, 16:20]
    return (sd * sd).sum(axis=1)


def _force_vec(z, layout: VariableLayout):
    """Squared force steps between consecutive intervals, assigned to the
    later interval's row (row 0 is zero)."""
    _, _, u1, _ = layout.split(z)
    f = u1[:, :12]
    if layout.N == 1:
        return 0.0 * f[:, 0]
    diff = f[1:, :] - f[:-1, :]
    sq = (diff * diff).sum(axis=1)
    return ad.concatenate([np.zeros(1), sq], axis=0)


# ---------------------------------------------------------------------------
# public terms (unweighted) and the weighted total


def cost_acc(decision, layout: VariableLayout, weights: Weights):
    """Integrated squared CoM acceleration (from the r_dot spline derivative)."""
    return _acc_vec(decision, layout, weights).sum()


def cost_goal(decision, layout: VariableLayout, weights: Weights, goal: GoalSpec):
    """Integrated squared distance of [r, theta] to the goal pose."""
    return _goal_vec(decision, layout, weights, goal).sum()


def cost_feet_nominal(decision, layout: VariableLayout, weights: Weights, model: RobotModel):
    """Integrated squared deviation of feet from nominal stance under the yawed pose."""
    return _feet_vec(decision, layout, model).sum()


def cost_wheel_speed(decision, layout: VariableLayout, weights: Weights):
    """Sum of squared wheel speeds over intervals (optionally contact-gated)."""
    return _speed_vec(decision, layout, weights).sum()


def cost_steer_rate(decision, layout: VariableLayout, weights: Weights):
    """Sum of squared steering rates over intervals."""
    return _steer_vec(decision, layout).sum()


def cost_force_rate(decision, layout: VariableLayout, weights: Weights):
    """Sum of squared force changes across interval boundaries."""
    return _force_vec(decision, layout).sum()


def per_interval_cost(decision, layout: VariableLayout, weights: Weights,
                      goal: GoalSpec, model: RobotModel):
    """(N,) weighted cost contributions; sums to total_cost."""
    w = weights
    out = w.gamma_acc * _acc_vec(decision, layout, w)
    out = out + w.gamma_goal * _goal_vec(decision, layout, w, goal)
    if w.gamma_feet:
        out = out + w.gamma_feet * _feet_vec(decision, layout, model)
    if w.gamma_speed:
        out = out + w.gamma_speed * _speed_vec(decision, layout, w)
    if w.gamma_yaw:
        out = out + w.gamma_yaw * _steer_vec(decision, layout)
    if w.gamma_force:
        out = out + w.gamma_force * _force_vec(decision, layout)
    return out


def total_cost(decision, layout: VariableLayout, weights: Weights,
               goal: GoalSpec, model: RobotModel):
    """Weighted sum of all cost terms."""
    return per_interval_cost(decision, layout, weights, goal, model).sum()


def _block_local_vec(decision, layout: VariableLayout, weights: Weights,
                     goal: GoalSpec, model: RobotModel):
    """per_interval_cost minus the force-step term: interval k only touches
    block k, so one block-compressed dual sweep yields the exact gradient."""
    w = weights
    out = w.gamma_acc * _acc_vec(decision, layout, w)
    out = out + w.gamma_goal * _goal_vec(decision, layout, w, goal)
    if w.gamma_feet:
        out = out + w.gamma_feet * _feet_vec(decision, layout, model)
    if w.gamma_speed:
        out = out + w.gamma_speed * _speed_vec(decision, layout, w)
    if w.gamma_yaw:
        out = out + w.gamma_yaw * _steer_vec(decision, layout)
    return out


def _force_value_and_grad(z: np.ndarray, layout: VariableLayout):
    """Closed-form value and gradient of the (unweighted) force-step term."""
    _, _, u1, _ = layout.split(z)
    f = u1[:, :12]
    g = np.zeros(layout.n)
    if layout.N == 1:
        return 0.0, g
    diff = f[1:] - f[:-1]
    gf = np.zeros_like(f)
    gf[1:] += 2.0 * diff
    gf[:-1] -= 2.0 * diff
    cols = (
        np.arange(layout.N)[:, None] * layout.block
        + layout.off_u1
        + np.arange(12)[None, :]
    )
    g[cols.reshape(-1)] = gf.reshape(-1)
    return float((diff * diff).sum()), g


def cost_value_and_grad(z: np.ndarray, layout: VariableLayout, weights: Weights,
                        goal: GoalSpec, model: RobotModel, seeds: np.ndarray):
    """Exact total cost and gradient from one (block, n)-seeded dual sweep.

    ``seeds`` must be the block-compressed seed matrix for ``layout``.
    """
    out = _block_local_vec(ad.Dual(z, seeds), layout, weights, goal, model)
    val = float(out.val.sum())
    grad = out.tan.T.reshape(-1).copy()  # (block, N) -> column-major scatter
    if weights.gamma_force:
        fval, fgrad = _force_value_and_grad(z, layout)
        val += weights.gamma_force * fval
        grad += weights.gamma_force * fgrad
    return val, grad


def quadratic_cost_hessian(layout: VariableLayout, weights: Weights,
                           goal: GoalSpec, model: RobotModel) -> scipy.sparse.csr_matrix:
    """Exact constant Hessian of the quadratic cost terms.

    Every term except the foot-placement one is a squared affine function of
    the decision vector, so this part of the Hessian does not depend on the
    evaluation point.  The interval-local part is recovered by probing the
    gradient along one direction per local column (the gradient of a quadratic
    is affine, so a single difference per direction is exact to roundoff); the
    force-step term couples neighbouring intervals and is written down in
    closed form.  The foot-placement term is point dependent and handled by
    ``feet_gauss_newton``.
    """
    block, N, n = layout.block, layout.N, layout.n
    seeds = np.zeros((block, n))
    seeds[np.tile(np.arange(block), N), np.arange(n)] = 1.0
    quad_weights = weights.replace(gamma_feet=0.0)

    def grad_local(z):
        out = _block_local_vec(ad.Dual(z, seeds), layout, quad_weights, goal, model)
        return out.tan.T.reshape(-1).copy()

    g0 = grad_local(np.zeros(n))
    cols = np.zeros((N, block, block))
    for c in range(block):
        v = np.zeros(n)
        v[c::block] = 1.0
        cols[:, :, c] = (grad_local(v) - g0).reshape(N, block)
    k, r, c = np.nonzero(cols)
    hess = scipy.sparse.coo_matrix(
        (cols[k, r, c], (k * block + r, k * block + c)), shape=(n, n))

    if weights.gamma_force and N > 1:
        fcols = (
            np.arange(N)[:, None] * block
            + layout.off_u1
            + np.arange(12)[None, :]
        )
        gf = weights.gamma_force
        count = (np.arange(N) > 0).astype(float) + (np.arange(N) < N - 1)
        diag = 2.0 * gf * (count[:, None] * np.ones(12)).reshape(-1)
        lo, hi = fcols[:-1].reshape(-1), fcols[1:].reshape(-1)
        rows = np.concatenate([fcols.reshape(-1), lo, hi])
        colsx = np.concatenate([fcols.reshape(-1), hi, lo])
        vals = np.concatenate([diag, np.full(lo.size, -2.0 * gf),
                               np.full(lo.size, -2.0 * gf)])
        hess = hess + scipy.sparse.coo_matrix((vals, (rows, colsx)), shape=(n, n))
    return hess.tocsr()


def feet_gauss_newton(z: np.ndarray, layout: VariableLayout, model: RobotModel,
                      seeds: np.ndarray) -> scipy.sparse.csr_matrix:
    """Gauss-Newton Hessian of the (unweighted) foot-placement term at ``z``.

    The term sums squared residuals that are nonlinear through the body yaw;
    dropping the residual-curvature part leaves 2 J^T J, which is positive
    semidefinite and block diagonal over intervals.
    """
    comps = _feet_components(ad.Dual(z, seeds), layout, model)
    blocks = None
    for e in comps:
        t = e.tan  # (block, N, d)
        hb = np.einsum("bkd,ckd->kbc", t, t)
        blocks = hb if blocks is None else blocks + hb
    blocks *= 2.0
    N, block = layout.N, layout.block
    k, r, c = np.nonzero(blocks)
    return scipy.sparse.coo_matrix(
        (blocks[k, r, c], (k * block + r, k * block + c)),
        shape=(layout.n, layout.n)).tocsr()
