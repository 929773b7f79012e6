"""Augmented-Lagrangian solver over exact forward-mode derivatives.

Equalities carry multiplier estimates lambda and the classic quadratic
penalty; inequalities (residual <= 0) use the squared-hinge form
psi = (max(0, lambda + mu c)^2 - lambda^2) / (2 mu), which folds the active
set into the merit smoothly.  The bound-constrained inner minimization runs
scipy's limited-memory projected quasi-Newton (L-BFGS-B) with the merit
gradient assembled from one compressed AD sweep per nonlinear group plus
constant sparse Jacobians for the affine groups.

Outer loop: multipliers update when the measured violation beats the current
target eta, otherwise the penalty grows; tolerance schedules follow the usual
omega/eta power rules.  Violations reported in the Solution are recomputed
from the ConstraintSet, never trusted from solver internals.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg

from . import ad
from .constraints import EQ, INEQ, ConstraintSet, _block_seeds
from .objective import (GoalSpec, Weights, cost_value_and_grad,
                        feet_gauss_newton, quadratic_cost_hessian, total_cost)
from .transcription import SplineTrajectory, VariableLayout, trajectory_from_decision


def differentiate(function: Callable, point, chunk: int = 64):
    """Value and exact Jacobian of ``function`` at ``point`` via forward AD.

    The Jacobian shape is value.shape + point.shape (a plain float for
    scalar-to-scalar functions).
    """
    point = np.asarray(point, dtype=float)
    val, jac = ad.jacobian(function, point, chunk=chunk)
    if val.shape == () and point.shape == ():
        return float(val), float(jac)
    return val, jac


@dataclass
class SolverOptions:
    max_outer: int = 40
    initial_penalty: float = 100.0
    penalty_growth: float = 10.0
    penalty_cap: float = 1e12
    constraint_tol: float = 1e-6
    optimality_tol: float = 1e-4
    inner_cap: int = 300
    verbosity: int = 0
    # equilibrate the inner variable metric from Jacobian column norms once
    # per outer iteration; residuals and cost are never rescaled
    precondition: bool = True
    # projected Gauss-Newton steps that finish each inner solve; the
    # quasi-Newton pass gets near the subproblem minimizer and these sparse
    # second-order steps close the remaining gap (0 disables)
    refine_steps: int = 40


@dataclass
class NlpProblem:
    """Objective + constraints + variable bounds over a flat decision vector."""

    layout: VariableLayout
    weights: Weights
    goal: GoalSpec
    model: object
    constraints: ConstraintSet
    lb: np.ndarray
    ub: np.ndarray
    scales: Optional[np.ndarray] = None  # per-column preconditioner, default 1

    @property
    def n(self) -> int:
        return self.layout.n

    def objective(self, z):
        return total_cost(z, self.layout, self.weights, self.goal, self.model)

    def objective_value_and_grad(self, z: np.ndarray):
        return cost_value_and_grad(
            z, self.layout, self.weights, self.goal, self.model,
            _block_seeds(self.layout),
        )

    def jacobian_sparsity(self):
        """Global (rows, cols) COO pattern of the stacked constraint Jacobian."""
        rows, cols = [], []
        offset = 0
        for g in self.constraints.groups:
            if g.linear is not None:
                coo = g.linear[0].tocoo()
                rows.append(coo.row + offset)
                cols.append(coo.col)
            else:
                kind, info = g.structure
                if kind == "uniform":
                    R = info
                    r = np.arange(g.dim)
                    rows.append(np.repeat(r, self.layout.block) + offset)
                    k = np.repeat(r // R, self.layout.block)
                    cols.append(
                        np.tile(np.arange(self.layout.block), g.dim)
                        + k * self.layout.block
                    )
                elif kind == "single":
                    k0 = info
                    rows.append(np.repeat(np.arange(g.dim), self.layout.block) + offset)
                    cols.append(
                        np.tile(
                            np.arange(self.layout.block) + k0 * self.layout.block, g.dim
                        )
                    )
                else:
                    rr, cc = np.meshgrid(np.arange(g.dim), np.arange(self.n), indexing="ij")
                    rows.append(rr.reshape(-1) + offset)
                    cols.append(cc.reshape(-1))
            offset += g.dim
        return np.concatenate(rows), np.concatenate(cols)


@dataclass
class Solution:
    decision: np.ndarray
    trajectory: SplineTrajectory
    cost: float
    max_eq_violation: float
    max_ineq_violation: float
    outer_iterations: int
    inner_iterations: int
    wall_time: float
    status: str  # converged | max_iterations | diverged
    iteration_log: list = field(default_factory=list)
    group_violations: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass
class AdapterBundle:
    """Plain-callback view of an NlpProblem for external NLP codes."""

    n: int
    lb: np.ndarray
    ub: np.ndarray
    objective: Callable
    gradient: Callable
    constraint_values: Callable
    constraint_jacobian: Callable
    constraint_lower: np.ndarray
    constraint_upper: np.ndarray
    row_names: list
    sparsity: tuple


def solver_adapter(problem: NlpProblem) -> AdapterBundle:
    groups = problem.constraints.groups

    def constraint_values(z):
        return np.concatenate([g.values(z) for g in groups])

    def constraint_jacobian(z):
        return sp.vstack([g.jacobian(z) for g in groups]).tocsr()

    lower, upper, names = [], [], []
    for g in groups:
        names += [g.name] * g.dim
        if g.kind == EQ:
            lower.append(np.zeros(g.dim))
            upper.append(np.zeros(g.dim))
        else:
            lower.append(np.full(g.dim, -np.inf))
            upper.append(np.zeros(g.dim))
    return AdapterBundle(
        n=problem.n,
        lb=problem.lb.copy(),
        ub=problem.ub.copy(),
        objective=lambda z: float(problem.objective(z)),
        gradient=lambda z: problem.objective_value_and_grad(z)[1],
        constraint_values=constraint_values,
        constraint_jacobian=constraint_jacobian,
        constraint_lower=np.concatenate(lower) if lower else np.zeros(0),
        constraint_upper=np.concatenate(upper) if upper else np.zeros(0),
        row_names=names,
        sparsity=problem.jacobian_sparsity(),
    )


def _group_violation(kind: str, vals: np.ndarray) -> float:
    if vals.size == 0:
        return 0.0
    if kind == EQ:
        return float(np.max(np.abs(vals)))
    return float(np.max(np.maximum(vals, 0.0)))


def _projected_gradient_norm(z, g, lb, ub) -> float:
    step = z - np.clip(z - g, lb, ub)
    return float(np.max(np.abs(step))) if step.size else 0.0


def _weighted_column_norms_sq(group, z, layout, w_rows, A2=None) -> np.ndarray:
    """Row-weighted squared column norms of one group's Jacobian at z."""
    if A2 is not None:
        return np.asarray(A2.T @ w_rows).ravel()
    out = group.fn(ad.Dual(z, _block_seeds(layout)))
    tan = out.tan  # (block, dim)
    kind, info = group.structure
    q = np.zeros(layout.n)
    if kind == "uniform":
        R = info
        t3 = tan.reshape(layout.block, layout.N, R)
        q[:] = (t3 ** 2 * w_rows.reshape(layout.N, R)[None]).sum(axis=2).T.reshape(-1)
    elif kind == "single":
        k0 = info
        q[k0 * layout.block : (k0 + 1) * layout.block] = (tan ** 2) @ w_rows
    else:
        _, jac = group.value_and_jacobian(z)
        J2 = jac.multiply(jac)
        q[:] = np.asarray(J2.T @ w_rows).ravel()
    return q


def _merit_hessian(problem, z, lam, mu, quad_hess, seeds):
    """Gauss-Newton Hessian of the augmented Lagrangian merit at ``z``.

    Exact for the quadratic cost terms and the hinge/penalty parts up to the
    usual Gauss-Newton drop of constraint curvature; always positive
    semidefinite, which keeps the Newton direction a descent direction.
    """
    hess = quad_hess
    if problem.weights.gamma_feet:
        hess = hess + problem.weights.gamma_feet * feet_gauss_newton(
            z, problem.layout, problem.model, seeds)
    mats = []
    for g in problem.constraints.groups:
        vals, jac = g.value_and_jacobian(z)
        if g.kind == INEQ:
            active = (lam[g.name] + mu * vals) > 0.0
            if not active.any():
                continue
            jac = jac[active.nonzero()[0]]
        mats.append(jac)
    if mats:
        jall = sp.vstack(mats, format="csr")
        hess = hess + mu * (jall.T @ jall)
    return hess.tocsc()


def _newton_refine(z, f, g, merit, hessian, lb, ub, s, gtol, max_steps):
    """Projected Gauss-Newton descent on the merit from (z, f, g).

    Solves the free-variable Newton system with a sparse factorization and
    backtracks along the projected arc.  Returns the improved point, its
    merit value and gradient, and the number of accepted steps.
    """
    equal = lb == ub
    edge_lo = np.full_like(lb, -np.inf)
    m = np.isfinite(lb)
    edge_lo[m] = lb[m] + 1e-12 * (1.0 + np.abs(lb[m]))
    edge_hi = np.full_like(ub, np.inf)
    m = np.isfinite(ub)
    edge_hi[m] = ub[m] - 1e-12 * (1.0 + np.abs(ub[m]))
    steps = 0
    for _ in range(max_steps):
        if _projected_gradient_norm(z / s, s * g, lb / s, ub / s) <= gtol:
            break
        at_lo = z <= edge_lo
        at_hi = z >= edge_hi
        free = ~(equal | (at_lo & (g > 0.0)) | (at_hi & (g < 0.0)))
        if not free.any():
            break
        hff = hessian(z)[free][:, free].tocsc()
        tau = 1e-10 * max(1.0, hff.diagonal().max())
        p_f = None
        for _attempt in range(3):
            try:
                factor = scipy.sparse.linalg.splu(
                    hff + tau * sp.identity(hff.shape[0], format="csc"))
                cand = factor.solve(-g[free])
                if np.isfinite(cand).all():
                    p_f = cand
                    break
            except RuntimeError:
                pass
            tau *= 1e4
        if p_f is None:
            break
        p = np.zeros_like(z)
        p[free] = p_f
        accepted = False
        t = 1.0
        for _ls in range(25):
            zt = np.clip(z + t * p, lb, ub)
            step = zt - z
            slope = float(g @ step)
            if slope < 0.0:
                ft, gt = merit(zt)
                if ft <= f + 1e-4 * slope:
                    z, f, g = zt, ft, gt
                    accepted = True
                    break
            t *= 0.5
        if not accepted or np.max(np.abs(step)) < 1e-14 * (1.0 + np.max(np.abs(z))):
            break
        steps += 1
    return z, f, g, steps


def solve(problem: NlpProblem, guess: np.ndarray,
          options: Optional[SolverOptions] = None) -> Solution:
    """Minimize the NLP from the given guess; deterministic, derivative-exact."""
    opts = options or SolverOptions()
    t_start = time.perf_counter()
    lb, ub = problem.lb, problem.ub
    z = np.clip(np.asarray(guess, dtype=float).copy(), lb, ub)
    base_s = problem.scales if problem.scales is not None else np.ones(problem.n)
    s = base_s

    groups = problem.constraints.groups
    lam = {g.name: np.zeros(g.dim) for g in groups}
    lin_sq = {
        g.name: g.linear[0].multiply(g.linear[0]).tocsr()
        for g in groups if g.linear is not None
    }

    def metric(x, mu_now):
        """Diagonal inner metric: inverse sqrt of the Gauss-Newton diagonal.

        Equality rows always contribute; inequality rows only while their
        hinge is active at the current multipliers.
        """
        q = np.ones(problem.n)
        for g in groups:
            if g.kind == EQ:
                w_rows = np.ones(g.dim)
            else:
                w_rows = (lam[g.name] + mu_now * g.values(x) > 0.0).astype(float)
                if not w_rows.any():
                    continue
            q += mu_now * _weighted_column_norms_sq(
                g, x, problem.layout, w_rows, A2=lin_sq.get(g.name)
            )
        return 1.0 / np.sqrt(q)

    mu = opts.initial_penalty
    omega = 1.0 / mu
    eta = 1.0 / mu ** 0.1

    seeds = _block_seeds(problem.layout)
    quad_hess = (
        quadratic_cost_hessian(
            problem.layout, problem.weights, problem.goal, problem.model)
        if opts.refine_steps else None
    )

    log: list = []
    inner_total = 0
    best = None  # (viol, cost, z, lam snapshot)
    status = "max_iterations"

    def merit_and_grad(x):
        f, grad = problem.objective_value_and_grad(x)
        for g in groups:
            if g.linear is not None:
                vals, tan = g.values(x), None
            else:
                out = g.fn(ad.Dual(x, _block_seeds(problem.layout)))
                vals, tan = out.val, out.tan
            lam_g = lam[g.name]
            if g.kind == EQ:
                w = lam_g + mu * vals
                f += float(lam_g @ vals + 0.5 * mu * (vals @ vals))
            else:
                a = lam_g + mu * vals
                active = a > 0.0
                f += float(
                    (np.sum(a[active] ** 2) - np.sum(lam_g ** 2)) / (2.0 * mu)
                )
                w = np.where(active, a, 0.0)
            if g.linear is not None:
                grad += g.jac_t_dot(x, w)
            else:
                grad += g.jac_t_dot(x, w, tan=tan)
        return f, grad

    def merit_scaled(y):
        f, grad = merit_and_grad(s * y)
        return f, s * grad

    for outer in range(1, opts.max_outer + 1):
        if opts.precondition:
            s = metric(z, mu)
        gtol = max(omega, 0.25 * opts.optimality_tol)
        res = scipy.optimize.minimize(
            merit_scaled, z / s, jac=True, method="L-BFGS-B",
            bounds=scipy.optimize.Bounds(lb / s, ub / s),
            options={
                "maxiter": opts.inner_cap, "maxfun": 3 * opts.inner_cap,
                "gtol": gtol, "ftol": 1e-16, "maxcor": 25,
            },
        )
        z = s * res.x
        inner_total += int(res.nit)
        newton_steps = 0
        if opts.refine_steps:
            f_cur, g_cur = merit_and_grad(z)
            z, f_cur, g_cur, newton_steps = _newton_refine(
                z, f_cur, g_cur, merit_and_grad,
                lambda x: _merit_hessian(problem, x, lam, mu, quad_hess, seeds),
                lb, ub, s, gtol, opts.refine_steps,
            )
            inner_total += newton_steps

        group_vals = {g.name: g.values(z) for g in groups}
        eq_viol = max(
            (_group_violation(EQ, group_vals[g.name]) for g in groups if g.kind == EQ),
            default=0.0,
        )
        iq_viol = max(
            (_group_violation(INEQ, group_vals[g.name]) for g in groups if g.kind == INEQ),
            default=0.0,
        )
        viol = max(eq_viol, iq_viol)
        cost = float(problem.objective(z))
        pg = _projected_gradient_norm(z / s, merit_scaled(z / s)[1], lb / s, ub / s)

        log.append({
            "outer": outer, "inner": int(res.nit) + newton_steps, "cost": cost,
            "max_eq_viol": eq_viol, "max_ineq_viol": iq_viol,
            "penalty": mu, "projected_gradient": pg,
        })
        if opts.verbosity:
            print(
                f"[al] outer={outer:3d} inner={res.nit:5d}+{newton_steps:2d} "
                f"cost={cost:12.6g} viol={viol:9.3e} pg={pg:9.3e} mu={mu:8.2e}"
            )

        if best is None or (viol, cost) < best[:2]:
            best = (viol, cost, z.copy(), {k: v.copy() for k, v in lam.items()})

        if viol <= max(eta, opts.constraint_tol):
            if viol <= opts.constraint_tol and pg <= opts.optimality_tol:
                status = "converged"
                break
            for g in groups:
                vals = group_vals[g.name]
                if g.kind == EQ:
                    lam[g.name] = lam[g.name] + mu * vals
                else:
                    lam[g.name] = np.maximum(0.0, lam[g.name] + mu * vals)
            eta = max(eta / mu ** 0.9, 0.1 * opts.constraint_tol)
            omega = max(omega / mu, 0.025 * opts.optimality_tol)
        else:
            mu *= opts.penalty_growth
            if mu > opts.penalty_cap:
                status = "diverged"
                break
            eta = max(1.0 / mu ** 0.1, 0.1 * opts.constraint_tol)
            omega = max(1.0 / mu, 0.025 * opts.optimality_tol)

    if status != "converged" and best is not None and best[0] < np.inf:
        # return the best iterate seen, not necessarily the last
        z = best[2]

    group_viols = {
        g.name: _group_violation(g.kind, g.values(z)) for g in groups
    }
    eq_final = max(
        (v for g, v in zip(groups, group_viols.values()) if g.kind == EQ), default=0.0
    )
    iq_final = max(
        (v for g, v in zip(groups, group_viols.values()) if g.kind == INEQ), default=0.0
    )
    return Solution(
        decision=z,
        trajectory=trajectory_from_decision(z, problem.layout),
        cost=float(problem.objective(z)),
        max_eq_violation=eq_final,
        max_ineq_violation=iq_final,
        outer_iterations=len(log),
        inner_iterations=inner_total,
        wall_time=time.perf_counter() - t_start,
        status=status,
        iteration_log=log,
        group_violations=group_viols,
    )
