"""Independent checks on solved trajectories.

Two instruments live here.  ``rollout`` integrates the solved controls
forward with classical RK4, touching nothing from the transcription except
the model's state derivative, so agreement with the collocation splines is
genuine evidence that the grid resolved the dynamics.  ``audit``
re-evaluates every constraint clause at its enforcement points and then
samples the path clauses on a much denser grid, because collocation only
pins residuals at the nodes and anything between them is taken on faith.

Both reports serialize to plain dictionaries for JSON output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import EQ, ConstraintSet
from .gait import GaitSchedule
from .model import (NUM_FEET, RobotModel, SingularPitch, rolling_residual,
                    state_derivative_vector)
from .solver import Solution
from .transcription import STATE_DIM, STATE_OF_FOOTZ, STATE_OF_PI2


# ---------------------------------------------------------------------------
# forward rollout


def _zero_rate(t):
    return np.zeros(NUM_FEET)


def rollout(x0, u1, model, schedule, dt, foot_z_rate=None):
    """Integrate the dynamics under the solved controls with RK4.

    ``u1`` holds one control row per interval of an even grid over
    ``schedule.horizon`` and is held constant across its interval, matching
    how the transcription treats it.  ``foot_z_rate`` maps a time to the
    four vertical foot speeds (the derivative of the solved foot-height
    spline); when omitted the feet hold their height.  The step actually
    used is the largest even subdivision of an interval no coarser than
    ``dt``, and ``dt`` may not exceed a tenth of the interval length.

    Returns ``(times, states)`` with one state row per recorded time,
    starting at ``x0`` and t = 0.
    """
    u1 = np.asarray(u1, dtype=float)
    if u1.ndim != 2:
        raise ValueError("u1 must be (intervals, controls)")
    n_int = u1.shape[0]
    h = schedule.horizon / n_int
    if dt > h / 10 + 1e-12:
        raise ValueError(f"dt={dt} exceeds a tenth of the interval {h}")
    rate = _zero_rate if foot_z_rate is None else foot_z_rate
    m = max(10, int(np.ceil(h / dt - 1e-12)))
    step = h / m

    def f(t, x, uk):
        return state_derivative_vector(x, uk, rate(t), model)

    x = np.asarray(x0, dtype=float).copy()
    times = np.empty(n_int * m + 1)
    states = np.empty((n_int * m + 1, x.size))
    times[0] = 0.0
    states[0] = x
    row = 1
    for k in range(n_int):
        uk = u1[k]
        for j in range(m):
            t = k * h + j * step
            k1 = f(t, x, uk)
            k2 = f(t + step / 2, x + step / 2 * k1, uk)
            k3 = f(t + step / 2, x + step / 2 * k2, uk)
            k4 = f(t + step, x + step * k3, uk)
            x = x + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            times[row] = t + step
            states[row] = x
            row += 1
    return times, states


@dataclass
class RolloutReport:
    """Gap between the collocation splines and an independent integration."""

    times: np.ndarray
    deviation: np.ndarray  # (len(times), state dim), absolute per sample
    max_deviation: np.ndarray  # per state dimension
    dt: float

    @property
    def worst(self) -> float:
        return float(self.max_deviation.max())

    def to_json(self) -> dict:
        return {
            "dt": self.dt,
            "worst": self.worst,
            "max_deviation": self.max_deviation.tolist(),
            "times": self.times.tolist(),
            "deviation": self.deviation.tolist(),
        }


def compare(solution: Solution, model: RobotModel, schedule: GaitSchedule,
            dt: float | None = None) -> RolloutReport:
    """Roll the solved controls forward and measure drift from the splines.

    The rollout starts from the spline state at t = 0 and reuses the solved
    foot-height spline derivative as the vertical foot control, exactly the
    signal the transcription integrated.  Deviations are absolute values
    per dimension; expect them small only for converged solutions.
    """
    traj = solution.trajectory
    if dt is None:
        dt = traj.h / 10
    x0 = traj.state28(0.0)

    def rate(t):
        return traj.foot_z_rate([t])[0]

    times, states = rollout(x0, traj.u1, model, schedule, dt, foot_z_rate=rate)
    dev = np.abs(states - traj.sample(times))
    return RolloutReport(times=times, deviation=dev,
                         max_deviation=dev.max(axis=0), dt=float(dt))


# ---------------------------------------------------------------------------
# constraint audit


@dataclass
class AuditReport:
    """Constraint residuals at enforcement points plus dense path checks.

    ``clauses`` has one entry per constraint group with its worst violation,
    the time it occurs at, and a pass flag at ``tolerance``.  ``dense``
    reports inter-sample violations from a grid ``density`` times finer
    than the collocation nodes; those are listed separately because the
    solver never promised anything between nodes.
    """

    clauses: dict
    dense: dict
    tolerance: float
    density: int

    @property
    def passed(self) -> bool:
        return all(c["passes"] for c in self.clauses.values())

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "density": self.density,
            "clauses": self.clauses,
            "dense": self.dense,
        }


def _worst(residuals, times):
    idx = int(np.argmax(residuals))
    return float(residuals[idx]), float(times[idx])


def _dense_times(traj, density):
    per_interval = density * (traj.degree + 1)
    n = traj.N * per_interval + 1
    return np.linspace(0.0, traj.horizon, n)


def _contact_mask(schedule, ts):
    mask = np.empty((len(ts), NUM_FEET), dtype=bool)
    for i in range(NUM_FEET):
        mask[:, i] = [schedule.in_contact(i, t) for t in ts]
    return mask


def audit(solution: Solution, constraints: ConstraintSet, model: RobotModel,
          tolerance: float = 1e-6, density: int = 10) -> AuditReport:
    """Re-check every constraint clause of a solution.

    Enforcement points are evaluated through the constraint groups
    themselves, so the numbers match what the solver saw.  Path clauses
    (foot height during contact, leg reach, steering range, rolling, the
    dynamics residual) are additionally sampled densely from the spline.
    The report is deterministic for a given solution.
    """
    z = solution.decision
    traj = solution.trajectory
    schedule = constraints.groups[0].layout.schedule

    clauses = {}
    for g in constraints.groups:
        vals = g.values(z)
        res = np.abs(vals) if g.kind == EQ else np.maximum(vals, 0.0)
        viol, when = _worst(res, g.times)
        clauses[g.name] = {
            "kind": g.kind,
            "max_violation": viol,
            "time": when,
            "passes": bool(viol <= tolerance),
        }

    ts = _dense_times(traj, density)
    states = traj.sample(ts)
    rates = traj.pi2_rate(ts)
    fz_rate = traj.foot_z_rate(ts)
    u1 = traj.u1_at(np.minimum(ts, traj.horizon * (1 - 1e-12)))
    contact = _contact_mask(schedule, ts)
    yaw = states[:, 5]
    c, s = np.cos(yaw), np.sin(yaw)

    dense = {}

    # dynamics residual of the splines themselves
    try:
        f = state_derivative_vector(states, u1, fz_rate, model)
    except SingularPitch:
        dense["collocation"] = {"max_violation": None, "time": None,
                                "error": "pitch inside the singularity guard"}
        return AuditReport(clauses=clauses, dense=dense,
                           tolerance=tolerance, density=density)
    d_spline = np.zeros((len(ts), STATE_DIM))
    d_spline[:, STATE_OF_PI2] = rates
    d_spline[:, STATE_OF_FOOTZ] = fz_rate
    defect = np.abs(d_spline - f).max(axis=1)
    viol, when = _worst(defect, ts)
    dense["collocation"] = {"max_violation": viol, "time": when}

    # feet pinned to the ground while in contact
    level = np.zeros(len(ts))
    clearance = np.zeros(len(ts))
    for i in range(NUM_FEET):
        pz = states[:, 14 + 4 * i]
        on = contact[:, i]
        level[on] = np.maximum(level[on], np.abs(pz[on] - model.z_ground))
        clearance = np.maximum(clearance, model.z_ground - pz)
    viol, when = _worst(level, ts)
    dense["contact_level"] = {"max_violation": viol, "time": when}
    viol, when = _worst(np.maximum(clearance, 0.0), ts)
    dense["ground_clearance"] = {"max_violation": viol, "time": when}

    # leg reach box in the yaw frame
    box = np.zeros(len(ts))
    for i in range(NUM_FEET):
        dx = states[:, 12 + 4 * i] - states[:, 0]
        dy = states[:, 13 + 4 * i] - states[:, 1]
        dz = states[:, 14 + 4 * i] - states[:, 2]
        bx = c * dx + s * dy - model.nominal_feet[i, 0]
        by = -s * dx + c * dy - model.nominal_feet[i, 1]
        bz = dz - model.nominal_feet[i, 2]
        over = np.stack([np.abs(bx) - model.box_bounds[0],
                         np.abs(by) - model.box_bounds[1],
                         np.abs(bz) - model.box_bounds[2]]).max(axis=0)
        box = np.maximum(box, over)
    viol, when = _worst(np.maximum(box, 0.0), ts)
    dense["kinematic_box"] = {"max_violation": viol, "time": when}

    # steering angle relative to the body
    steer = np.zeros(len(ts))
    lo, hi = model.sigma_range
    for i in range(NUM_FEET):
        rel = states[:, 15 + 4 * i] - yaw
        steer = np.maximum(steer, np.maximum(lo - rel, rel - hi))
    viol, when = _worst(np.maximum(steer, 0.0), ts)
    dense["steering_range"] = {"max_violation": viol, "time": when}

    # no-slip residual of the commanded foot velocity while in contact;
    # the foot velocities come out of the full state-derivative pipeline so
    # a frame or indexing mistake there would surface here
    slip = np.zeros(len(ts))
    drift = np.zeros(len(ts))
    for i in range(NUM_FEET):
        sig = states[:, 15 + 4 * i]
        r = np.abs(rolling_residual(f[:, 12 + 4 * i], f[:, 13 + 4 * i], sig))
        slip = np.maximum(slip, np.where(contact[:, i], r, 0.0))
        d = np.abs(rolling_residual(rates[:, 12 + 3 * i],
                                    rates[:, 13 + 3 * i], sig))
        drift = np.maximum(drift, np.where(contact[:, i], d, 0.0))
    viol, when = _worst(slip, ts)
    dense["rolling"] = {"max_violation": viol, "time": when}
    # the same residual on the spline path derivative; nonzero between nodes
    # by interpolation error, listed for diagnosis only
    viol, when = _worst(drift, ts)
    dense["path_slip"] = {"max_violation": viol, "time": when}

    return AuditReport(clauses=clauses, dense=dense,
                       tolerance=tolerance, density=density)
