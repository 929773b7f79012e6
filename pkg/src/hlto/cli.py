"""End-to-end pipeline: scenario file in, trajectory artifacts out.

A scenario bundles the robot profile, gait choice, goal pose, horizon and
grid size.  ``run`` chains gait construction, transcription, a two-stage
continuation solve, the constraint audit and the rollout check, then writes
everything a downstream consumer needs: dense trajectory CSV, spline
coefficients, iteration log, audit report and plot-ready per-foot traces.
A goal switch mid-horizon is handled as two chained solves, the second
starting exactly at the first's switch-time state.

Everything is deterministic: identical scenario plus flags gives
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .constraints import assemble, assemble_bounds
from .gait import (DEFAULT_CRAWL_ORDER, GaitSchedule, InfeasibleTiming,
                   crawl_schedule, pure_drive_schedule)
from .model import NUM_FEET, RobotModel, SingularPitch, nominal_state
from .objective import GoalSpec, Weights
from .solver import NlpProblem, Solution, SolverOptions, solve
from .transcription import (GridMismatch, SplineTrajectory,
                            TranscriptionConfig, VariableLayout,
                            initial_guess, resample_decision,
                            trajectory_from_decision)
from .validate import audit, compare

SCHEMA_VERSION = 1

ROBOT_PROFILE_ENV = "HLTO_ROBOT_PROFILE"


class ScenarioInvalid(ValueError):
    """Scenario rejected; ``field`` names the offending entry."""

    def __init__(self, field_path: str, message: str):
        self.field = field_path
        super().__init__(f"{field_path}: {message}")


class UnknownPreset(ValueError):
    pass


class SolveFailed(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# scenario


@dataclass
class Scenario:
    """Complete problem statement for one planning run."""

    name: str
    horizon: float
    intervals: int
    gait: dict  # {"type": "drive"} or {"type": "crawl", "steps", "lift_duration", ...}
    goal_position: np.ndarray
    goal_theta: np.ndarray
    start_xy: tuple = (0.0, 0.0)
    start_yaw: float = 0.0
    robot: RobotModel = field(default_factory=RobotModel)
    weights: Weights = field(default_factory=Weights)
    tolerance: float = 1e-6
    goal_switch: dict | None = None  # {"time", "position", "theta"}

    def __post_init__(self):
        self.goal_position = np.asarray(self.goal_position, dtype=float)
        self.goal_theta = np.asarray(self.goal_theta, dtype=float)
        self.validate()

    def validate(self):
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise ScenarioInvalid("horizon", "must be positive")
        if self.intervals < 1:
            raise ScenarioInvalid("intervals", "need at least one interval")
        if self.goal_position.shape != (3,) or not np.all(np.isfinite(self.goal_position)):
            raise ScenarioInvalid("goal.position", "must be three finite numbers")
        if self.goal_theta.shape != (3,) or not np.all(np.isfinite(self.goal_theta)):
            raise ScenarioInvalid("goal.theta", "must be three finite numbers")
        if not np.all(np.isfinite(self.start_xy)) or not np.isfinite(self.start_yaw):
            raise ScenarioInvalid("start", "must be finite")
        if not (0 < self.tolerance < 1):
            raise ScenarioInvalid("tolerance", "must lie in (0, 1)")
        kind = self.gait.get("type")
        if kind not in ("drive", "crawl"):
            raise ScenarioInvalid("gait.type", f"unknown gait {kind!r}")
        if kind == "crawl":
            if int(self.gait.get("steps", -1)) < 0:
                raise ScenarioInvalid("gait.steps", "must be nonnegative")
            if float(self.gait.get("lift_duration", 0.0)) <= 0:
                raise ScenarioInvalid("gait.lift_duration", "must be positive")
        if self.goal_switch is not None:
            ts = float(self.goal_switch.get("time", -1.0))
            if not (0.0 < ts < self.horizon):
                raise ScenarioInvalid("goal_switch.time",
                                      "must lie strictly inside (0, horizon)")
            for key in ("position", "theta"):
                val = np.asarray(self.goal_switch.get(key, np.nan), dtype=float)
                if val.shape != (3,) or not np.all(np.isfinite(val)):
                    raise ScenarioInvalid(f"goal_switch.{key}",
                                          "must be three finite numbers")

    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "horizon": self.horizon,
            "intervals": self.intervals,
            "gait": self.gait,
            "start": {"xy": list(self.start_xy), "yaw": self.start_yaw},
            "goal": {"position": self.goal_position.tolist(),
                     "theta": self.goal_theta.tolist()},
            "robot": self.robot.to_json(),
            "weights": _weights_to_json(self.weights),
            "tolerance": self.tolerance,
        }
        if self.goal_switch is not None:
            out["goal_switch"] = {
                "time": float(self.goal_switch["time"]),
                "position": np.asarray(self.goal_switch["position"], float).tolist(),
                "theta": np.asarray(self.goal_switch["theta"], float).tolist(),
            }
        return out


def _weights_to_json(w: Weights) -> dict:
    return {
        "gamma_acc": w.gamma_acc, "gamma_goal": w.gamma_goal,
        "gamma_force": w.gamma_force, "gamma_feet": w.gamma_feet,
        "gamma_speed": w.gamma_speed, "gamma_yaw": w.gamma_yaw,
        "acc_select": w.acc_select.tolist(),
        "goal_select": w.goal_select.tolist(),
        "speed_contact_only": w.speed_contact_only,
    }


def _base_robot() -> RobotModel:
    path = os.environ.get(ROBOT_PROFILE_ENV)
    if path:
        return RobotModel.from_file(path)
    return RobotModel()


def scenario_from_json(data: dict) -> Scenario:
    """Parse and validate a scenario dictionary."""
    if not isinstance(data, dict):
        raise ScenarioInvalid("", "scenario must be a JSON object")
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ScenarioInvalid("schema", f"unsupported version {schema}")
    try:
        robot = _base_robot()
        overrides = data.get("robot")
        if overrides:
            merged = robot.to_json()
            merged.update(overrides)
            robot = RobotModel.from_json(merged)
    except (ValueError, OSError) as exc:
        raise ScenarioInvalid("robot", str(exc)) from exc
    try:
        weights = Weights()
        wdata = data.get("weights")
        if wdata:
            weights = weights.replace(**wdata)
    except (TypeError, ValueError) as exc:
        raise ScenarioInvalid("weights", str(exc)) from exc
    goal = data.get("goal")
    if not isinstance(goal, dict):
        raise ScenarioInvalid("goal", "missing goal object")
    start = data.get("start", {})
    for key in ("horizon", "intervals", "gait"):
        if key not in data:
            raise ScenarioInvalid(key, "missing required field")
    try:
        return Scenario(
            name=str(data.get("name", "custom")),
            horizon=float(data["horizon"]),
            intervals=int(data["intervals"]),
            gait=dict(data["gait"]),
            goal_position=np.asarray(goal.get("position"), dtype=float),
            goal_theta=np.asarray(goal.get("theta", [0.0, 0.0, 0.0]), dtype=float),
            start_xy=tuple(start.get("xy", (0.0, 0.0))),
            start_yaw=float(start.get("yaw", 0.0)),
            robot=robot,
            weights=weights,
            tolerance=float(data.get("tolerance", 1e-6)),
            goal_switch=data.get("goal_switch"),
        )
    except (TypeError, KeyError) as exc:
        raise ScenarioInvalid("", f"malformed scenario: {exc}") from exc


def scenario_from_file(path) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioInvalid("", f"cannot read scenario: {exc}") from exc
    return scenario_from_json(data)


# ---------------------------------------------------------------------------
# presets


def preset(name: str) -> Scenario:
    """Scenario matching one of the reference navigation patterns."""
    robot = _base_robot()
    stand = nominal_state(robot)
    ahead = stand.r.copy()

    if name == "legged":
        robot = robot.replace(v_range=np.array([0.0, 0.0]),
                              box_bounds=np.array([0.20, 0.10, 0.10]),
                              z_fly=0.08)
        goal = ahead + np.array([0.70, 0.0, 0.0])
        return Scenario(
            name=name, horizon=10.0, intervals=50,
            gait={"type": "crawl", "steps": 8, "lift_duration": 0.6},
            goal_position=goal, goal_theta=np.zeros(3),
            robot=robot,
            weights=Weights().replace(gamma_speed=0.0, gamma_yaw=0.0),
        )
    if name == "wheeled":
        goal = ahead + np.array([1.0, 0.6, 0.0])
        return Scenario(
            name=name, horizon=15.0, intervals=75,
            gait={"type": "drive"},
            goal_position=goal, goal_theta=np.array([0.0, 0.0, np.pi / 2]),
            robot=robot,
        )
    if name == "hybrid_forward":
        robot = robot.replace(z_fly=0.08)
        goal = ahead + np.array([2.0, 0.0, 0.0])
        return Scenario(
            name=name, horizon=10.0, intervals=50,
            gait={"type": "crawl", "steps": 4, "lift_duration": 0.6},
            goal_position=goal, goal_theta=np.zeros(3),
            robot=robot,
        )
    if name == "go_and_back":
        robot = robot.replace(z_fly=0.08)
        out_goal = ahead + np.array([1.0, 0.0, 0.0])
        return Scenario(
            name=name, horizon=16.0, intervals=80,
            gait={"type": "crawl", "steps": 4, "lift_duration": 0.6},
            goal_position=out_goal, goal_theta=np.array([0.0, 0.0, np.pi / 2]),
            robot=robot,
            goal_switch={"time": 8.0, "position": ahead.tolist(),
                         "theta": [0.0, 0.0, np.pi / 2]},
        )
    raise UnknownPreset(f"no preset named {name!r}")


# ---------------------------------------------------------------------------
# solving


@dataclass
class LegPlan:
    """One solved segment of the horizon with its problem objects."""

    start_time: float
    scenario_goal: GoalSpec
    schedule: GaitSchedule
    layout: VariableLayout
    constraints: object
    solution: Solution

    @property
    def trajectory(self) -> SplineTrajectory:
        return self.solution.trajectory


def _make_schedule(gait: dict, horizon: float, grid: int) -> GaitSchedule:
    if gait["type"] == "drive":
        return pure_drive_schedule(horizon)
    order = tuple(gait.get("foot_order", DEFAULT_CRAWL_ORDER))
    return crawl_schedule(horizon, int(gait["steps"]),
                          float(gait["lift_duration"]),
                          foot_order=order, grid=grid)


class _Duck:
    """Problem statement consumed by assemble and initial_guess."""

    def __init__(self, model, x0, goal_position, goal_theta, schedule):
        self._model = model
        self._x0 = np.asarray(x0, dtype=float)
        self.goal_position = np.asarray(goal_position, dtype=float)
        self.goal_theta = np.asarray(goal_theta, dtype=float)
        self.schedule = schedule

    def model(self):
        return self._model

    def initial_state_vector(self, model):
        return self._x0.copy()


def _solve_leg(scenario: Scenario, gait: dict, horizon: float, n: int,
               x0: np.ndarray, goal: GoalSpec, max_outer: int | None,
               verbosity: int):
    """Two-stage continuation solve of one horizon segment.

    A coarse grid with loose tolerances finds the motion pattern cheaply,
    then its resampled trajectory warm-starts the full grid.  The coarse
    stage is skipped when the gait cannot be timed on the coarse grid.
    """
    model = scenario.robot

    def build(n_stage):
        sched = _make_schedule(gait, horizon, n_stage)
        cfg = TranscriptionConfig(n_intervals=n_stage, horizon=horizon, degree=3)
        lay = VariableLayout(cfg, sched)
        duck = _Duck(model, x0, goal.position, goal.theta, sched)
        cons = assemble(duck, lay, model)
        lb, ub = assemble_bounds(lay, model, x0)
        prob = NlpProblem(layout=lay, weights=scenario.weights, goal=goal,
                          model=model, constraints=cons, lb=lb, ub=ub)
        return duck, lay, cons, prob

    warm = None
    n_coarse = max(10, n // 5)
    if n_coarse < n:
        try:
            duck_c, lay_c, _, prob_c = build(n_coarse)
            opts_c = SolverOptions(max_outer=6, initial_penalty=100.0,
                                   inner_cap=300, refine_steps=30,
                                   constraint_tol=3e-3, optimality_tol=1e-2,
                                   verbosity=verbosity)
            sol_c = solve(prob_c, initial_guess(duck_c, lay_c), opts_c)
            warm = sol_c
        except (InfeasibleTiming, GridMismatch):
            warm = None

    duck, lay, cons, prob = build(n)
    log = [] if warm is None else list(warm.iteration_log)
    if warm is not None:
        z0 = resample_decision(warm.trajectory, lay)
        opts = SolverOptions(max_outer=14 if max_outer is None else max_outer,
                             initial_penalty=1e3, inner_cap=150,
                             refine_steps=40, constraint_tol=scenario.tolerance,
                             optimality_tol=1e-4, verbosity=verbosity)
    else:
        z0 = initial_guess(duck, lay)
        opts = SolverOptions(max_outer=20 if max_outer is None else max_outer,
                             initial_penalty=100.0, inner_cap=300,
                             refine_steps=40, constraint_tol=scenario.tolerance,
                             optimality_tol=1e-4, verbosity=verbosity)
    sol = solve(prob, z0, opts)
    sol.iteration_log = log + list(sol.iteration_log)
    return lay, cons, sol


def solve_scenario(scenario: Scenario, n: int | None = None,
                   max_outer: int | None = None,
                   verbosity: int = 0) -> list[LegPlan]:
    """Solve a scenario, chaining two legs when a goal switch is present.

    The second leg starts from the first leg's state at the switch time, so
    the concatenated plan is continuous there by construction.
    """
    n_total = scenario.intervals if n is None else int(n)
    legs = []
    if scenario.goal_switch is None:
        segs = [(0.0, scenario.horizon, n_total,
                 GoalSpec(position=scenario.goal_position,
                          theta=scenario.goal_theta))]
    else:
        ts = float(scenario.goal_switch["time"])
        n1 = max(1, round(n_total * ts / scenario.horizon))
        n2 = max(1, n_total - n1)
        segs = [
            (0.0, ts, n1,
             GoalSpec(position=scenario.goal_position, theta=scenario.goal_theta)),
            (ts, scenario.horizon - ts, n2,
             GoalSpec(position=np.asarray(scenario.goal_switch["position"], float),
                      theta=np.asarray(scenario.goal_switch["theta"], float))),
        ]

    model = scenario.robot
    x0 = nominal_state(model, xy=scenario.start_xy,
                       yaw=scenario.start_yaw).as_vector()
    for start_time, horizon, n_leg, goal in segs:
        lay, cons, sol = _solve_leg(scenario, scenario.gait, horizon, n_leg,
                                    x0, goal, max_outer, verbosity)
        legs.append(LegPlan(start_time=start_time, scenario_goal=goal,
                            schedule=lay.schedule, layout=lay,
                            constraints=cons, solution=sol))
        x0 = sol.trajectory.state28(horizon)
    return legs


# ---------------------------------------------------------------------------
# artifact export


STATE_COLUMNS = (
    ["r_x", "r_y", "r_z", "theta_x", "theta_y", "theta_z",
     "rdot_x", "rdot_y", "rdot_z", "thetadot_x", "thetadot_y", "thetadot_z"]
    + [f"foot{i}_{c}" for i in range(NUM_FEET) for c in ("x", "y", "z", "sigma")]
)
CONTROL_COLUMNS = (
    [f"f{i}_{c}" for i in range(NUM_FEET) for c in ("x", "y", "z")]
    + [f"v_{i}" for i in range(NUM_FEET)]
    + [f"sigmadot_{i}" for i in range(NUM_FEET)]
    + [f"u2_{i}" for i in range(NUM_FEET)]
)

SAMPLES_PER_INTERVAL = 10


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _leg_samples(leg: LegPlan):
    traj = leg.trajectory
    ts = np.linspace(0.0, traj.horizon, traj.N * SAMPLES_PER_INTERVAL + 1)
    states = traj.sample(ts)
    controls = traj.controls_at(ts)
    return ts + leg.start_time, states, controls


def _stacked_samples(legs):
    ts, states, controls = [], [], []
    for j, leg in enumerate(legs):
        t, x, u = _leg_samples(leg)
        if j > 0:
            t, x, u = t[1:], x[1:], u[1:]
        ts.append(t)
        states.append(x)
        controls.append(u)
    return np.concatenate(ts), np.vstack(states), np.vstack(controls)


def export_trajectory_csv(legs, path):
    ts, states, controls = _stacked_samples(legs)
    header = ["t"] + STATE_COLUMNS + CONTROL_COLUMNS
    rows = np.hstack([ts[:, None], states, controls])
    _write_csv(path, header, rows)


def export_plot_data(legs, out_dir):
    """Plot-ready CSVs: CoM path, per-foot height, force and steering traces."""
    ts, states, controls = _stacked_samples(legs)
    _write_csv(os.path.join(out_dir, "com_path.csv"), ["t", "x", "y", "z"],
               np.hstack([ts[:, None], states[:, 0:3]]))
    for i in range(NUM_FEET):
        _write_csv(os.path.join(out_dir, f"foot_z_{i}.csv"), ["t", "z"],
                   np.hstack([ts[:, None], states[:, 14 + 4 * i:15 + 4 * i]]))
        _write_csv(os.path.join(out_dir, f"force_{i}.csv"),
                   ["t", "fx", "fy", "fz"],
                   np.hstack([ts[:, None], controls[:, 3 * i:3 * i + 3]]))
        steer = np.stack([states[:, 15 + 4 * i], controls[:, 16 + i],
                          controls[:, 12 + i]], axis=1)
        _write_csv(os.path.join(out_dir, f"steer_{i}.csv"),
                   ["t", "sigma", "sigma_dot", "v"],
                   np.hstack([ts[:, None], steer]))


def _json_dump(data, path):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def export_iteration_log(legs, path):
    with open(path, "w") as fh:
        for leg in legs:
            for rec in leg.solution.iteration_log:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def export_solution(scenario, legs, path):
    """Self-contained solve record; enough to rebuild and re-audit later."""
    data = {
        "schema": SCHEMA_VERSION,
        "scenario": scenario.to_json(),
        "legs": [
            {
                "start_time": leg.start_time,
                "horizon": leg.layout.T_f,
                "intervals": leg.layout.N,
                "goal": {"position": leg.scenario_goal.position.tolist(),
                         "theta": leg.scenario_goal.theta.tolist()},
                "status": leg.solution.status,
                "cost": leg.solution.cost,
                "max_eq_violation": leg.solution.max_eq_violation,
                "max_ineq_violation": leg.solution.max_ineq_violation,
                "outer_iterations": leg.solution.outer_iterations,
                "inner_iterations": leg.solution.inner_iterations,
                "decision": [float(v) for v in leg.solution.decision],
            }
            for leg in legs
        ],
    }
    _json_dump(data, path)


def export_spline(legs, path):
    data = {
        "schema": SCHEMA_VERSION,
        "legs": [dict(leg.trajectory.to_json(), start_time=leg.start_time)
                 for leg in legs],
    }
    _json_dump(data, path)


def _audit_legs(scenario, legs):
    reports = []
    for leg in legs:
        rep = audit(leg.solution, leg.constraints, scenario.robot,
                    tolerance=max(scenario.tolerance, 1e-9))
        entry = rep.to_json()
        entry["start_time"] = leg.start_time
        try:
            roll = compare(leg.solution, scenario.robot, leg.schedule)
            entry["rollout_max_deviation"] = roll.max_deviation.tolist()
            entry["rollout_worst"] = roll.worst
        except SingularPitch:
            entry["rollout_worst"] = None
            entry["rollout_error"] = "pitch inside the singularity guard"
        reports.append(entry)
    return {
        "schema": SCHEMA_VERSION,
        "passed": all(r["passed"] for r in reports),
        "legs": reports,
    }


def write_artifacts(scenario, legs, out_dir, audit_data):
    os.makedirs(out_dir, exist_ok=True)
    export_trajectory_csv(legs, os.path.join(out_dir, "trajectory.csv"))
    export_spline(legs, os.path.join(out_dir, "spline.json"))
    export_iteration_log(legs, os.path.join(out_dir, "iterations.jsonl"))
    export_solution(scenario, legs, os.path.join(out_dir, "solution.json"))
    _json_dump(audit_data, os.path.join(out_dir, "audit.json"))
    export_plot_data(legs, out_dir)


def run(scenario: Scenario, out_dir, n: int | None = None,
        max_outer: int | None = None, verbosity: int = 0) -> int:
    """Solve, audit and export; returns the process exit code."""
    legs = solve_scenario(scenario, n=n, max_outer=max_outer,
                          verbosity=verbosity)
    audit_data = _audit_legs(scenario, legs)
    write_artifacts(scenario, legs, out_dir, audit_data)
    solved = all(leg.solution.converged for leg in legs)
    if verbosity:
        for j, leg in enumerate(legs):
            s = leg.solution
            print(f"leg {j}: {s.status} cost {s.cost:.3f} "
                  f"viol {max(s.max_eq_violation, s.max_ineq_violation):.2e}")
        print(f"audit passed: {audit_data['passed']}")
    return 0 if solved and audit_data["passed"] else 1


def _legs_from_solution(data):
    """Rebuild LegPlan objects from an exported solution record."""
    scenario = scenario_from_json(data["scenario"])
    legs = []
    for rec in data["legs"]:
        horizon = float(rec["horizon"])
        sched = _make_schedule(scenario.gait, horizon, rec["intervals"])
        cfg = TranscriptionConfig(n_intervals=rec["intervals"],
                                  horizon=horizon, degree=3)
        lay = VariableLayout(cfg, sched)
        goal = GoalSpec(position=np.asarray(rec["goal"]["position"], float),
                        theta=np.asarray(rec["goal"]["theta"], float))
        z = np.asarray(rec["decision"], dtype=float)
        traj = trajectory_from_decision(z, lay)
        duck = _Duck(scenario.robot, traj.state28(0.0), goal.position,
                     goal.theta, sched)
        cons = assemble(duck, lay, scenario.robot)
        sol = Solution(decision=z, trajectory=traj, cost=rec["cost"],
                       max_eq_violation=rec["max_eq_violation"],
                       max_ineq_violation=rec["max_ineq_violation"],
                       outer_iterations=rec["outer_iterations"],
                       inner_iterations=rec["inner_iterations"],
                       wall_time=0.0, status=rec["status"])
        legs.append(LegPlan(start_time=rec["start_time"], scenario_goal=goal,
                            schedule=sched, layout=lay, constraints=cons,
                            solution=sol))
    return scenario, legs


def audit_only(solution_path, out_dir, verbosity: int = 0) -> int:
    """Re-audit a previously exported solution without solving."""
    try:
        with open(solution_path) as fh:
            data = json.load(fh)
        scenario, legs = _legs_from_solution(data)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ScenarioInvalid("", f"cannot load solution: {exc}") from exc
    audit_data = _audit_legs(scenario, legs)
    os.makedirs(out_dir, exist_ok=True)
    _json_dump(audit_data, os.path.join(out_dir, "audit.json"))
    if verbosity:
        print(f"audit passed: {audit_data['passed']}")
    return 0 if audit_data["passed"] else 1


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hlto",
        description="Plan hybrid wheeled-legged trajectories from a scenario file.")
    p.add_argument("--scenario", help="path to a scenario JSON file")
    p.add_argument("--preset",
                   help="built-in scenario: legged | wheeled | hybrid_forward | go_and_back")
    p.add_argument("--out", default="out", help="artifact output directory")
    p.add_argument("--n", type=int, default=None, help="override interval count")
    p.add_argument("--tol", type=float, default=None,
                   help="override constraint tolerance")
    p.add_argument("--max-iter", type=int, default=None,
                   help="cap on outer iterations of the final stage")
    p.add_argument("--audit-only", metavar="SOLUTION_JSON", default=None,
                   help="re-audit an exported solution.json instead of solving")
    p.add_argument("--seedless", action="store_true",
                   help="accepted for compatibility; runs are always deterministic")
    p.add_argument("--verbose", "-v", action="count", default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.audit_only:
            return audit_only(args.audit_only, args.out, verbosity=args.verbose)
        if bool(args.scenario) == bool(args.preset):
            print("exactly one of --scenario or --preset is required",
                  file=sys.stderr)
            return 2
        if args.preset:
            scenario = preset(args.preset)
        else:
            scenario = scenario_from_file(args.scenario)
        if args.tol is not None:
            scenario.tolerance = float(args.tol)
            scenario.validate()
        return run(scenario, args.out, n=args.n, max_outer=args.max_iter,
                   verbosity=args.verbose)
    except (ScenarioInvalid, UnknownPreset) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 2
    except SolveFailed as exc:
        print(f"solve failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
