import time

import numpy as np
import pytest

from hlto import (RobotModel, Weights, GoalSpec, NlpProblem, SolverOptions,
                  TranscriptionConfig, VariableLayout, assemble,
                  assemble_bounds, crawl_schedule, initial_guess,
                  nominal_state, preset, pure_drive_schedule, solve_scenario)


@pytest.fixture(scope="session")
def model():
    return RobotModel()


class Problem:
    """Small assembled NLP with everything tests poke at."""

    def __init__(self, model, horizon, n, schedule, goal_offset, goal_theta):
        self.model = model
        stand = nominal_state(model)
        self.x0 = stand.as_vector()
        self.goal = GoalSpec(position=stand.r + np.asarray(goal_offset, float),
                             theta=np.asarray(goal_theta, float))
        self.schedule = schedule
        cfg = TranscriptionConfig(n_intervals=n, horizon=horizon, degree=3)
        self.layout = VariableLayout(cfg, schedule)
        self.duck = _Duck(model, self.x0, self.goal)
        self.duck.schedule = schedule
        self.constraints = assemble(self.duck, self.layout, model)
        self.lb, self.ub = assemble_bounds(self.layout, model, self.x0)
        self.weights = Weights()
        self.nlp = NlpProblem(layout=self.layout, weights=self.weights,
                              goal=self.goal, model=model,
                              constraints=self.constraints,
                              lb=self.lb, ub=self.ub)
        self.z0 = initial_guess(self.duck, self.layout)

    def perturbed(self, scale=0.01, seed=0):
        rng = np.random.default_rng(seed)
        return self.z0 + scale * rng.standard_normal(self.layout.n)


class _Duck:
    def __init__(self, model, x0, goal):
        self._model = model
        self._x0 = x0
        self.goal_position = goal.position
        self.goal_theta = goal.theta

    def model(self):
        return self._model

    def initial_state_vector(self, model):
        return self._x0.copy()


@pytest.fixture(scope="session")
def drive_problem(model):
    return Problem(model, 0.8, 4, pure_drive_schedule(0.8), [0.05, 0.0, 0.0],
                   [0.0, 0.0, 0.1])


@pytest.fixture(scope="session")
def crawl_problem(model):
    sched = crawl_schedule(0.8, 1, 0.4, grid=4)
    return Problem(model, 0.8, 4, sched, [0.05, 0.0, 0.0], [0.0, 0.0, 0.0])


class PresetCache:
    """Solve each preset at most once per test session."""

    def __init__(self):
        self._runs = {}

    def get(self, name):
        if name not in self._runs:
            scenario = preset(name)
            t0 = time.time()
            legs = solve_scenario(scenario)
            self._runs[name] = (scenario, legs, time.time() - t0)
        return self._runs[name]


@pytest.fixture(scope="session")
def preset_cache():
    return PresetCache()
