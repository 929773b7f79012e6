"""Trajectory optimization for a quadruped with steerable wheels.

Plans hybrid wheeled-legged, pure-driving and pure-stepping motions by
transcribing a single rigid body optimal control problem with orthogonal
collocation and solving the resulting NLP with an augmented Lagrangian
method backed by exact forward-mode derivatives.
"""

from .model import (DEFAULT_PITCH_MARGIN, FOOT_NAMES, NUM_FEET, STATE_DIM,
                    U1_DIM, RobotModel, SingularPitch, State, default_robot,
                    nominal_state, rolling_residual, state_derivative_vector,
                    wheel_spin_rate)
from .gait import (CONTACT, LIFT, DEFAULT_CRAWL_ORDER, GaitSchedule,
                   InfeasibleTiming, OutOfHorizon, Phase, crawl_schedule,
                   pure_drive_schedule)
from .transcription import (GridMismatch, SplineTrajectory,
                            TranscriptionConfig, UnsupportedOrder,
                            VariableLayout, gauss_legendre_nodes,
                            gauss_legendre_weights, initial_guess,
                            resample_decision, trajectory_from_decision)
from .constraints import ConstraintGroup, ConstraintSet, assemble, assemble_bounds
from .objective import GoalSpec, Weights, total_cost
from .solver import (NlpProblem, Solution, SolverOptions, differentiate,
                     solve, solver_adapter)
from .validate import AuditReport, RolloutReport, audit, compare, rollout
from .cli import (Scenario, ScenarioInvalid, SolveFailed, UnknownPreset,
                  preset, run, scenario_from_file, scenario_from_json,
                  solve_scenario)

__version__ = "0.1.0"

__all__ = [
    "AuditReport", "CONTACT", "ConstraintGroup", "ConstraintSet",
    "DEFAULT_CRAWL_ORDER", "DEFAULT_PITCH_MARGIN", "FOOT_NAMES",
    "GaitSchedule", "GoalSpec", "GridMismatch", "InfeasibleTiming", "LIFT",
    "NUM_FEET", "NlpProblem", "OutOfHorizon", "Phase", "RobotModel",
    "RolloutReport", "STATE_DIM", "Scenario", "ScenarioInvalid",
    "SingularPitch", "SolveFailed", "Solution", "SolverOptions",
    "SplineTrajectory", "State", "TranscriptionConfig", "U1_DIM",
    "UnknownPreset", "UnsupportedOrder", "VariableLayout", "Weights",
    "assemble", "assemble_bounds", "audit", "compare", "crawl_schedule",
    "default_robot", "differentiate", "gauss_legendre_nodes",
    "gauss_legendre_weights", "initial_guess", "nominal_state", "preset",
    "pure_drive_schedule", "resample_decision", "rolling_residual", "rollout",
    "run", "scenario_from_file", "scenario_from_json", "solve",
    "solve_scenario", "solver_adapter", "state_derivative_vector",
    "total_cost", "trajectory_from_decision", "wheel_spin_rate",
]
