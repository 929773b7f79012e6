"""Contact schedules: per-foot phase timelines over the planning horizon."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

NUM_FEET = 4
DEFAULT_CRAWL_ORDER = (0, 3, 1, 2)  # LF, RH, RF, LH

CONTACT = "contact"
LIFT = "lift"


class InfeasibleTiming(ValueError):
    """Requested phases cannot tile the horizon."""


class OutOfHorizon(ValueError):
    """Queried time outside [0, horizon]."""


@dataclass(frozen=True)
class Phase:
    kind: str
    start: float
    end: float

    def __post_init__(self):
        if self.kind not in (CONTACT, LIFT):
            raise ValueError(f"unknown phase kind {self.kind!r}")
        if not self.end > self.start:
            raise InfeasibleTiming("phase must have positive duration")

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.start + self.end)


@dataclass(frozen=True)
class GaitSchedule:
    """Per-foot alternating phase timelines tiling [0, horizon].

    Contact phases are closed intervals; at a shared boundary instant the foot
    counts as in contact. Every foot starts and ends the horizon in contact.
    """

    horizon: float
    feet: tuple

    def __post_init__(self):
        if self.horizon <= 0:
            raise InfeasibleTiming("horizon must be positive")
        if len(self.feet) != NUM_FEET:
            raise InfeasibleTiming("schedule needs exactly four feet")
        feet = []
        for i, phases in enumerate(self.feet):
            phases = tuple(phases)
            if not phases:
                raise InfeasibleTiming(f"foot {i} has no phases")
            if abs(phases[0].start) > 1e-12 or abs(phases[-1].end - self.horizon) > 1e-12:
                raise InfeasibleTiming(f"foot {i} phases must tile [0, horizon]")
            for a, b in zip(phases, phases[1:]):
                if abs(a.end - b.start) > 1e-12:
                    raise InfeasibleTiming(f"foot {i} phases must be contiguous")
                if a.kind == b.kind:
                    raise InfeasibleTiming(f"foot {i} phases must alternate")
            if phases[0].kind != CONTACT or phases[-1].kind != CONTACT:
                raise InfeasibleTiming(f"foot {i} must start and end in contact")
            feet.append(phases)
        object.__setattr__(self, "feet", tuple(feet))

    def _check_time(self, t: float):
        if t < -1e-12 or t > self.horizon + 1e-12:
            raise OutOfHorizon(f"t={t} outside [0, {self.horizon}]")

    def in_contact(self, foot: int, t: float) -> bool:
        self._check_time(t)
        for ph in self.feet[foot]:
            if ph.kind == LIFT and ph.start < t < ph.end:
                return False
        return True

    def contact_count(self, t: float) -> int:
        return sum(self.in_contact(i, t) for i in range(NUM_FEET))

    def lift_phases(self, foot: int) -> tuple:
        return tuple(ph for ph in self.feet[foot] if ph.kind == LIFT)

    def all_lifts(self) -> list:
        """(foot, phase) pairs ordered by lift start time."""
        events = []
        for i in range(NUM_FEET):
            for ph in self.lift_phases(i):
                events.append((i, ph))
        events.sort(key=lambda e: e[1].start)
        return events

    def num_lifts(self) -> int:
        return len(self.all_lifts())

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "feet": [
                [{"kind": ph.kind, "start": ph.start, "end": ph.end} for ph in phases]
                for phases in self.feet
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GaitSchedule":
        feet = tuple(
            tuple(Phase(ph["kind"], ph["start"], ph["end"]) for ph in phases)
            for phases in data["feet"]
        )
        return cls(horizon=float(data["horizon"]), feet=feet)

    @classmethod
    def from_file(cls, path) -> "GaitSchedule":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def pure_drive_schedule(horizon: float) -> GaitSchedule:
    """All four feet in contact for the whole horizon."""
    feet = tuple((Phase(CONTACT, 0.0, horizon),) for _ in range(NUM_FEET))
    return GaitSchedule(horizon=horizon, feet=feet)


def _snap(t: float, h: float) -> float:
    return round(t / h) * h


def crawl_schedule(
    horizon: float,
    n_steps: int,
    lift_duration: float,
    foot_order=DEFAULT_CRAWL_ORDER,
    grid: int | None = None,
) -> GaitSchedule:
    """One-foot-at-a-time crawl: n_steps lifts spaced evenly over the horizon.

    Steps cycle through ``foot_order``. With ``grid`` set, lift boundaries are
    snapped to the planning grid of that many intervals so phase switches land
    on knots.
    """
    if n_steps < 0:
        raise InfeasibleTiming("n_steps must be nonnegative")
    if n_steps == 0:
        return pure_drive_schedule(horizon)
    if lift_duration <= 0:
        raise InfeasibleTiming("lift_duration must be positive")
    if sorted(foot_order) != [0, 1, 2, 3]:
        raise InfeasibleTiming("foot_order must be a permutation of 0..3")
    gap = (horizon - n_steps * lift_duration) / (n_steps + 1)
    if gap <= 0:
        raise InfeasibleTiming(
            f"{n_steps} lifts of {lift_duration}s cannot fit in {horizon}s with slack"
        )
    windows = []
    for s in range(n_steps):
        start = (s + 1) * gap + s * lift_duration
        end = start + lift_duration
        if grid is not None:
            h = horizon / grid
            start, end = _snap(start, h), _snap(end, h)
        windows.append((start, end))
    for (a0, a1), (b0, b1) in zip(windows, windows[1:]):
        if b0 < a1 - 1e-12:
            raise InfeasibleTiming("snapped lift windows overlap")
    per_foot_windows = [[] for _ in range(NUM_FEET)]
    for s, w in enumerate(windows):
        if w[1] - w[0] <= 1e-12:
            raise InfeasibleTiming("lift window collapsed after grid snapping")
        if w[0] <= 1e-12 or w[1] >= horizon - 1e-12:
            raise InfeasibleTiming("lift window touches the horizon boundary")
        per_foot_windows[foot_order[s % NUM_FEET]].append(w)
    feet = []
    for i in range(NUM_FEET):
        phases = []
        t = 0.0
        for (a, b) in per_foot_windows[i]:
            phases.append(Phase(CONTACT, t, a))
            phases.append(Phase(LIFT, a, b))
            t = b
        phases.append(Phase(CONTACT, t, horizon))
        feet.append(tuple(phases))
    return GaitSchedule(horizon=horizon, feet=tuple(feet))
