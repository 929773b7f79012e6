"""Gait schedule construction and contact queries."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlto import (CONTACT, LIFT, GaitSchedule, InfeasibleTiming, OutOfHorizon,
                  Phase, crawl_schedule, pure_drive_schedule)


def test_pure_drive_always_in_contact():
    sched = pure_drive_schedule(3.0)
    for t in np.linspace(0, 3.0, 31):
        assert sched.contact_count(t) == 4
    assert sched.num_lifts() == 0


def test_crawl_counts_and_order():
    sched = crawl_schedule(8.0, 4, 0.8)
    lifts = sched.all_lifts()
    assert [f for f, _ in lifts] == [0, 3, 1, 2]
    assert sched.num_lifts() == 4
    for _, ph in lifts:
        assert np.isclose(ph.duration, 0.8)


def test_crawl_single_foot_airborne():
    sched = crawl_schedule(8.0, 4, 0.8)
    for t in np.linspace(0, 8.0, 400):
        assert sched.contact_count(t) >= 3


def test_crawl_cycles_past_four_steps():
    sched = crawl_schedule(16.0, 8, 0.7)
    lifts = sched.all_lifts()
    assert [f for f, _ in lifts] == [0, 3, 1, 2, 0, 3, 1, 2]
    assert all(len(sched.lift_phases(i)) == 2 for i in range(4))


def test_contact_boundary_is_closed():
    sched = crawl_schedule(8.0, 1, 2.0, grid=8)
    (foot, ph), = sched.all_lifts()
    assert not sched.in_contact(foot, ph.midpoint)
    assert sched.in_contact(foot, ph.start)
    assert sched.in_contact(foot, ph.end)


def test_grid_snapping_lands_on_knots():
    sched = crawl_schedule(10.0, 3, 0.55, grid=20)
    h = 10.0 / 20
    for _, ph in sched.all_lifts():
        assert abs(ph.start / h - round(ph.start / h)) < 1e-12
        assert abs(ph.end / h - round(ph.end / h)) < 1e-12


def test_infeasible_timings():
    with pytest.raises(InfeasibleTiming):
        crawl_schedule(2.0, 4, 0.8)  # lifts do not fit
    with pytest.raises(InfeasibleTiming):
        crawl_schedule(8.0, 2, -0.1)
    with pytest.raises(InfeasibleTiming):
        crawl_schedule(8.0, 2, 0.5, foot_order=(0, 0, 1, 2))
    with pytest.raises(InfeasibleTiming):
        crawl_schedule(4.0, 3, 0.9, grid=4)  # snapping collapses windows


def test_schedule_validation():
    with pytest.raises(InfeasibleTiming):
        GaitSchedule(horizon=1.0, feet=((Phase(CONTACT, 0, 1),),) * 3)
    with pytest.raises(InfeasibleTiming):
        GaitSchedule(
            horizon=1.0,
            feet=((Phase(LIFT, 0, 1),),) + ((Phase(CONTACT, 0, 1),),) * 3,
        )
    with pytest.raises(InfeasibleTiming):
        GaitSchedule(
            horizon=2.0,
            feet=((Phase(CONTACT, 0, 1),),) + ((Phase(CONTACT, 0, 2),),) * 3,
        )


def test_out_of_horizon_query():
    sched = pure_drive_schedule(1.0)
    with pytest.raises(OutOfHorizon):
        sched.in_contact(0, 1.5)
    with pytest.raises(OutOfHorizon):
        sched.contact_count(-0.2)


def test_json_round_trip():
    sched = crawl_schedule(8.0, 4, 0.8, grid=40)
    again = GaitSchedule.from_json(sched.to_json())
    assert again.horizon == sched.horizon
    assert again.feet == sched.feet


def test_zero_steps_degenerates_to_drive():
    sched = crawl_schedule(5.0, 0, 0.5)
    assert sched.num_lifts() == 0
    assert sched.contact_count(2.5) == 4


@settings(max_examples=60, deadline=None)
@given(
    n_steps=st.integers(1, 8),
    lift=st.floats(0.2, 1.0),
    horizon=st.floats(6.0, 20.0),
)
def test_crawl_properties(n_steps, lift, horizon):
    try:
        sched = crawl_schedule(horizon, n_steps, lift)
    except InfeasibleTiming:
        return
    assert sched.num_lifts() == n_steps
    for t in np.linspace(0, horizon, 200):
        assert sched.contact_count(t) >= 3
    lifts = [ph for _, ph in sched.all_lifts()]
    for a, b in zip(lifts, lifts[1:]):
        assert b.start >= a.end - 1e-12
