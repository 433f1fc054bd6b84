from __future__ import annotations

import numpy as np
import pytest

from bessplan import fixtures
from bessplan.pipeline import prepare_case
from bessplan.replay import replay, violation_summary
from bessplan.sizing import (
    EssCostModel,
    OperatingLimits,
    SolverOptions,
    build_problem,
    extract_plan,
    solve,
)

LIMITS = OperatingLimits(substation_pf_min=None)


@pytest.fixture(scope="module")
def tiny_plan():
    tiny = fixtures.tiny3_network()
    scen = fixtures.tiny3_scenarios()
    case = prepare_case(tiny, [], [], scen, limits=LIMITS)
    costs = EssCostModel(loss_mode="thevenin", thevenin_resistance=0.0)
    problem = build_problem(tiny, [], [], case.models, scen, case.schedule,
                            gens=case.gens, ess_costs=costs, limits=LIMITS)
    result = solve(problem, SolverOptions())
    plan = extract_plan(problem, result)
    return tiny, scen, plan


def test_zero_deviation_replay_clean():
    tiny = fixtures.tiny3_network()
    scen = fixtures.tiny3_scenarios(deviations_mw=(0.0, 0.0))
    case = prepare_case(tiny, [], [], scen, limits=LIMITS)
    costs = EssCostModel(loss_mode="thevenin", thevenin_resistance=0.0)
    problem = build_problem(tiny, [], [], case.models, scen, case.schedule,
                            gens=case.gens, ess_costs=costs, limits=LIMITS)
    result = solve(problem)
    plan = extract_plan(problem, result)
    report = replay(plan, {"hv": tiny}, scen)
    assert report.violations == []
    assert report.failed_hours == []
    # the linear prediction is exact at the scheduled zero-deviation point
    assert report.summary["max_voltage_error_pu"] < 1e-6
    assert report.summary["max_slack_error_pu"] < 1e-6


def test_replay_tracks_linear_model(tiny_plan):
    tiny, scen, plan = tiny_plan
    report = replay(plan, {"hv": tiny}, scen)
    assert report.failed_hours == []
    # deviations move the point off the linearization; errors stay small
    assert report.summary["max_voltage_error_pu"] < 5e-3
    assert report.summary["max_slack_error_pu"] < 1e-2
    assert report.balance_flags == []


def test_replay_conservation(tiny_plan):
    tiny, scen, plan = tiny_plan
    report = replay(plan, {"hv": tiny}, scen)
    for rec in report.scenarios.values():
        conservation = rec["grids"]["hv"]["conservation"]
        assert np.all(np.abs(conservation[~np.isnan(conservation)]) < 1e-8)


def test_replay_idempotent(tiny_plan):
    tiny, scen, plan = tiny_plan
    a = replay(plan, {"hv": tiny}, scen)
    b = replay(plan, {"hv": tiny}, scen)
    assert a.summary == b.summary
    np.testing.assert_array_equal(
        a.scenarios["d0s0"]["grids"]["hv"]["v"],
        b.scenarios["d0s0"]["grids"]["hv"]["v"],
    )


def test_violation_summary_empty(tiny_plan):
    tiny, scen, plan = tiny_plan
    report = replay(plan, {"hv": tiny}, scen)
    rows = violation_summary(report)
    assert all(r["count"] == 0 for r in rows)
    assert all(r["max_excess"] == 0.0 for r in rows)


def test_violation_detection_on_forced_overvoltage(tiny_plan):
    tiny, scen, plan = tiny_plan
    # push the slack voltage command over the band: replay must flag buses
    doctored = plan
    for rec in doctored.trajectories.values():
        rec["v0_hv"] = np.full_like(rec["v0_hv"], 1.06)
    report = replay(doctored, {"hv": tiny}, scen)
    rows = violation_summary(report)
    high = [r for r in rows if r["quantity"] == "voltage_high"][0]
    assert high["count"] > 0
    assert high["max_excess"] > 0.0
    assert any(v.excess > 0 for v in report.violations)
