"""End-to-end run orchestration behind the CLI verbs."""

from __future__ import annotations

import logging
import time
from dataclasses import replace
from pathlib import Path

from ..errors import BessplanError, ConfigError, ProblemError, SolverError
from ..netmodel.netfile import load_network
from ..pipeline import prepare_case
from ..replay import load_report, replay
from ..scenarios import build_scenarioset, load_series, save_scenarioset
from ..scenarios.scenarioset import load_scenarioset
from ..sizing import (
    SitingPlan,
    build_problem,
    compare_no_ess,
    cost_report,
    extract_plan,
    solve,
)
from ..specs import GeneratorSpec, OperatingLimits
from . import artifacts
from .config import RunConfig

log = logging.getLogger("bessplan.run")

EXIT_OK = 0
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4
EXIT_INPUT = 5


def run(config: RunConfig) -> int:
    """Execute the configured mode; returns the process exit code."""
    try:
        lock = artifacts.acquire_lock(config.output_dir)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    t0 = time.monotonic()
    logfile = config.output_dir / "run.log"
    handler = logging.FileHandler(logfile, mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    logging.getLogger("bessplan").addHandler(handler)
    logging.getLogger("bessplan").setLevel(logging.INFO)
    try:
        if config.mode == "replay-only":
            return _run_replay_only(config)
        return _run_planning(config)
    except ConfigError as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    except SolverError as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except ProblemError as exc:
        log.error("problem error: %s", exc)
        return EXIT_INFEASIBLE if "infeasible" in str(exc).lower() else EXIT_INPUT
    except BessplanError as exc:
        log.error("run failed: %s", exc)
        return EXIT_INPUT
    finally:
        log.info("total wall time %.1f s", time.monotonic() - t0)
        logging.getLogger("bessplan").removeHandler(handler)
        handler.close()
        lock.unlink(missing_ok=True)


def _load_case(config: RunConfig):
    hv = load_network(config.hv_file)
    mv_list = [load_network(ref.file) for ref in config.mv_refs]
    gens = list(hv.generators)
    if config.reserve_cost_override is not None:
        gens = [replace(g, reserve_cost=config.reserve_cost_override) for g in gens]

    realizations = load_series(config.realizations, config.realizations_manifest)
    if config.forecasts is not None:
        forecasts = load_series(config.forecasts, config.forecasts_manifest)
    else:
        forecasts = realizations
    scenarios = build_scenarioset(
        forecasts, realizations,
        typical_day_count=config.typical_days,
        scenarios_per_day=config.scenarios_per_day,
        lifetime_years=config.lifetime_years,
        seed=config.seed,
        k_max=config.k_max,
    )
    candidates = None
    if isinstance(config.candidates, dict):
        candidates = {key: list(nodes) for key, nodes in config.candidates.items()}
    return hv, mv_list, gens, scenarios, candidates


def _run_planning(config: RunConfig) -> int:
    out = config.output_dir
    hv, mv_list, gens, scenarios, candidates = _load_case(config)
    coupling = config.couplings
    log.info("prepared inputs: %s + %d MV grids, %d scenario-days",
             hv.name, len(mv_list), len(scenarios.days))

    case = prepare_case(hv, mv_list, coupling, scenarios, gens=gens,
                        limits=config.limits, solver_options=config.solver)
    problem = build_problem(hv, mv_list, coupling, case.models, scenarios,
                            case.schedule, gens=gens, ess_costs=config.ess_costs,
                            limits=config.limits, candidates=candidates)
    log.info("problem: %d vars, %d eq, %d ineq, %d cones",
             problem.n_var, problem.n_eq, problem.n_ineq, len(problem.soc_blocks))
    result = solve(problem, config.solver)
    log.info("solve: %s (%d iterations, %.1f s)", result.status, result.iterations,
             result.solve_time)
    solver_stats = {"with_ess": {"status": result.status, "iterations": result.iterations}}

    if not result.is_optimal:
        for line in result.diagnostics:
            log.error("  %s", line)
        if result.status == "infeasible":
            log.error("hint: rerun in no-ess-comparison mode to probe the relaxed "
                      "voltage band %s", config.relaxed_voltage_band)
        artifacts.write_manifest(out, config, solver_stats, _scenario_info(scenarios))
        return EXIT_INFEASIBLE if result.status == "infeasible" else EXIT_SOLVER

    plan = extract_plan(problem, result, threshold_mva=config.threshold_mva)
    rows = cost_report(plan, config.ess_costs, gens, scenarios.lifetime_years)
    plan.to_json(out / "plan.json")
    artifacts.write_plan_table(out, rows, plan)
    artifacts.write_costs(out, rows)
    artifacts.write_dayahead(out, case.schedule, hv.power_base)
    artifacts.write_trajectories(out, plan)
    save_scenarioset(scenarios, out / "scenarioset.json")
    log.info("plan: %d installations, total cost %.2f MEUR",
             len(plan.installations), plan.costs.total_eur / 1e6)
    for key, value in plan.audits.items():
        log.info("audit %s = %.3e", key, value)

    networks = {"hv": hv, **{mv.name: mv for mv in mv_list}}
    report = replay(plan, networks, scenarios,
                    voltage_slack=config.replay_voltage_slack,
                    ampacity_slack=config.replay_ampacity_slack,
                    balance_bound=config.replay_balance_bound)
    artifacts.write_replay(out, report)
    log.info("replay: %s", report.summary)
    for label, hour, gap in report.balance_flags:
        log.warning("balance consistency flag: scenario %s hour %d gap %.3e pu",
                    label, hour, gap)

    if config.mode == "no-ess-comparison":
        comparison = compare_no_ess(
            hv, mv_list, coupling, case.models, scenarios, case.schedule,
            gens=gens, ess_costs=config.ess_costs, limits=config.limits,
            relaxed_voltage_band=config.relaxed_voltage_band,
            solver_options=config.solver, threshold_mva=config.threshold_mva,
        )
        solver_stats["no_ess"] = {
            "status_nominal": comparison.status_nominal,
            "status_relaxed": comparison.status_relaxed,
            "band_used": comparison.band_used,
        }
        log.info("no-ESS: nominal %s, relaxed %s", comparison.status_nominal,
                 comparison.status_relaxed)
        artifacts.write_comparison(
            out, rows, comparison.cost_rows,
            statuses=solver_stats["no_ess"],
            reactive_stats=comparison.reactive_stats,
        )
        if comparison.feasible:
            artifacts.write_costs(out, comparison.cost_rows, name="costs_no_ess.csv")

    artifacts.write_manifest(out, config, solver_stats, _scenario_info(scenarios))
    return EXIT_OK


def _run_replay_only(config: RunConfig) -> int:
    out = config.output_dir
    src = config.artifacts_from
    plan_path = src / "plan.json"
    sset_path = src / "scenarioset.json"
    if not plan_path.exists() or not sset_path.exists():
        raise ConfigError(f"{src} does not contain plan.json and scenarioset.json")
    plan = SitingPlan.from_json(plan_path)
    scenarios = load_scenarioset(sset_path)
    hv = load_network(config.hv_file)
    networks = {"hv": hv}
    for ref in config.mv_refs:
        net = load_network(ref.file)
        networks[net.name] = net
    report = replay(plan, networks, scenarios,
                    voltage_slack=config.replay_voltage_slack,
                    ampacity_slack=config.replay_ampacity_slack,
                    balance_bound=config.replay_balance_bound)
    artifacts.write_replay(out, report)
    artifacts.write_manifest(out, config, {"replay_only": True}, _scenario_info(scenarios))
    log.info("replay: %s", report.summary)
    return EXIT_OK


def _scenario_info(scenarios) -> dict:
    return {
        "lifetime_years": scenarios.lifetime_years,
        "days": [
            {"label": d.label, "typical_day": d.typical_day, "weight": d.weight}
            for d in scenarios.days
        ],
    }
