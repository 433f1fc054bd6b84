"""End-to-end preparation: per-typical-day linearization and day-ahead stage.

The MV grids are solved first at their forecasts (slack at nominal voltage);
their exact AC slack flows become lumped injections at the HV coupling buses.
The HV grid is then linearized and dispatched in two passes: the second pass
re-linearizes at the scheduled generator injections and slack voltage, so the
committed slack flow is exact at the final linearization point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ProblemError
from .netmodel.loadflow import solve_loadflow
from .netmodel.network import Network
from .netmodel.sensitivity import compute_sensitivities
from .scenarios.scenarioset import nodal_injections
from .sizing.dayahead import DayAheadSchedule, day_ahead_schedule
from .sizing.solvers import SolverOptions
from .specs import CouplingSpec, GeneratorSpec, OperatingLimits

MV_SLACK_V = 1.0  # OLTC band center at the nominal secondary voltage


@dataclass
class PreparedCase:
    """Linearized models and committed schedules for every typical day."""

    hv: Network
    mv_list: list[Network]
    coupling: list[CouplingSpec]
    gens: list[GeneratorSpec]
    limits: OperatingLimits
    models: dict[str, dict[str, list]]
    schedule: dict[str, DayAheadSchedule]
    forecast_injections: dict = field(default_factory=dict)


def prepare_case(
    hv: Network,
    mv_list: list[Network],
    coupling: list[CouplingSpec],
    scenarios,
    gens: list[GeneratorSpec] | None = None,
    limits: OperatingLimits | None = None,
    solver_options: SolverOptions | None = None,
    passes: int = 2,
) -> PreparedCase:
    gens = list(hv.generators if gens is None else gens)
    limits = limits or OperatingLimits()
    mv_by_name = {mv.name: mv for mv in mv_list}
    for cpl in coupling:
        if cpl.mv_network not in mv_by_name:
            raise ProblemError(f"coupling references unknown MV network {cpl.mv_network!r}")

    models: dict[str, dict[str, list]] = {"hv": {}}
    for mv in mv_list:
        models[mv.name] = {}
    schedule: dict[str, DayAheadSchedule] = {}
    forecast_injections: dict[str, dict] = {}

    for td in scenarios.typical_days:
        forecast = scenarios.forecast[td]
        horizon = len(forecast[0].p)

        # MV grids: AC at forecast, models, and exact lumped slack flows
        lumped: dict[str, np.ndarray] = {}
        fc_store: dict = {}
        for mv in mv_list:
            p_mv, q_mv = nodal_injections(forecast, mv, mv.name, horizon)
            day_models = []
            flows = np.zeros((horizon, 2))
            for t in range(horizon):
                point = solve_loadflow(mv, p_mv[t], q_mv[t], slack_voltage=MV_SLACK_V)
                day_models.append(compute_sensitivities(mv, point))
                flows[t] = [point.p[mv.slack_index], point.q[mv.slack_index]]
            models[mv.name][td] = day_models
            lumped[mv.name] = flows
            fc_store[mv.name] = {"p": p_mv, "q": q_mv}

        # HV fixed injections: forecast series plus lumped MV interface loads
        p_hv, q_hv = nodal_injections(forecast, hv, "hv", horizon)
        for cpl in coupling:
            flows = lumped[cpl.mv_network]
            p_hv[:, hv.index_of(cpl.hv_bus)] -= flows[:, 0]
            q_hv[:, hv.index_of(cpl.hv_bus)] -= flows[:, 1]
        fc_store["hv"] = {"p": p_hv, "q": q_hv}
        forecast_injections[td] = fc_store

        # day-ahead passes: linearize, dispatch within the trust region,
        # re-linearize at the schedule
        gen_anchor = _proportional_predispatch(hv, gens, p_hv)
        dispatch_p, dispatch_q = _bus_dispatch(hv, gens, gen_anchor)
        slack_v = np.ones(horizon)
        day_schedule = None
        for _ in range(max(passes, 1)):
            day_models = []
            for t in range(horizon):
                point = solve_loadflow(hv, p_hv[t] + dispatch_p[t], q_hv[t] + dispatch_q[t],
                                       slack_voltage=slack_v[t])
                day_models.append(compute_sensitivities(hv, point))
            day_schedule = day_ahead_schedule(hv, day_models, p_hv, q_hv,
                                              gens=gens, limits=limits,
                                              solver_options=solver_options,
                                              anchor_dispatch=gen_anchor)
            gen_anchor = day_schedule.gen_p.copy()
            dispatch_p = day_schedule.injections_p - p_hv
            dispatch_q = day_schedule.injections_q - q_hv
            slack_v = day_schedule.slack_v
        # freeze the dispatch and anchor the commitment to its exact AC point;
        # equal-cost dispatches are degenerate, so re-optimizing after this
        # would drift -- the committed flow must be exact at the final models
        day_models = []
        for t in range(horizon):
            point = solve_loadflow(hv, day_schedule.injections_p[t],
                                   day_schedule.injections_q[t],
                                   slack_voltage=slack_v[t])
            day_models.append(compute_sensitivities(hv, point))
            day_schedule.slack_p[t] = point.p[hv.slack_index]
            day_schedule.slack_q[t] = point.q[hv.slack_index]
            day_schedule.v_sched[t] = np.abs(point.voltages)
            for i, gen in enumerate(gens):
                if gen.bus == hv.slack_bus:
                    day_schedule.gen_p[i, t] = point.p[hv.slack_index]
                    day_schedule.gen_q[i, t] = point.q[hv.slack_index]
        models["hv"][td] = day_models
        schedule[td] = day_schedule

    return PreparedCase(
        hv=hv,
        mv_list=mv_list,
        coupling=coupling,
        gens=gens,
        limits=limits,
        models=models,
        schedule=schedule,
        forecast_injections=forecast_injections,
    )


def _proportional_predispatch(hv: Network, gens: list[GeneratorSpec],
                              p_fixed: np.ndarray) -> np.ndarray:
    """Initial per-generator dispatch (n_gen, T): non-slack plants cover the
    net load proportionally to their active limits; the slack absorbs the rest."""
    horizon = p_fixed.shape[0]
    anchor = np.zeros((len(gens), horizon))
    free = [(i, g) for i, g in enumerate(gens) if g.bus != hv.slack_bus]
    total_cap = sum(g.p_max_mw for _, g in free)
    if not free or total_cap <= 0:
        return anchor
    for t in range(horizon):
        need = max(-p_fixed[t].sum(), 0.0)
        for i, g in free:
            share = need * g.p_max_mw / total_cap  # fraction of pu net load
            anchor[i, t] = float(np.clip(share, g.p_min_mw / hv.power_base,
                                         g.p_max_mw / hv.power_base))
    return anchor


def _bus_dispatch(hv: Network, gens: list[GeneratorSpec], anchor: np.ndarray):
    """Aggregate a per-generator dispatch into per-bus injection arrays."""
    horizon = anchor.shape[1]
    dispatch_p = np.zeros((horizon, hv.n_bus))
    dispatch_q = np.zeros((horizon, hv.n_bus))
    for i, g in enumerate(gens):
        if g.bus != hv.slack_bus:
            dispatch_p[:, hv.index_of(g.bus)] += anchor[i]
    return dispatch_p, dispatch_q
