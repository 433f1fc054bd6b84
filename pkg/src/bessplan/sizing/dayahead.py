"""Day-ahead economic dispatch on the linearized HV grid.

Produces the committed slack flow that the real-time stage must track, plus
scheduled generator set-points and the interface voltages used as OLTC band
centers.  This is a continuous dispatch: the formulation carries no on/off
decisions, generators move between their active limits at their reserve cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ProblemError
from ..netmodel.network import Network
from ..netmodel.sensitivity import LinearGridModel, evaluate_linear
from ..specs import GeneratorSpec, OperatingLimits
from .conic import COST_SCALE, LinExpr, ProblemBuilder
from .gridexpr import GridHour, add_generator_capability
from .solvers import SolverOptions, solve


@dataclass
class DayAheadSchedule:
    """Committed day-ahead operating plan for one typical day (per unit)."""

    hours: int
    gen_buses: tuple[int, ...]
    gen_p: np.ndarray            # (n_gen, T), slack-bus generators carry the slack flow
    gen_q: np.ndarray            # (n_gen, T)
    slack_p: np.ndarray          # committed HV slack flow per hour
    slack_q: np.ndarray
    slack_v: np.ndarray          # scheduled slack voltage magnitude
    v_sched: np.ndarray          # (T, n_bus) scheduled voltage magnitudes
    injections_p: np.ndarray     # (T, n_bus) total scheduled injections (incl. generators)
    injections_q: np.ndarray
    objective_eur: float
    diagnostics: list[str] = field(default_factory=list)

    def interface_voltage(self, network: Network, bus: int) -> np.ndarray:
        return self.v_sched[:, network.index_of(bus)]


def day_ahead_schedule(
    hv: Network,
    models: list[LinearGridModel],
    p_forecast: np.ndarray,
    q_forecast: np.ndarray,
    gens: list[GeneratorSpec] | None = None,
    limits: OperatingLimits | None = None,
    solver_options: SolverOptions | None = None,
    anchor_dispatch: np.ndarray | None = None,
) -> DayAheadSchedule:
    """Minimum-cost dispatch of the conventional plants against the forecast.

    ``p_forecast``/``q_forecast`` are (T, n_bus) per-unit fixed injections
    (demand negative, PV positive, lumped downstream grids included); the
    generators dispatched here must not be part of them.

    ``anchor_dispatch`` (n_gen, T, pu) is the dispatch the models were
    linearized at; when given, active redispatch is kept within the trust
    region around it, since the affine loss picture degrades away from the
    linearization point.  Callers iterate linearize/dispatch to migrate
    further than one radius.
    """
    gens = list(hv.generators if gens is None else gens)
    limits = limits or OperatingLimits()
    p_forecast = np.atleast_2d(np.asarray(p_forecast, dtype=float))
    q_forecast = np.atleast_2d(np.asarray(q_forecast, dtype=float))
    horizon = len(models)
    if horizon == 0:
        raise ProblemError("day-ahead horizon is empty")
    if p_forecast.shape != (horizon, hv.n_bus) or q_forecast.shape != (horizon, hv.n_bus):
        raise ProblemError(
            f"forecast shape {p_forecast.shape} does not match {horizon} hours x {hv.n_bus} buses"
        )
    s_base = hv.power_base
    slack_gens = [g for g in gens if g.bus == hv.slack_bus]
    if len(slack_gens) > 1:
        raise ProblemError("at most one generator may sit at the slack bus")
    free_gens = [(i, g) for i, g in enumerate(gens) if g.bus != hv.slack_bus]

    builder = ProblemBuilder()
    lo, hi = hv.voltage_bounds(limits.voltage_band)
    lo = lo + limits.voltage_margin
    hi = hi - limits.voltage_margin
    pg, qg, v0, p0, q0 = {}, {}, {}, {}, {}
    for t in range(horizon):
        v0[t] = builder.add_var(f"v0[{t}]", lower=lo[hv.slack_index], upper=hi[hv.slack_index])
        p_exprs: list = list(p_forecast[t])
        q_exprs: list = list(q_forecast[t])
        spread = builder.add_var(f"spread[{t}]", lower=0.0)
        builder.add_objective(COST_SCALE * limits.dispatch_spread_cost * spread)
        for i, gen in free_gens:
            pos = hv.index_of(gen.bus)
            pg[i, t] = builder.add_var(f"pg[{i}][{t}]")
            qg[i, t] = builder.add_var(f"qg[{i}][{t}]")
            qabs = builder.add_var(f"qabs[{i}][{t}]", lower=0.0)
            builder.add_le(qg[i, t], qabs, f"qabs_hi[{i}][{t}]")
            builder.add_ge(qg[i, t], -1.0 * qabs, f"qabs_lo[{i}][{t}]")
            builder.add_objective(COST_SCALE * limits.reactive_dispatch_cost * s_base * qabs)
            builder.add_ge(spread, (s_base / gen.p_max_mw) * pg[i, t] if gen.p_max_mw > 0
                           else LinExpr(), f"spread[{i}][{t}]")
            if anchor_dispatch is not None:
                rho = limits.dispatch_trust_region
                builder.add_le(pg[i, t], float(anchor_dispatch[i, t]) + rho,
                               f"trust_hi[{i}][{t}]")
                builder.add_ge(pg[i, t], float(anchor_dispatch[i, t]) - rho,
                               f"trust_lo[{i}][{t}]")
            p_exprs[pos] = p_exprs[pos] + pg[i, t]
            q_exprs[pos] = q_exprs[pos] + qg[i, t]
            add_generator_capability(builder, pg[i, t], qg[i, t], gen, s_base, f"g{i}t{t}")

        hour = GridHour(hv, models[t], p_exprs, q_exprs, v0[t])
        hour.add_voltage_limits(builder, lo, hi, f"hv_t{t}")
        hour.add_ampacity_limits(builder, limits.ampacity_scale, f"hv_t{t}")
        p0[t] = hour.slack_p()
        q0[t] = hour.slack_q()

        if slack_gens:
            gen = slack_gens[0]
            add_generator_capability(builder, p0[t], q0[t], gen, s_base, f"slack_t{t}")
            builder.add_objective(COST_SCALE * gen.reserve_cost * s_base * p0[t])
            if gen.p_max_mw > 0:
                builder.add_ge(spread, (s_base / gen.p_max_mw) * p0[t], f"spread_slack[{t}]")
        else:
            ex_pos = builder.add_var(f"exchange_pos[{t}]", lower=0.0)
            ex_neg = builder.add_var(f"exchange_neg[{t}]", lower=0.0)
            builder.add_eq(p0[t], ex_pos - ex_neg, f"exchange_split[{t}]")
            builder.add_objective(COST_SCALE * limits.slack_exchange_cost * s_base * (ex_pos + ex_neg))
        for i, gen in free_gens:
            builder.add_objective(COST_SCALE * gen.reserve_cost * s_base * pg[i, t])

    problem = builder.build()
    result = solve(problem, solver_options)
    if not result.is_optimal:
        raise ProblemError(
            f"day-ahead dispatch {result.status}: " + "; ".join(result.diagnostics)
        )

    x = result.x
    gen_p = np.zeros((len(gens), horizon))
    gen_q = np.zeros((len(gens), horizon))
    slack_p = np.array([p0[t].value(x) for t in range(horizon)])
    slack_q = np.array([q0[t].value(x) for t in range(horizon)])
    slack_v = np.array([v0[t].value(x) for t in range(horizon)])
    for i, gen in enumerate(gens):
        if gen.bus == hv.slack_bus:
            gen_p[i] = slack_p
            gen_q[i] = slack_q
        else:
            gen_p[i] = [pg[i, t].value(x) for t in range(horizon)]
            gen_q[i] = [qg[i, t].value(x) for t in range(horizon)]

    inj_p = p_forecast.copy()
    inj_q = q_forecast.copy()
    for i, gen in enumerate(gens):
        if gen.bus != hv.slack_bus:
            inj_p[:, hv.index_of(gen.bus)] += gen_p[i]
            inj_q[:, hv.index_of(gen.bus)] += gen_q[i]

    v_sched = np.zeros((horizon, hv.n_bus))
    for t in range(horizon):
        v, _, _ = evaluate_linear(models[t], inj_p[t], inj_q[t], slack_v[t])
        v_sched[t] = v

    return DayAheadSchedule(
        hours=horizon,
        gen_buses=tuple(g.bus for g in gens),
        gen_p=gen_p,
        gen_q=gen_q,
        slack_p=slack_p,
        slack_q=slack_q,
        slack_v=slack_v,
        v_sched=v_sched,
        injections_p=inj_p,
        injections_q=inj_q,
        objective_eur=float(result.objective) / COST_SCALE,
        diagnostics=result.diagnostics,
    )
