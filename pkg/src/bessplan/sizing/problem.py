"""Joint HV+MV siting and sizing problem over stacked scenario-days.

Per scenario-day and hour the problem carries: affine voltage/current/slack
constraints for every grid, interface continuity and OLTC voltage bands at
each HV/MV coupling, generator capability with symmetric reserve splits
around the day-ahead schedule, the slack-tracking power balance, battery
converter-rating cones and daily state-of-energy bookkeeping with end-of-day
reset.  A single converter rating and energy capacity per candidate node is
shared across all scenario-days; the objective trades lifetime-projected
reserve activation against those capital costs.
"""

from __future__ import annotations

import numpy as np

from ..errors import ProblemError
from ..netmodel.network import Network
from ..scenarios.scenarioset import ScenarioSet, nodal_injections
from ..specs import CouplingSpec, EssCostModel, GeneratorSpec, OperatingLimits
from .conic import COST_SCALE, ConicProblem, LinExpr, ProblemBuilder
from .dayahead import DayAheadSchedule
from .gridexpr import GridHour, add_generator_capability

NOMINAL_VOLTAGE = 1.0  # converter-terminal voltage assumed for loss conversion


def build_problem(
    hv: Network,
    mv_list: list[Network],
    coupling: list[CouplingSpec],
    models: dict[str, dict[str, list]],
    scenarios: ScenarioSet,
    schedule: dict[str, DayAheadSchedule],
    gens: list[GeneratorSpec] | None = None,
    ess_costs: EssCostModel | None = None,
    limits: OperatingLimits | None = None,
    *,
    no_ess: bool = False,
    candidates: dict[str, list[int]] | None = None,
) -> ConicProblem:
    """Assemble the conic siting/sizing problem in canonical form.

    ``models`` maps grid key -> typical-day label -> per-hour LinearGridModel
    list; grid keys are "hv" plus each MV network's name.  ``schedule`` maps
    typical-day labels to day-ahead schedules.  With ``no_ess`` every battery
    variable is omitted (conventional reserve only) and the substation
    power-factor cone is dropped, since the interface flows are then fixed by
    the realizations and cannot be steered.
    """
    gens = list(hv.generators if gens is None else gens)
    ess_costs = ess_costs or EssCostModel()
    limits = limits or OperatingLimits()
    mv_by_name = {mv.name: mv for mv in mv_list}
    _check_inputs(hv, mv_list, coupling, models, scenarios, schedule, gens, mv_by_name)

    s_base = hv.power_base
    t_s = 1.0
    lifetime = scenarios.lifetime_years
    slack_gens = [g for g in gens if g.bus == hv.slack_bus]
    free_gens = [(i, g) for i, g in enumerate(gens) if g.bus != hv.slack_bus]

    if candidates is None:
        candidates = {"hv": list(hv.ess_candidates)}
        for mv in mv_list:
            candidates[mv.name] = list(mv.ess_candidates)
    if no_ess:
        candidates = {key: [] for key in candidates}

    grids: dict[str, Network] = {"hv": hv, **mv_by_name}
    builder = ProblemBuilder()

    # -- shared sizing variables ----------------------------------------------
    snom: dict[tuple[str, int], LinExpr] = {}
    enom: dict[tuple[str, int], LinExpr] = {}
    for key, nodes in candidates.items():
        for n in nodes:
            snom[key, n] = builder.add_var(f"snom[{key}][{n}]", lower=0.0)
            enom[key, n] = builder.add_var(f"enom[{key}][{n}]", lower=0.0)
            builder.add_objective(COST_SCALE * ess_costs.c_power * s_base * snom[key, n])
            builder.add_objective(COST_SCALE * ess_costs.c_energy * s_base * enom[key, n])

    hours_by_day = {}
    for day in scenarios.days:
        s = day.label
        td = day.typical_day
        sched = schedule[td]
        horizon = len(day.realizations[0].p)
        hours_by_day[s] = horizon
        if sched.hours != horizon:
            raise ProblemError(f"scenario {s}: horizon {horizon} != schedule {sched.hours}")
        for key, grid in grids.items():
            if len(models[key][td]) != horizon:
                raise ProblemError(f"scenario {s}: grid {key} has wrong model count")

        weight_factor = day.weight * lifetime
        ess_vars = _add_ess_day(builder, candidates, ess_costs, snom, enom, s, horizon,
                                t_s, weight_factor, s_base)

        # fixed injections from the realizations
        base = {
            key: nodal_injections(day.realizations, grid, key, horizon)
            for key, grid in grids.items()
        }

        v0_hv, up, dn, qg = {}, {}, {}, {}
        lo_hv, hi_hv = hv.voltage_bounds(limits.voltage_band)
        lo_hv = lo_hv + limits.voltage_margin
        hi_hv = hi_hv - limits.voltage_margin
        for t in range(horizon):
            v0_hv[t] = builder.add_var(
                f"v0hv[{s}][{t}]", lower=lo_hv[hv.slack_index], upper=hi_hv[hv.slack_index]
            )

            p_exprs: list = list(base["hv"][0][t])
            q_exprs: list = list(base["hv"][1][t])
            for i, gen in free_gens:
                pos = hv.index_of(gen.bus)
                up[i, t] = builder.add_var(f"up[{i}][{s}][{t}]", lower=0.0)
                dn[i, t] = builder.add_var(f"dn[{i}][{s}][{t}]", lower=0.0)
                qg[i, t] = builder.add_var(f"qg[{i}][{s}][{t}]")
                # price reactive *deviation from the schedule*: the linear
                # models were anchored there, so staying close keeps them valid
                qabs = builder.add_var(f"qabs[{i}][{s}][{t}]", lower=0.0)
                q_sched = float(sched.gen_q[i, t])
                builder.add_le(qg[i, t] - q_sched, qabs, f"qabs_hi[{i}][{s}][{t}]")
                builder.add_ge(qg[i, t] - q_sched, -1.0 * qabs, f"qabs_lo[{i}][{s}][{t}]")
                pg_expr = sched.gen_p[i, t] + up[i, t] - dn[i, t]
                p_exprs[pos] = p_exprs[pos] + pg_expr
                q_exprs[pos] = q_exprs[pos] + qg[i, t]
                add_generator_capability(builder, pg_expr, qg[i, t], gen, s_base,
                                         f"g{i}[{s}][{t}]")
                builder.add_objective(
                    COST_SCALE * weight_factor * s_base * t_s
                    * (gen.reserve_cost * (up[i, t] + dn[i, t])
                       + limits.reactive_dispatch_cost * qabs)
                )
            for (key, n), vars_t in ess_vars.items():
                if key == "hv":
                    pos = hv.index_of(n)
                    p_exprs[pos] = p_exprs[pos] + vars_t["bp"][t]
                    q_exprs[pos] = q_exprs[pos] + vars_t["bq"][t]

            # interface flow variables appear as loads on the HV side
            px, qx = {}, {}
            for c_idx, cpl in enumerate(coupling):
                px[c_idx] = builder.add_var(f"px[{c_idx}][{s}][{t}]")
                qx[c_idx] = builder.add_var(f"qx[{c_idx}][{s}][{t}]")
                pos = hv.index_of(cpl.hv_bus)
                p_exprs[pos] = p_exprs[pos] - px[c_idx]
                q_exprs[pos] = q_exprs[pos] - qx[c_idx]

            hv_hour = GridHour(hv, models["hv"][td][t], p_exprs, q_exprs, v0_hv[t])
            hv_hour.add_voltage_limits(builder, lo_hv, hi_hv, f"hv[{s}][{t}]")
            hv_hour.add_ampacity_limits(builder, limits.ampacity_scale, f"hv[{s}][{t}]")
            p0 = hv_hour.slack_p()
            q0 = hv_hour.slack_q()

            builder.add_eq(p0, float(sched.slack_p[t]), f"balance[{s}][{t}]")
            if slack_gens:
                add_generator_capability(builder, p0, q0, slack_gens[0], s_base,
                                         f"slack[{s}][{t}]")

            for c_idx, cpl in enumerate(coupling):
                mv = mv_by_name[cpl.mv_network]
                lo_mv, hi_mv = mv.voltage_bounds(limits.voltage_band)
                lo_mv = lo_mv + limits.voltage_margin
                hi_mv = hi_mv - limits.voltage_margin
                # the MV slack is a coupling artifact: keep its file band
                lo_mv[mv.slack_index] = mv.buses[mv.slack_index].v_min
                hi_mv[mv.slack_index] = mv.buses[mv.slack_index].v_max
                v0_mv = builder.add_var(
                    f"v0mv[{cpl.mv_network}][{s}][{t}]",
                    lower=lo_mv[mv.slack_index],
                    upper=hi_mv[mv.slack_index],
                )
                mp: list = list(base[cpl.mv_network][0][t])
                mq: list = list(base[cpl.mv_network][1][t])
                for (key, n), vars_t in ess_vars.items():
                    if key == cpl.mv_network:
                        pos = mv.index_of(n)
                        mp[pos] = mp[pos] + vars_t["bp"][t]
                        mq[pos] = mq[pos] + vars_t["bq"][t]
                mv_hour = GridHour(mv, models[cpl.mv_network][td][t], mp, mq, v0_mv)
                mv_hour.add_voltage_limits(builder, lo_mv, hi_mv, f"{cpl.mv_network}[{s}][{t}]")
                mv_hour.add_ampacity_limits(builder, limits.ampacity_scale,
                                            f"{cpl.mv_network}[{s}][{t}]")

                builder.add_eq(px[c_idx], mv_hour.slack_p(),
                               f"continuity_p[{cpl.mv_network}][{s}][{t}]")
                builder.add_eq(qx[c_idx], mv_hour.slack_q(),
                               f"continuity_q[{cpl.mv_network}][{s}][{t}]")

                v_iface = hv_hour.voltage(hv.index_of(cpl.hv_bus))
                c = cpl.oltc_band_c
                builder.add_le(v0_mv, c * v_iface, f"oltc_hi[{cpl.mv_network}][{s}][{t}]")
                builder.add_ge(v0_mv, (1.0 / c) * v_iface, f"oltc_lo[{cpl.mv_network}][{s}][{t}]")

                if limits.substation_pf_min is not None and not no_ess:
                    # reactive transit capped at the pf-equivalent share of the
                    # *scheduled* import: a decision-free right-hand side, so
                    # the optimizer cannot inflate losses to buy Q headroom
                    flow_star = models[cpl.mv_network][td][t].slack_flow_at_linearization()
                    q_cap = float(
                        np.tan(np.arccos(limits.substation_pf_min)) * max(flow_star[0], 0.0)
                    )
                    builder.add_le(qx[c_idx], q_cap,
                                   f"substation_pf_hi[{cpl.mv_network}][{s}][{t}]")
                    builder.add_ge(qx[c_idx], -q_cap,
                                   f"substation_pf_lo[{cpl.mv_network}][{s}][{t}]")

    meta = {
        "cost_scale": COST_SCALE,
        "s_base": s_base,
        "t_s": t_s,
        "lifetime_years": lifetime,
        "scenario_labels": [d.label for d in scenarios.days],
        "weights": {d.label: d.weight for d in scenarios.days},
        "typical_day": {d.label: d.typical_day for d in scenarios.days},
        "hours": hours_by_day,
        "gens": gens,
        "free_gen_indices": [i for i, _ in free_gens],
        "slack_gen_index": gens.index(slack_gens[0]) if slack_gens else None,
        "candidates": candidates,
        "ess_costs": ess_costs,
        "grids": grids,
        "coupling": coupling,
        "schedule": schedule,
        "models": models,
        "limits": limits,
        "no_ess": no_ess,
        "scenarios": scenarios,
    }
    return builder.build(meta=meta)


def _add_ess_day(builder: ProblemBuilder, candidates, ess_costs: EssCostModel,
                 snom, enom, s: str, horizon: int, t_s: float,
                 weight_factor: float, s_base: float) -> dict:
    """Battery variables, loss coupling, SOE chain and epigraphs for one day."""
    loss_price = COST_SCALE * weight_factor * ess_costs.loss_energy_cost * s_base * t_s
    ess_vars: dict[tuple[str, int], dict] = {}
    for key, nodes in candidates.items():
        for n in nodes:
            tag = f"{key}][{n}][{s}"
            bp, bq, soe, internal = [], [], [], []
            for t in range(horizon):
                bq_t = builder.add_var(f"bq[{tag}][{t}]")
                bq.append(bq_t)
                if ess_costs.loss_mode == "thevenin":
                    bp_t = builder.add_var(f"bp[{tag}][{t}]")
                    pint_t = builder.add_var(f"pint[{tag}][{t}]")
                    resistance = ess_costs.thevenin_resistance
                    if resistance == 0.0:
                        builder.add_eq(pint_t, bp_t, f"lossless[{tag}][{t}]")
                    else:
                        # pint - bp >= R (bp^2 + bq^2) / v^2 as a 4-dim cone
                        a = NOMINAL_VOLTAGE**2 / resistance
                        u = pint_t - bp_t
                        scale = 2.0 / np.sqrt(a)
                        builder.add_soc(u + 1.0, [scale * bp_t, scale * bq_t, u - 1.0],
                                        f"ess_loss[{tag}][{t}]")
                        # destroyed energy is re-purchased at the spot price
                        builder.add_objective(loss_price * u)
                    withdrawn = pint_t
                    bp.append(bp_t)
                    internal.append(pint_t)
                else:
                    pch_t = builder.add_var(f"pch[{tag}][{t}]", lower=0.0)
                    pdis_t = builder.add_var(f"pdis[{tag}][{t}]", lower=0.0)
                    eta = ess_costs.efficiency
                    bp.append(pdis_t - pch_t)
                    internal.append((pch_t, pdis_t))
                    withdrawn = (1.0 / eta) * pdis_t - eta * pch_t
                    # conversion-loss throughput: (1/eta - 1) pdis + (1 - eta) pch
                    if eta < 1.0:
                        builder.add_objective(
                            loss_price * ((1.0 / eta - 1.0) * pdis_t + (1.0 - eta) * pch_t)
                        )

                soe_t = builder.add_var(f"soe[{tag}][{t}]")
                if t == 0:
                    builder.add_eq(soe_t, t_s * withdrawn, f"soe0[{tag}]")
                else:
                    builder.add_eq(soe_t, soe[t - 1] + t_s * withdrawn, f"soe[{tag}][{t}]")
                soe.append(soe_t)

                if ess_costs.loss_mode == "thevenin":
                    builder.add_soc(snom[key, n], [bp[t], bq_t], f"rating[{tag}][{t}]")
                else:
                    pch_t, pdis_t = internal[t]
                    builder.add_soc(snom[key, n], [pch_t + pdis_t, bq_t],
                                    f"rating[{tag}][{t}]")

            builder.add_eq(soe[horizon - 1], 0.0, f"soe_reset[{tag}]")
            # daily excursion epigraph; the zero starting state is part of it
            peak = builder.add_var(f"soe_max[{tag}]")
            trough = builder.add_var(f"soe_min[{tag}]")
            for t in range(horizon):
                builder.add_ge(peak, soe[t], f"soe_peak[{tag}][{t}]")
                builder.add_le(trough, soe[t], f"soe_trough[{tag}][{t}]")
            builder.add_ge(peak, 0.0, f"soe_peak0[{tag}]")
            builder.add_le(trough, 0.0, f"soe_trough0[{tag}]")
            builder.add_ge(enom[key, n], peak - trough, f"enom[{tag}]")
            ess_vars[key, n] = {"bp": bp, "bq": bq, "soe": soe, "internal": internal}
    return ess_vars


def _check_inputs(hv, mv_list, coupling, models, scenarios, schedule, gens, mv_by_name):
    if "hv" not in models:
        raise ProblemError("models must contain the 'hv' grid")
    for cpl in coupling:
        if cpl.mv_network not in mv_by_name:
            raise ProblemError(f"coupling references unknown MV network {cpl.mv_network!r}")
        if cpl.mv_network not in models:
            raise ProblemError(f"no models for MV network {cpl.mv_network!r}")
        if cpl.hv_bus not in hv.bus_ids:
            raise ProblemError(f"coupling references unknown HV bus {cpl.hv_bus}")
    coupled = {c.mv_network for c in coupling}
    for mv in mv_list:
        if mv.name not in coupled:
            raise ProblemError(f"MV network {mv.name!r} has no coupling")
        if mv.generators:
            raise ProblemError("generators on MV networks are not supported")
    for td in scenarios.typical_days:
        if td not in schedule:
            raise ProblemError(f"missing day-ahead schedule for typical day {td!r}")
        for key in models:
            if td not in models[key]:
                raise ProblemError(f"missing models for grid {key!r}, typical day {td!r}")
    if len([g for g in gens if g.bus == hv.slack_bus]) > 1:
        raise ProblemError("at most one generator may sit at the slack bus")
