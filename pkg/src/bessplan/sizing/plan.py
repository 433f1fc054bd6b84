"""Siting-plan extraction, cost reporting, and the no-storage comparison."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ProblemError
from ..netmodel.sensitivity import evaluate_linear
from ..scenarios.scenarioset import nodal_injections
from ..specs import EssCostModel, GeneratorSpec, OperatingLimits
from .conic import ConicProblem
from .problem import NOMINAL_VOLTAGE, build_problem
from .solvers import SolveResult, SolverOptions, solve

PLAN_SCHEMA = "bessplan-plan/1"


@dataclass(frozen=True)
class EssInstallation:
    grid: str
    node: int
    s_nom_mva: float
    e_nom_mwh: float

    @property
    def c_rate(self) -> float:
        return self.s_nom_mva / self.e_nom_mwh if self.e_nom_mwh > 0 else float("inf")


@dataclass
class CostBreakdown:
    reserve_eur: float
    rating_eur: float
    capacity_eur: float
    reserve_energy_gwh: float

    @property
    def battery_eur(self) -> float:
        return self.rating_eur + self.capacity_eur

    @property
    def total_eur(self) -> float:
        return self.reserve_eur + self.battery_eur


@dataclass
class SitingPlan:
    """Installed sizes, dispatch trajectories and per-scenario linear predictions."""

    installations: list[EssInstallation]
    sizes: dict                 # (grid, node) -> {"s_nom_mva", "e_nom_mwh", raw variables}
    trajectories: dict          # scenario label -> trajectory record (physical units)
    costs: CostBreakdown
    objective_eur: float
    weights: dict
    typical_day: dict
    threshold_mva: float
    audits: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)

    @property
    def scenario_labels(self) -> list[str]:
        return list(self.trajectories.keys())

    def installations_of(self, grid: str) -> list[EssInstallation]:
        return [inst for inst in self.installations if inst.grid == grid]

    def to_json(self, path: str | Path) -> None:
        payload = {
            "schema": PLAN_SCHEMA,
            "threshold_mva": self.threshold_mva,
            "objective_eur": self.objective_eur,
            "installations": [
                {"grid": i.grid, "node": i.node, "s_nom_mva": i.s_nom_mva,
                 "e_nom_mwh": i.e_nom_mwh}
                for i in self.installations
            ],
            "sizes": [
                {"grid": g, "node": n, **vals} for (g, n), vals in self.sizes.items()
            ],
            "costs": self.costs.__dict__,
            "weights": self.weights,
            "typical_day": self.typical_day,
            "audits": self.audits,
            "solver": self.solver,
            "trajectories": _jsonify(self.trajectories),
        }
        Path(path).write_text(json.dumps(payload) + "\n")

    @classmethod
    def from_json(cls, path: str | Path) -> "SitingPlan":
        raw = json.loads(Path(path).read_text())
        if raw.get("schema") != PLAN_SCHEMA:
            raise ProblemError(f"{path}: unsupported plan schema {raw.get('schema')!r}")
        sizes = {
            (rec["grid"], rec["node"]): {k: v for k, v in rec.items()
                                         if k not in ("grid", "node")}
            for rec in raw["sizes"]
        }
        return cls(
            installations=[EssInstallation(**rec) for rec in raw["installations"]],
            sizes=sizes,
            trajectories={s: _unjsonify(rec) for s, rec in raw["trajectories"].items()},
            costs=CostBreakdown(**raw["costs"]),
            objective_eur=float(raw["objective_eur"]),
            weights=raw["weights"],
            typical_day=raw["typical_day"],
            threshold_mva=float(raw["threshold_mva"]),
            audits=raw.get("audits", {}),
            solver=raw.get("solver", {}),
        )


def extract_plan(problem: ConicProblem, solution: SolveResult,
                 threshold_mva: float = 0.01) -> SitingPlan:
    """Read the optimal point into a SitingPlan.

    Installed sizes are recomputed from the trajectories (maximum apparent
    power for the rating; the worst daily state-of-energy excursion for the
    capacity); the raw epigraph variables are kept alongside for tightness
    audits.  Nodes whose rating stays under ``threshold_mva`` count as "no
    installation".
    """
    if not solution.is_optimal:
        raise ProblemError(f"cannot extract a plan from a {solution.status} solution")
    meta = problem.meta
    x = solution.x
    s_base = meta["s_base"]
    t_s = meta["t_s"]
    ess_costs: EssCostModel = meta["ess_costs"]
    gens: list[GeneratorSpec] = meta["gens"]
    lifetime = meta["lifetime_years"]

    def val(name: str) -> float:
        return problem.value(x, name)

    trajectories: dict[str, dict] = {}
    reserve_eur = 0.0
    reserve_energy_mwh = 0.0
    loss_slack = 0.0
    simultaneity = 0.0
    size_tracker: dict[tuple[str, int], dict] = {
        (key, n): {"s_traj": 0.0, "e_traj": 0.0}
        for key, nodes in meta["candidates"].items() for n in nodes
    }

    for s in meta["scenario_labels"]:
        horizon = meta["hours"][s]
        td = meta["typical_day"][s]
        sched = meta["schedule"][td]
        weight_factor = meta["weights"][s] * lifetime
        rec: dict = {"typical_day": td, "hours": horizon}

        rec["v0_hv"] = np.array([val(f"v0hv[{s}][{t}]") for t in range(horizon)])
        rec["v0_mv"] = {
            cpl.mv_network: np.array(
                [val(f"v0mv[{cpl.mv_network}][{s}][{t}]") for t in range(horizon)]
            )
            for cpl in meta["coupling"]
        }
        rec["px_mw"] = {}
        rec["qx_mvar"] = {}
        for c_idx, cpl in enumerate(meta["coupling"]):
            rec["px_mw"][cpl.mv_network] = s_base * np.array(
                [val(f"px[{c_idx}][{s}][{t}]") for t in range(horizon)])
            rec["qx_mvar"][cpl.mv_network] = s_base * np.array(
                [val(f"qx[{c_idx}][{s}][{t}]") for t in range(horizon)])

        rec["gen_up_mw"], rec["gen_dn_mw"], rec["gen_q_mvar"] = {}, {}, {}
        rec["gen_p_mw"] = {}
        for i in meta["free_gen_indices"]:
            up = np.array([val(f"up[{i}][{s}][{t}]") for t in range(horizon)])
            dn = np.array([val(f"dn[{i}][{s}][{t}]") for t in range(horizon)])
            qg = np.array([val(f"qg[{i}][{s}][{t}]") for t in range(horizon)])
            rec["gen_up_mw"][str(i)] = s_base * up
            rec["gen_dn_mw"][str(i)] = s_base * dn
            rec["gen_q_mvar"][str(i)] = s_base * qg
            rec["gen_p_mw"][str(i)] = s_base * (sched.gen_p[i, :horizon] + up - dn)
            gen = gens[i]
            reserve_eur += weight_factor * gen.reserve_cost * s_base * t_s * float((up + dn).sum())
            reserve_energy_mwh += weight_factor * s_base * t_s * float((up + dn).sum())

        rec["ess"] = {}
        for key, nodes in meta["candidates"].items():
            for n in nodes:
                tag = f"{key}][{n}][{s}"
                bq = np.array([val(f"bq[{tag}][{t}]") for t in range(horizon)])
                if ess_costs.loss_mode == "thevenin":
                    bp = np.array([val(f"bp[{tag}][{t}]") for t in range(horizon)])
                    pint = np.array([val(f"pint[{tag}][{t}]") for t in range(horizon)])
                    if ess_costs.thevenin_resistance > 0:
                        losses = ess_costs.thevenin_resistance * (bp**2 + bq**2) / NOMINAL_VOLTAGE**2
                        loss_slack = max(loss_slack, float(np.max(pint - bp - losses)))
                    s_traj_vals = np.hypot(bp, bq)
                else:
                    pch = np.array([val(f"pch[{tag}][{t}]") for t in range(horizon)])
                    pdis = np.array([val(f"pdis[{tag}][{t}]") for t in range(horizon)])
                    bp = pdis - pch
                    pint = pdis / ess_costs.efficiency - ess_costs.efficiency * pch
                    simultaneity = max(simultaneity, float(np.max(pch * pdis)))
                    s_traj_vals = np.hypot(pch + pdis, bq)
                soe = np.array([val(f"soe[{tag}][{t}]") for t in range(horizon)])
                tracker = size_tracker[key, n]
                tracker["s_traj"] = max(tracker["s_traj"], float(np.max(s_traj_vals)))
                excursion = max(float(soe.max()), 0.0) - min(float(soe.min()), 0.0)
                tracker["e_traj"] = max(tracker["e_traj"], excursion)
                rec["ess"][f"{key}:{n}"] = {
                    "p_mw": s_base * bp,
                    "q_mvar": s_base * bq,
                    "p_internal_mw": s_base * pint,
                    "soe_mwh": s_base * t_s * soe,
                }

        rec["linear"] = _linear_predictions(meta, s, rec, horizon)
        rec["schedule_slack_mw"] = s_base * sched.slack_p[:horizon]
        rec["schedule_gen_mw"] = {
            str(i): s_base * sched.gen_p[i, :horizon] for i in range(len(gens))
        }
        rec["gen_bus"] = {str(i): gens[i].bus for i in meta["free_gen_indices"]}
        rec["coupling_bus"] = {cpl.mv_network: cpl.hv_bus for cpl in meta["coupling"]}
        rec["weight"] = meta["weights"][s]
        trajectories[s] = rec

    sizes = {}
    installations = []
    rating_eur = 0.0
    capacity_eur = 0.0
    for (key, n), tracker in size_tracker.items():
        raw_s = val(f"snom[{key}][{n}]")
        raw_e = val(f"enom[{key}][{n}]")
        s_mva = tracker["s_traj"] * s_base
        e_mwh = tracker["e_traj"] * s_base * t_s
        sizes[key, n] = {
            "s_nom_mva": s_mva,
            "e_nom_mwh": e_mwh,
            "s_var_mva": raw_s * s_base,
            "e_var_mwh": raw_e * s_base * t_s,
        }
        rating_eur += ess_costs.c_power * s_mva
        capacity_eur += ess_costs.c_energy * e_mwh
        if raw_s * s_base >= threshold_mva:
            installations.append(EssInstallation(grid=key, node=n,
                                                 s_nom_mva=s_mva, e_nom_mwh=e_mwh))

    costs = CostBreakdown(
        reserve_eur=reserve_eur,
        rating_eur=rating_eur,
        capacity_eur=capacity_eur,
        reserve_energy_gwh=reserve_energy_mwh / 1e3,
    )
    audits = {
        "thevenin_loss_slack_pu": loss_slack,
        "charge_discharge_overlap_pu2": simultaneity,
        "epigraph_gap_s_pu": max(
            (v["s_var_mva"] - v["s_nom_mva"]) / s_base for v in sizes.values()
        ) if sizes else 0.0,
        "epigraph_gap_e_pu": max(
            (v["e_var_mwh"] - v["e_nom_mwh"]) / (s_base * t_s) for v in sizes.values()
        ) if sizes else 0.0,
    }
    return SitingPlan(
        installations=sorted(installations, key=lambda i: (i.grid, i.node)),
        sizes=sizes,
        trajectories=trajectories,
        costs=costs,
        objective_eur=float(solution.objective) / meta.get("cost_scale", 1.0),
        weights=meta["weights"],
        typical_day=meta["typical_day"],
        threshold_mva=threshold_mva,
        audits=audits,
        solver={"name": solution.solver, "iterations": solution.iterations,
                "status": solution.status},
    )


def _linear_predictions(meta, s: str, rec: dict, horizon: int) -> dict:
    """Voltages/currents/slack flows predicted by the affine models at the optimum."""
    out = {}
    td = meta["typical_day"][s]
    sched = meta["schedule"][td]
    scenario = next(d for d in meta["scenarios"].days if d.label == s)
    s_base = meta["s_base"]
    for key, grid in meta["grids"].items():
        p, q = nodal_injections(scenario.realizations, grid, key, horizon)
        for t in range(horizon):
            if key == "hv":
                for i in meta["free_gen_indices"]:
                    gen = meta["gens"][i]
                    p[t, grid.index_of(gen.bus)] += rec["gen_p_mw"][str(i)][t] / s_base
                    q[t, grid.index_of(gen.bus)] += rec["gen_q_mvar"][str(i)][t] / s_base
                for cpl in meta["coupling"]:
                    p[t, grid.index_of(cpl.hv_bus)] -= rec["px_mw"][cpl.mv_network][t] / s_base
                    q[t, grid.index_of(cpl.hv_bus)] -= rec["qx_mvar"][cpl.mv_network][t] / s_base
            for ess_key, traj in rec["ess"].items():
                g_key, node = ess_key.rsplit(":", 1)
                if g_key == key:
                    p[t, grid.index_of(int(node))] += traj["p_mw"][t] / s_base
                    q[t, grid.index_of(int(node))] += traj["q_mvar"][t] / s_base
        v0 = rec["v0_hv"] if key == "hv" else rec["v0_mv"][key]
        v = np.zeros((horizon, grid.n_bus))
        i_mag = np.zeros((horizon, grid.n_branch))
        s0 = np.zeros((horizon, 2))
        for t in range(horizon):
            v[t], i_mag[t], s0[t] = evaluate_linear(meta["models"][key][td][t], p[t], q[t], v0[t])
        out[key] = {"v": v, "i": i_mag, "slack_mw": s_base * s0[:, 0],
                    "slack_mvar": s_base * s0[:, 1], "p_pu": p, "q_pu": q}
    return out


def cost_report(plan: SitingPlan, ess_costs: EssCostModel,
                gens: list[GeneratorSpec], lifetime_years: float) -> list[dict]:
    """Itemized cost table (values in EUR, presentation column in MEUR)."""
    rows = []
    grid_keys = sorted({grid for grid, _ in plan.sizes} | {"hv"})
    grid_keys.sort(key=lambda key: (key != "hv", key))
    for key in grid_keys:
        level = "HV" if key == "hv" else f"MV {key}"
        e_total = sum(v["e_nom_mwh"] for (g, _), v in plan.sizes.items() if g == key)
        s_total = sum(v["s_nom_mva"] for (g, _), v in plan.sizes.items() if g == key)
        rows.append({"section": level, "item": "Energy capacity",
                     "size": f"{e_total:.2f} MWh",
                     "cost_eur": ess_costs.c_energy * e_total})
        rows.append({"section": level, "item": "Power rating",
                     "size": f"{s_total:.2f} MVA",
                     "cost_eur": ess_costs.c_power * s_total})
    rows.append({"section": "Generators", "item": "Active reserve",
                 "size": f"{plan.costs.reserve_energy_gwh:.2f} GWh",
                 "cost_eur": plan.costs.reserve_eur})
    rows.append({"section": "Total", "item": "Total cost",
                 "size": "-", "cost_eur": plan.costs.total_eur})
    for row in rows:
        row["cost_meur"] = round(row["cost_eur"] / 1e6, 2)
    return rows


@dataclass
class NoEssComparison:
    status_nominal: str
    status_relaxed: str | None
    band_used: tuple[float, float] | None
    plan: SitingPlan | None
    cost_rows: list[dict] | None
    reactive_stats: dict
    diagnostics: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.plan is not None


def compare_no_ess(
    hv, mv_list, coupling, models, scenarios, schedule,
    gens=None, ess_costs=None, limits=None,
    relaxed_voltage_band: tuple[float, float] = (0.93, 1.07),
    solver_options: SolverOptions | None = None,
    threshold_mva: float = 0.01,
) -> NoEssComparison:
    """Re-solve with batteries forced out; retry at a relaxed band if needed.

    Returns the reserve-only cost table of the first feasible attempt plus
    reactive-injection statistics, or the infeasibility diagnostics of both
    attempts.
    """
    gens = list(hv.generators if gens is None else gens)
    ess_costs = ess_costs or EssCostModel()
    limits = limits or OperatingLimits()

    def attempt(band):
        trial_limits = OperatingLimits(
            voltage_band=band,
            substation_pf_min=limits.substation_pf_min,
            ampacity_scale=limits.ampacity_scale,
            slack_exchange_cost=limits.slack_exchange_cost,
        )
        problem = build_problem(hv, mv_list, coupling, models, scenarios, schedule,
                                gens=gens, ess_costs=ess_costs, limits=trial_limits,
                                no_ess=True)
        return problem, solve(problem, solver_options)

    problem, result = attempt(limits.voltage_band)
    status_nominal = result.status
    status_relaxed = None
    band_used = limits.voltage_band
    diagnostics = list(result.diagnostics)
    if not result.is_optimal:
        problem, result = attempt(relaxed_voltage_band)
        status_relaxed = result.status
        band_used = relaxed_voltage_band if result.is_optimal else None
        diagnostics += result.diagnostics

    if not result.is_optimal:
        return NoEssComparison(status_nominal, status_relaxed, None, None, None,
                               reactive_stats={}, diagnostics=diagnostics)

    plan = extract_plan(problem, result, threshold_mva=threshold_mva)
    rows = cost_report(plan, ess_costs, gens, scenarios.lifetime_years)
    reactive = _reactive_stats(plan, problem)
    return NoEssComparison(status_nominal, status_relaxed, band_used, plan, rows,
                           reactive_stats=reactive, diagnostics=diagnostics)


def _reactive_stats(plan: SitingPlan, problem: ConicProblem) -> dict:
    """Mean/max |Q| injections by provider class, in Mvar."""
    gen_q, ess_q_hv, ess_q_mv = [], [], []
    meta = problem.meta
    for s in plan.scenario_labels:
        rec = plan.trajectories[s]
        for i, q in rec["gen_q_mvar"].items():
            gen_q.extend(np.abs(q))
        if meta.get("slack_gen_index") is not None:
            gen_q.extend(np.abs(rec["linear"]["hv"]["slack_mvar"]))
        for ess_key, traj in rec["ess"].items():
            target = ess_q_hv if ess_key.startswith("hv:") else ess_q_mv
            target.extend(np.abs(traj["q_mvar"]))
    def stats(values):
        if not values:
            return {"mean_mvar": 0.0, "max_mvar": 0.0}
        arr = np.asarray(values)
        return {"mean_mvar": float(arr.mean()), "max_mvar": float(arr.max())}
    return {"generators": stats(gen_q), "ess_hv": stats(ess_q_hv), "ess_mv": stats(ess_q_mv)}


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return {"__array__": obj.tolist()}
    if isinstance(obj, (np.floating, np.integer)):
        return float(obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def _unjsonify(obj):
    if isinstance(obj, dict):
        if "__array__" in obj and len(obj) == 1:
            return np.asarray(obj["__array__"])
        return {k: _unjsonify(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unjsonify(v) for v in obj]
    return obj
