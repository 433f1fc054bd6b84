"""AC validation of a siting plan: re-simulate every scenario hour.

Each MV grid is solved first with its optimized slack voltage and the
realized plus battery injections; its exact AC slack flow then loads the HV
interface bus, and the HV grid is solved with the scheduled-plus-reserve
generator outputs.  Voltages and currents are checked against the statutory
limits with a declared linearization slack, and the AC slack flow is compared
with the committed day-ahead flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError
from ..netmodel.loadflow import solve_loadflow
from ..netmodel.network import Network
from ..scenarios.scenarioset import nodal_injections
from ..sizing.plan import SitingPlan

VOLTAGE_SLACK = 0.005
AMPACITY_SLACK = 0.02
BALANCE_BOUND = 1e-2


@dataclass(frozen=True)
class Violation:
    quantity: str          # "voltage_high" | "voltage_low" | "current"
    grid: str
    element: int           # bus id or branch position
    scenario: str
    hour: int
    value: float
    limit: float

    @property
    def excess(self) -> float:
        if self.quantity == "voltage_low":
            return self.limit - self.value
        return self.value - self.limit


@dataclass
class ReplayReport:
    scenarios: dict                      # label -> per-grid AC arrays and deltas
    violations: list[Violation]
    failed_hours: list[tuple[str, str, int]]
    balance_flags: list[tuple[str, int, float]]
    voltage_slack: float
    ampacity_slack: float
    summary: dict = field(default_factory=dict)

    def max_voltage_error(self) -> float:
        worst = 0.0
        for rec in self.scenarios.values():
            for grid_rec in rec["grids"].values():
                if grid_rec["v_error"].size:
                    worst = max(worst, float(np.nanmax(np.abs(grid_rec["v_error"]))))
        return worst


def replay(
    plan: SitingPlan,
    networks: dict[str, Network],
    scenarios,
    voltage_slack: float = VOLTAGE_SLACK,
    ampacity_slack: float = AMPACITY_SLACK,
    balance_bound: float = BALANCE_BOUND,
) -> ReplayReport:
    """Run the nonlinear replay of every scenario-day in the plan.

    ``networks`` maps "hv" plus MV names to Network objects, as in
    build_problem.  Non-converged hours are recorded and skipped, never
    raised.
    """
    days = {d.label: d for d in scenarios.days}
    hv = networks["hv"]
    violations: list[Violation] = []
    failed: list[tuple[str, str, int]] = []
    balance_flags: list[tuple[str, int, float]] = []
    out: dict[str, dict] = {}

    for label in plan.scenario_labels:
        day = days[label]
        rec = plan.trajectories[label]
        horizon = rec["hours"]
        day_out: dict = {"grids": {}}

        interface_p = {}
        interface_q = {}
        for key, net in networks.items():
            if key == "hv":
                continue
            p, q = nodal_injections(day.realizations, net, key, horizon)
            _apply_ess(rec, key, net, p, q)
            v0 = rec["v0_mv"][key]
            grid_rec = _solve_grid(net, key, label, p, q, v0, rec, failed)
            day_out["grids"][key] = grid_rec
            interface_p[key] = grid_rec["slack_p"]
            interface_q[key] = grid_rec["slack_q"]

        p, q = nodal_injections(day.realizations, hv, "hv", horizon)
        _apply_ess(rec, "hv", hv, p, q)
        for i_str, gen_p in rec["gen_p_mw"].items():
            pos = hv.index_of(int(rec["gen_bus"][i_str]))
            p[:, pos] += np.asarray(gen_p) / hv.power_base
            q[:, pos] += np.asarray(rec["gen_q_mvar"][i_str]) / hv.power_base
        for key in interface_p:
            pos = hv.index_of(int(rec["coupling_bus"][key]))
            p[:, pos] -= interface_p[key]
            q[:, pos] -= interface_q[key]
        grid_rec = _solve_grid(hv, "hv", label, p, q, rec["v0_hv"], rec, failed)
        day_out["grids"]["hv"] = grid_rec

        committed = np.asarray(rec["schedule_slack_mw"]) / hv.power_base
        for t in range(horizon):
            if np.isnan(grid_rec["slack_p"][t]):
                continue
            gap = abs(grid_rec["slack_p"][t] - committed[t])
            if gap > balance_bound:
                balance_flags.append((label, t, float(gap)))
        out[label] = day_out

    for label, day_out in out.items():
        _collect_violations(day_out, networks, label, voltage_slack, ampacity_slack,
                            violations)

    report = ReplayReport(
        scenarios=out,
        violations=violations,
        failed_hours=failed,
        balance_flags=balance_flags,
        voltage_slack=voltage_slack,
        ampacity_slack=ampacity_slack,
    )
    report.summary = _summarize(report)
    return report


def _apply_ess(rec: dict, key: str, net: Network, p: np.ndarray, q: np.ndarray):
    for ess_key, traj in rec["ess"].items():
        grid, node = ess_key.rsplit(":", 1)
        if grid == key:
            pos = net.index_of(int(node))
            p[:, pos] += np.asarray(traj["p_mw"]) / net.power_base
            q[:, pos] += np.asarray(traj["q_mvar"]) / net.power_base


def _solve_grid(net: Network, key: str, label: str, p: np.ndarray, q: np.ndarray,
                v0: np.ndarray, rec: dict, failed: list) -> dict:
    horizon = p.shape[0]
    v = np.full((horizon, net.n_bus), np.nan)
    i_mag = np.full((horizon, net.n_branch), np.nan)
    slack_p = np.full(horizon, np.nan)
    slack_q = np.full(horizon, np.nan)
    conservation = np.full(horizon, np.nan)
    for t in range(horizon):
        try:
            op = solve_loadflow(net, p[t], q[t], slack_voltage=float(v0[t]))
        except ConvergenceError:
            failed.append((label, key, t))
            continue
        v[t] = op.v_mag
        i_mag[t] = op.i_mag
        slack_p[t] = op.p[net.slack_index]
        slack_q[t] = op.q[net.slack_index]
        losses = sum(abs(op.currents[k]) ** 2 * br.resistance
                     for k, br in enumerate(net.branches))
        shunt_loss = _shunt_losses(net, op.voltages)
        conservation[t] = op.p.sum() - losses - shunt_loss
    linear = rec["linear"][key]
    return {
        "v": v,
        "i": i_mag,
        "slack_p": slack_p,
        "slack_q": slack_q,
        "v_error": v - np.asarray(linear["v"]),
        "i_error": i_mag - np.asarray(linear["i"]),
        "slack_error": slack_p - np.asarray(linear["slack_mw"]) / net.power_base,
        "conservation": conservation,
    }


def _shunt_losses(net: Network, voltages: np.ndarray) -> float:
    total = 0.0
    for br in net.branches:
        g_half = br.shunt_conductance / 2.0
        if g_half:
            vf = abs(voltages[net.index_of(br.from_bus)])
            vt = abs(voltages[net.index_of(br.to_bus)])
            total += g_half * (vf**2 / br.tap_ratio**2 + vt**2)
    return total


def _collect_violations(day_out, networks, label, voltage_slack, ampacity_slack,
                        violations):
    for key, grid_rec in day_out["grids"].items():
        net = networks[key]
        lo = np.array([b.v_min for b in net.buses]) - voltage_slack
        hi = np.array([b.v_max for b in net.buses]) + voltage_slack
        v = grid_rec["v"]
        for t in range(v.shape[0]):
            if np.isnan(v[t, 0]):
                continue
            for pos in range(net.n_bus):
                if key != "hv" and pos == net.slack_index:
                    continue  # fictitious coupling reference node
                bus = net.buses[pos].id
                if v[t, pos] > hi[pos]:
                    violations.append(Violation("voltage_high", key, bus, label, t,
                                                float(v[t, pos]),
                                                float(net.buses[pos].v_max)))
                elif v[t, pos] < lo[pos]:
                    violations.append(Violation("voltage_low", key, bus, label, t,
                                                float(v[t, pos]),
                                                float(net.buses[pos].v_min)))
            for pos, br in enumerate(net.branches):
                limit = br.ampacity * (1.0 + ampacity_slack)
                if grid_rec["i"][t, pos] > limit:
                    violations.append(Violation("current", key, pos, label, t,
                                                float(grid_rec["i"][t, pos]),
                                                float(br.ampacity)))


def _summarize(report: ReplayReport) -> dict:
    v_errors = []
    slack_errors = []
    for rec in report.scenarios.values():
        for grid_rec in rec["grids"].values():
            v_errors.append(grid_rec["v_error"][~np.isnan(grid_rec["v_error"])])
            se = grid_rec["slack_error"]
            slack_errors.append(se[~np.isnan(se)])
    v_all = np.concatenate(v_errors) if v_errors else np.zeros(0)
    s_all = np.concatenate(slack_errors) if slack_errors else np.zeros(0)
    return {
        "max_voltage_error_pu": float(np.max(np.abs(v_all))) if v_all.size else 0.0,
        "mean_voltage_error_pu": float(np.mean(np.abs(v_all))) if v_all.size else 0.0,
        "max_slack_error_pu": float(np.max(np.abs(s_all))) if s_all.size else 0.0,
        "violation_count": len(report.violations),
        "failed_hours": len(report.failed_hours),
        "balance_flags": len(report.balance_flags),
    }


def save_report(report: ReplayReport, path) -> None:
    import json
    from pathlib import Path

    payload = {
        "schema": "bessplan-replay/1",
        "voltage_slack": report.voltage_slack,
        "ampacity_slack": report.ampacity_slack,
        "summary": report.summary,
        "failed_hours": [list(x) for x in report.failed_hours],
        "balance_flags": [[s, t, g] for s, t, g in report.balance_flags],
        "violations": [v.__dict__ for v in report.violations],
        "scenarios": {
            label: {
                "grids": {
                    key: {k: v.tolist() for k, v in grid_rec.items()}
                    for key, grid_rec in rec["grids"].items()
                }
            }
            for label, rec in report.scenarios.items()
        },
    }
    Path(path).write_text(json.dumps(payload) + "\n")


def load_report(path) -> ReplayReport:
    import json
    from pathlib import Path

    raw = json.loads(Path(path).read_text())
    scenarios = {
        label: {
            "grids": {
                key: {k: np.asarray(v) for k, v in grid_rec.items()}
                for key, grid_rec in rec["grids"].items()
            }
        }
        for label, rec in raw["scenarios"].items()
    }
    report = ReplayReport(
        scenarios=scenarios,
        violations=[Violation(**v) for v in raw["violations"]],
        failed_hours=[tuple(x) for x in raw["failed_hours"]],
        balance_flags=[tuple(x) for x in raw["balance_flags"]],
        voltage_slack=raw["voltage_slack"],
        ampacity_slack=raw["ampacity_slack"],
    )
    report.summary = raw["summary"]
    return report


def violation_summary(report: ReplayReport) -> list[dict]:
    """Aggregate the violation list per quantity: count, worst overshoot, elements."""
    rows = []
    for quantity in ("voltage_high", "voltage_low", "current"):
        members = [v for v in report.violations if v.quantity == quantity]
        rows.append({
            "quantity": quantity,
            "count": len(members),
            "max_excess": max((v.excess for v in members), default=0.0),
            "elements": sorted({f"{v.grid}:{v.element}" for v in members}),
        })
    return rows
