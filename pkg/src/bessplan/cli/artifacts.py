"""Artifact-directory writers: tables, manifests, reproducible outputs.

Everything written here must be byte-identical across reruns of the same
config and seed; timestamps and wall-clock durations go to run.log only.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import pandas as pd

from .. import __version__
from ..errors import ConfigError
from ..replay import ReplayReport, save_report, violation_summary
from ..sizing import SitingPlan
from .config import RunConfig

FLOAT_FORMAT = "%.6f"


def acquire_lock(out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = out_dir / ".lock"
    try:
        lock.touch(exist_ok=False)
    except FileExistsError:
        raise ConfigError(
            f"artifact directory {out_dir} is locked by another run "
            f"(remove {lock} if that run is dead)"
        )
    return lock


def file_sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, config: RunConfig, solver_stats: dict,
                   scenario_info: dict) -> None:
    manifest = {
        "schema": "bessplan-manifest/1",
        "package_version": __version__,
        "mode": config.mode,
        "config_sha256": config.digest(),
        "config": config.raw,
        "inputs": {str(p): file_sha256(p) for p in sorted(config.input_files())},
        "seed": config.seed,
        "solver": {
            "name": config.solver.name,
            "tol_feas": config.solver.tol_feas,
            "tol_gap_abs": config.solver.tol_gap_abs,
            "tol_gap_rel": config.solver.tol_gap_rel,
            "stats": solver_stats,
        },
        "scenarios": scenario_info,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n"
    )


def write_plan_table(out_dir: Path, cost_rows: list[dict], plan: SitingPlan) -> None:
    frame = pd.DataFrame(cost_rows)[["section", "item", "size", "cost_meur"]]
    frame.to_csv(out_dir / "plan_table.csv", index=False)
    per_node = [
        {"grid": grid, "node": node,
         "s_nom_mva": round(vals["s_nom_mva"], 6),
         "e_nom_mwh": round(vals["e_nom_mwh"], 6),
         "installed": int(any(i.grid == grid and i.node == node
                              for i in plan.installations))}
        for (grid, node), vals in sorted(plan.sizes.items())
    ]
    pd.DataFrame(per_node).to_csv(out_dir / "sizing.csv", index=False,
                                  float_format=FLOAT_FORMAT)


def write_costs(out_dir: Path, cost_rows: list[dict], name: str = "costs.csv") -> None:
    pd.DataFrame(cost_rows).to_csv(out_dir / name, index=False, float_format=FLOAT_FORMAT)


def write_dayahead(out_dir: Path, schedule: dict, power_base: float) -> None:
    directory = out_dir / "dayahead"
    directory.mkdir(exist_ok=True)
    for label, sched in schedule.items():
        frame = {"hour": np.arange(sched.hours)}
        for i, bus in enumerate(sched.gen_buses):
            frame[f"gen{i}_bus{bus}_p_mw"] = power_base * sched.gen_p[i]
            frame[f"gen{i}_bus{bus}_q_mvar"] = power_base * sched.gen_q[i]
        frame["slack_p_mw"] = power_base * sched.slack_p
        frame["slack_q_mvar"] = power_base * sched.slack_q
        frame["slack_v_pu"] = sched.slack_v
        pd.DataFrame(frame).to_csv(directory / f"{label}.csv", index=False,
                                   float_format=FLOAT_FORMAT)


def write_trajectories(out_dir: Path, plan: SitingPlan) -> None:
    directory = out_dir / "trajectories"
    directory.mkdir(exist_ok=True)
    for label in plan.scenario_labels:
        rec = plan.trajectories[label]
        frame = {"hour": np.arange(rec["hours"])}
        frame["v0_hv_pu"] = rec["v0_hv"]
        for mv_key, series in rec["v0_mv"].items():
            frame[f"v0_{mv_key}_pu"] = series
        for mv_key in rec["px_mw"]:
            frame[f"px_{mv_key}_mw"] = rec["px_mw"][mv_key]
            frame[f"qx_{mv_key}_mvar"] = rec["qx_mvar"][mv_key]
        for i_str in sorted(rec["gen_up_mw"]):
            frame[f"gen{i_str}_up_mw"] = rec["gen_up_mw"][i_str]
            frame[f"gen{i_str}_dn_mw"] = rec["gen_dn_mw"][i_str]
            frame[f"gen{i_str}_q_mvar"] = rec["gen_q_mvar"][i_str]
        for ess_key in sorted(rec["ess"]):
            traj = rec["ess"][ess_key]
            tag = ess_key.replace(":", "_n")
            frame[f"ess_{tag}_p_mw"] = traj["p_mw"]
            frame[f"ess_{tag}_q_mvar"] = traj["q_mvar"]
            frame[f"ess_{tag}_soe_mwh"] = traj["soe_mwh"]
        pd.DataFrame(frame).to_csv(directory / f"{label}.csv", index=False,
                                   float_format=FLOAT_FORMAT)


def write_replay(out_dir: Path, report: ReplayReport) -> None:
    directory = out_dir / "replay"
    directory.mkdir(exist_ok=True)
    save_report(report, directory / "report.json")
    pd.DataFrame(violation_summary(report)).to_csv(directory / "summary.csv", index=False)
    for label, rec in report.scenarios.items():
        for key, grid_rec in rec["grids"].items():
            v = grid_rec["v"]
            frame = {
                "hour": np.arange(v.shape[0]),
                "v_min_pu": np.nanmin(v, axis=1),
                "v_max_pu": np.nanmax(v, axis=1),
                "slack_p_pu": grid_rec["slack_p"],
                "slack_q_pu": grid_rec["slack_q"],
                "max_v_error_pu": np.nanmax(np.abs(grid_rec["v_error"]), axis=1),
            }
            pd.DataFrame(frame).to_csv(directory / f"{label}_{key}.csv", index=False,
                                       float_format=FLOAT_FORMAT)


def write_comparison(out_dir: Path, with_rows: list[dict], noess_rows: list[dict] | None,
                     statuses: dict, reactive_stats: dict) -> None:
    rows = []
    for r in with_rows:
        rows.append({"case": "with-ess", **r})
    if noess_rows:
        for r in noess_rows:
            rows.append({"case": "no-ess", **r})
        with_total = next(r["cost_eur"] for r in with_rows if r["section"] == "Total")
        noess_total = next(r["cost_eur"] for r in noess_rows if r["section"] == "Total")
        rows.append({"case": "delta", "section": "Total", "item": "with-ess minus no-ess",
                     "size": "-", "cost_eur": with_total - noess_total,
                     "cost_meur": round((with_total - noess_total) / 1e6, 2)})
    pd.DataFrame(rows).to_csv(out_dir / "comparison.csv", index=False,
                              float_format=FLOAT_FORMAT)
    (out_dir / "comparison_status.json").write_text(
        json.dumps({"statuses": statuses, "reactive_stats": reactive_stats},
                   indent=1, sort_keys=True) + "\n"
    )
