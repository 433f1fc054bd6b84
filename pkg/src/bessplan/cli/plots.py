"""Plot-ready tables and rendered figures from a finished artifact directory."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from ..errors import ConfigError
from ..replay import load_report
from ..sizing import SitingPlan

FLOAT_FORMAT = "%.6f"


def emit_plots(artifact_dir: str | Path) -> list[Path]:
    """Write sizing bars, balance stacks, and voltage/current envelopes."""
    artifact_dir = Path(artifact_dir)
    plan_path = artifact_dir / "plan.json"
    if not plan_path.exists():
        raise ConfigError(f"{artifact_dir} has no plan.json; run the pipeline first")
    plan = SitingPlan.from_json(plan_path)
    plots = artifact_dir / "plots"
    plots.mkdir(exist_ok=True)
    written: list[Path] = []

    written += _sizing_bars(plan, plots)
    written += _balance_stacks(plan, plots)

    report_path = artifact_dir / "replay" / "report.json"
    if report_path.exists():
        report = load_report(report_path)
        written += _envelopes(report, plots)
    return written


def _sizing_bars(plan: SitingPlan, plots: Path) -> list[Path]:
    rows = [
        {"grid": grid, "node": node,
         "s_nom_mva": vals["s_nom_mva"], "e_nom_mwh": vals["e_nom_mwh"]}
        for (grid, node), vals in sorted(plan.sizes.items())
        if any(i.grid == grid and i.node == node for i in plan.installations)
    ]
    frame = pd.DataFrame(rows, columns=["grid", "node", "s_nom_mva", "e_nom_mwh"])
    csv_path = plots / "sizing_bars.csv"
    frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)

    fig, ax = plt.subplots(figsize=(8, 4))
    if len(frame):
        labels = [f"{g}:{n}" for g, n in zip(frame.grid, frame.node)]
        x = np.arange(len(frame))
        ax.bar(x - 0.2, frame.s_nom_mva, width=0.4, label="rating [MVA]")
        ax.bar(x + 0.2, frame.e_nom_mwh, width=0.4, label="capacity [MWh]")
        ax.set_xticks(x, labels, rotation=45, ha="right")
        ax.legend()
    ax.set_title("Installed storage per node")
    png_path = plots / "sizing_bars.png"
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def _balance_stacks(plan: SitingPlan, plots: Path) -> list[Path]:
    written = []
    for label in plan.scenario_labels:
        rec = plan.trajectories[label]
        hours = np.arange(rec["hours"])
        slack = np.asarray(rec["linear"]["hv"]["slack_mw"])
        gen_sched = sum(np.asarray(v) for k, v in rec["schedule_gen_mw"].items()
                        if k in rec["gen_up_mw"])  # non-slack units only
        gen_delta = sum(np.asarray(rec["gen_up_mw"][k]) - np.asarray(rec["gen_dn_mw"][k])
                        for k in rec["gen_up_mw"])
        ess = sum(np.asarray(t["p_mw"]) for t in rec["ess"].values()) if rec["ess"] \
            else np.zeros(rec["hours"])
        schedule_total = np.asarray(rec["schedule_slack_mw"]) + gen_sched
        total = slack + gen_sched + gen_delta + ess
        frame = pd.DataFrame({
            "hour": hours,
            "schedule_total_mw": schedule_total,
            "slack_mw": slack,
            "gen_scheduled_mw": gen_sched,
            "gen_delta_mw": gen_delta,
            "ess_mw": ess,
            "total_generation_mw": total,
        })
        csv_path = plots / f"balance_{label}.csv"
        frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)

        fig, ax = plt.subplots(figsize=(8, 4))
        ax.stackplot(hours, slack, gen_sched, gen_delta, ess,
                     labels=["slack", "scheduled units", "reserve", "storage"])
        ax.plot(hours, schedule_total, "r--", label="schedule")
        ax.plot(hours, total, "g--", label="total generation")
        ax.set_title(f"Balance decomposition {label}")
        ax.set_xlabel("hour")
        ax.set_ylabel("MW")
        ax.legend(loc="lower right", fontsize=7)
        png_path = plots / f"balance_{label}.png"
        fig.tight_layout()
        fig.savefig(png_path, dpi=120)
        plt.close(fig)
        written += [csv_path, png_path]
    return written


def _envelopes(report, plots: Path) -> list[Path]:
    written = []
    for label, rec in report.scenarios.items():
        rows = {"hour": None}
        fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
        for key, grid_rec in rec["grids"].items():
            v = grid_rec["v"]
            i = grid_rec["i"]
            hours = np.arange(v.shape[0])
            rows["hour"] = hours
            rows[f"{key}_v_min_pu"] = np.nanmin(v, axis=1)
            rows[f"{key}_v_max_pu"] = np.nanmax(v, axis=1)
            rows[f"{key}_i_max_pu"] = np.nanmax(i, axis=1) if i.shape[1] else np.zeros(len(hours))
            axes[0].plot(hours, rows[f"{key}_v_min_pu"], label=f"{key} min")
            axes[0].plot(hours, rows[f"{key}_v_max_pu"], label=f"{key} max")
            axes[1].plot(hours, rows[f"{key}_i_max_pu"], label=f"{key} max current")
        axes[0].axhline(1.05, color="k", ls=":", lw=0.8)
        axes[0].axhline(0.95, color="k", ls=":", lw=0.8)
        axes[0].set_ylabel("voltage [pu]")
        axes[0].legend(fontsize=7)
        axes[1].set_ylabel("current [pu]")
        axes[1].set_xlabel("hour")
        axes[1].legend(fontsize=7)
        fig.suptitle(f"AC envelopes {label}")
        csv_path = plots / f"envelope_{label}.csv"
        pd.DataFrame(rows).to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)
        png_path = plots / f"envelope_{label}.png"
        fig.tight_layout()
        fig.savefig(png_path, dpi=120)
        plt.close(fig)
        written += [csv_path, png_path]
    return written
