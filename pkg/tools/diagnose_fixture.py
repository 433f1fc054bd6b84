"""Diagnostics for the shipped fixture: voltage spреads, flows, feasibility sketch."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bessplan import fixtures
from bessplan.netmodel import solve_loadflow
from bessplan.scenarios import build_scenarioset, load_series
from bessplan.scenarios.scenarioset import nodal_injections

DATA = Path(__file__).resolve().parent.parent / "src" / "bessplan" / "data"


def main():
    hv = fixtures.load_fixture_network("ieee9")
    mv = fixtures.load_fixture_network("cigre14")
    forecasts = load_series(DATA / "forecasts.csv", DATA / "forecasts.yaml")
    realizations = load_series(DATA / "realizations.csv", DATA / "realizations.yaml")
    sset = build_scenarioset(forecasts, realizations, typical_day_count=2,
                             scenarios_per_day=2, lifetime_years=20, seed=7)
    print("scenario days:", [(d.label, round(d.weight, 1)) for d in sset.days])

    for day in sset.days:
        p, q = nodal_injections(day.realizations, mv, "cigre14")
        worst = {"spread": 0.0, "hour": -1}
        px_min, pf_min = np.inf, np.inf
        amp_worst = 0.0
        for t in range(24):
            op = solve_loadflow(mv, p[t], q[t], slack_voltage=1.0)
            v = op.v_mag.copy()
            v[mv.slack_index] = np.nan
            spread = np.nanmax(v) - np.nanmin(v)
            if spread > worst["spread"]:
                worst = {"spread": spread, "hour": t,
                         "vmax_bus": int(np.nanargmax(v)), "vmin_bus": int(np.nanargmin(v))}
            px = op.p[mv.slack_index]
            qx = op.q[mv.slack_index]
            px_min = min(px_min, px)
            s = np.hypot(px, qx)
            if s > 1e-6:
                pf_min = min(pf_min, abs(px) / s)
            amp_worst = max(amp_worst, float(np.max(op.i_mag / np.array(
                [br.ampacity for br in mv.branches]))))
        print(f"{day.label}: max MV spread {worst['spread']*100:.2f}% @h{worst['hour']} "
              f"(hi bus {worst.get('vmax_bus')}, lo bus {worst.get('vmin_bus')}), "
              f"min Px {px_min*100:.2f} MW, min pf {pf_min:.3f}, "
              f"worst ampacity use {amp_worst*100:.1f}%")

    # deviation energy per scenario (drives the reserve pool)
    for day in sset.days:
        td = day.typical_day
        dev = 0.0
        for s_re in day.realizations:
            fc = next(f for f in sset.forecast[td]
                      if (f.grid, f.node, f.kind) == (s_re.grid, s_re.node, s_re.kind))
            dev += np.abs(s_re.p - fc.p).sum()
        print(f"{day.label}: sum |realization - forecast| = {dev:.1f} MWh/day, "
              f"weight {day.weight:.1f}")


if __name__ == "__main__":
    main()
