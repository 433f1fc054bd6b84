"""Generate the shipped network fixture files (IEEE 9-bus HV, CIGRE 14-node MV).

HV impedances follow the classic WSCC 9-bus data on a 100 MVA base.  The MV
grid uses the CIGRE medium-voltage benchmark layout in its radial
configuration (tie switches open), both feeders fed from one 110 kV slack
through two 25 MVA transformers.  Demands, power factors and PV capacities
are wired in by the time-series fixtures, not here.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "src" / "bessplan" / "data"

OMEGA = 2 * math.pi * 50.0
S_BASE = 100.0


def hv_ieee9() -> dict:
    buses = []
    for i in range(1, 10):
        buses.append(
            {
                "id": i,
                "kind": "slack" if i == 1 else ("generator" if i in (2, 3) else "pq"),
                "base_kv": 345.0,
                "v_min_pu": 0.95,
                "v_max_pu": 1.05,
            }
        )
    # fbus, tbus, r, x, b, rateA(MVA), transformer
    raw = [
        (1, 4, 0.0, 0.0576, 0.0, 250, True),
        (4, 5, 0.017, 0.092, 0.158, 250, False),
        (5, 6, 0.039, 0.17, 0.358, 150, False),
        (3, 6, 0.0, 0.0586, 0.0, 300, True),
        (6, 7, 0.0119, 0.1008, 0.209, 150, False),
        (7, 8, 0.0085, 0.072, 0.149, 250, False),
        (8, 2, 0.0, 0.0625, 0.0, 250, True),
        (8, 9, 0.032, 0.161, 0.306, 250, False),
        (9, 4, 0.01, 0.085, 0.176, 250, False),
    ]
    lines, transformers = [], []
    for f, t, r, x, b, rate, is_trafo in raw:
        rec = {
            "from": f,
            "to": t,
            "r_pu": r,
            "x_pu": x,
            "b_shunt_pu": b,
            "ampacity_pu": rate / S_BASE,
            "tap_ratio": 1.0,
        }
        (transformers if is_trafo else lines).append(rec)
    generators = [
        {"bus": 1, "s_max_mva": 250.0, "p_min_mw": 0.0, "p_max_mw": 250.0,
         "reserve_cost_eur_per_mwh": 50.0, "q_ratio": 0.8},
        {"bus": 2, "s_max_mva": 300.0, "p_min_mw": 0.0, "p_max_mw": 300.0,
         "reserve_cost_eur_per_mwh": 50.0, "q_ratio": 0.8},
        {"bus": 3, "s_max_mva": 270.0, "p_min_mw": 0.0, "p_max_mw": 270.0,
         "reserve_cost_eur_per_mwh": 50.0, "q_ratio": 0.8},
    ]
    return {
        "schema": "bessplan-network/1",
        "name": "ieee9",
        "power_base_mva": S_BASE,
        "buses": buses,
        "lines": lines,
        "transformers": transformers,
        "generators": generators,
        "injection_nodes": [5, 7],
        "ess_candidates": [2, 3, 4, 5, 6, 7, 8, 9],
    }


def mv_cigre14() -> dict:
    z_base = 20.0**2 / S_BASE  # 4 ohm
    cable = {"r": 0.501 / z_base, "x": 0.716 / z_base, "b": OMEGA * 151.1749e-9 * z_base}
    ohl = {"r": 0.510 / z_base, "x": 0.366 / z_base, "b": OMEGA * 10.09679e-9 * z_base}

    buses = [{"id": 0, "kind": "slack", "base_kv": 110.0, "v_min_pu": 0.84, "v_max_pu": 1.16}]
    for i in range(1, 15):
        buses.append(
            {"id": i, "kind": "pq", "base_kv": 20.0, "v_min_pu": 0.95, "v_max_pu": 1.05}
        )

    # from, to, length_km, type, ampacity_pu (radial layout: tie lines 6-7,
    # 11-4 and 14-8 of the benchmark are open and therefore omitted)
    raw = [
        (1, 2, 2.82, cable, 0.20),
        (2, 3, 4.42, cable, 0.18),
        (3, 4, 0.61, cable, 0.05),
        (4, 5, 0.56, cable, 0.04),
        (5, 6, 1.54, cable, 0.03),
        (7, 8, 1.67, cable, 0.03),
        (8, 9, 0.32, cable, 0.12),
        (9, 10, 0.77, cable, 0.10),
        (10, 11, 0.33, cable, 0.075),
        (3, 8, 1.30, cable, 0.15),
        (12, 13, 4.89, ohl, 0.08),
        (13, 14, 2.99, ohl, 0.06),
    ]
    lines = []
    for f, t, length, kind, amp in raw:
        lines.append(
            {
                "from": f,
                "to": t,
                "r_pu": round(kind["r"] * length, 8),
                "x_pu": round(kind["x"] * length, 8),
                "b_shunt_pu": round(kind["b"] * length, 10),
                "ampacity_pu": amp,
                "tap_ratio": 1.0,
            }
        )
    # 25 MVA 110/20 kV units, vk 12.00107 %, vkr 0.16 % -> pu on 100 MVA
    vk, vkr, s_t = 0.1200107, 0.0016, 25.0
    r_t = vkr * S_BASE / s_t
    x_t = math.sqrt(vk**2 - vkr**2) * S_BASE / s_t
    transformers = [
        {"from": 0, "to": 1, "r_pu": round(r_t, 8), "x_pu": round(x_t, 8),
         "b_shunt_pu": 0.0, "ampacity_pu": 0.30, "tap_ratio": 1.0},
        {"from": 0, "to": 12, "r_pu": round(r_t, 8), "x_pu": round(x_t, 8),
         "b_shunt_pu": 0.0, "ampacity_pu": 0.30, "tap_ratio": 1.0},
    ]
    return {
        "schema": "bessplan-network/1",
        "name": "cigre14",
        "power_base_mva": S_BASE,
        "buses": buses,
        "lines": lines,
        "transformers": transformers,
        "generators": [],
        "injection_nodes": [1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12, 14],
        "ess_candidates": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14],
    }


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    for name, payload in [("ieee9", hv_ieee9()), ("cigre14", mv_cigre14())]:
        path = DATA / f"{name}.json"
        path.write_text(json.dumps(payload, indent=1) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
