"""Versioned JSON network files.

Field names carry their units explicitly (``_pu``, ``_kv``, ``_mva``, ...).
Lines and transformers live in separate sections; both map onto Branch.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import DataError
from ..specs import GeneratorSpec
from .network import Branch, Bus, Network

SCHEMA = "bessplan-network/1"


def load_network(path: str | Path) -> Network:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if raw.get("schema") != SCHEMA:
        raise DataError(f"{path}: unsupported schema {raw.get('schema')!r}, expected {SCHEMA}")
    try:
        buses = [
            Bus(
                id=int(b["id"]),
                kind=b.get("kind", "pq"),
                base_kv=float(b["base_kv"]),
                v_min=float(b.get("v_min_pu", 0.95)),
                v_max=float(b.get("v_max_pu", 1.05)),
            )
            for b in raw["buses"]
        ]
        branches = [_branch(rec, transformer=False) for rec in raw.get("lines", [])]
        branches += [_branch(rec, transformer=True) for rec in raw.get("transformers", [])]
        generators = [
            GeneratorSpec(
                bus=int(g["bus"]),
                s_max_mva=float(g["s_max_mva"]),
                p_min_mw=float(g.get("p_min_mw", 0.0)),
                p_max_mw=float(g["p_max_mw"]) if "p_max_mw" in g else None,
                reserve_cost=float(g.get("reserve_cost_eur_per_mwh", 50.0)),
                q_ratio=float(g.get("q_ratio", 0.8)),
            )
            for g in raw.get("generators", [])
        ]
        network = Network(
            name=raw.get("name", path.stem),
            buses=buses,
            branches=branches,
            generators=generators,
            injection_nodes=[int(n) for n in raw.get("injection_nodes", [])],
            ess_candidates=raw.get("ess_candidates", "all_non_slack"),
            power_base=float(raw.get("power_base_mva", 100.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed network record: {exc}") from exc
    return network


def _branch(rec: dict, transformer: bool) -> Branch:
    return Branch(
        from_bus=int(rec["from"]),
        to_bus=int(rec["to"]),
        resistance=float(rec["r_pu"]),
        reactance=float(rec["x_pu"]),
        shunt_susceptance=float(rec.get("b_shunt_pu", 0.0)),
        shunt_conductance=float(rec.get("g_shunt_pu", 0.0)),
        ampacity=float(rec["ampacity_pu"]),
        tap_ratio=float(rec.get("tap_ratio", 1.0)),
        transformer=transformer,
    )


def save_network(network: Network, path: str | Path) -> None:
    record = {
        "schema": SCHEMA,
        "name": network.name,
        "power_base_mva": network.power_base,
        "buses": [
            {
                "id": b.id,
                "kind": b.kind,
                "base_kv": b.base_kv,
                "v_min_pu": b.v_min,
                "v_max_pu": b.v_max,
            }
            for b in network.buses
        ],
        "lines": [_branch_record(br) for br in network.branches if not br.transformer],
        "transformers": [_branch_record(br) for br in network.branches if br.transformer],
        "generators": [
            {
                "bus": g.bus,
                "s_max_mva": g.s_max_mva,
                "p_min_mw": g.p_min_mw,
                "p_max_mw": g.p_max_mw,
                "reserve_cost_eur_per_mwh": g.reserve_cost,
                "q_ratio": g.q_ratio,
            }
            for g in network.generators
        ],
        "injection_nodes": list(network.injection_nodes),
        "ess_candidates": list(network.ess_candidates),
    }
    Path(path).write_text(json.dumps(record, indent=2) + "\n")


def _branch_record(br: Branch) -> dict:
    return {
        "from": br.from_bus,
        "to": br.to_bus,
        "r_pu": br.resistance,
        "x_pu": br.reactance,
        "b_shunt_pu": br.shunt_susceptance,
        "g_shunt_pu": br.shunt_conductance,
        "ampacity_pu": br.ampacity,
        "tap_ratio": br.tap_ratio,
    }
