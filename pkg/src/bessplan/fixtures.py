"""Accessors for the shipped benchmark fixtures and small built-in test grids."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .netmodel import Branch, Bus, Network
from .netmodel.netfile import load_network
from .specs import GeneratorSpec


def data_path(name: str) -> Path:
    """Filesystem path of a shipped data file (networks, series, configs)."""
    path = Path(str(resources.files("bessplan").joinpath("data", name)))
    if not path.exists():
        raise FileNotFoundError(f"no shipped fixture named {name!r}")
    return path


def load_fixture_network(name: str) -> Network:
    """Load one of the shipped networks ("ieee9", "cigre14")."""
    return load_network(data_path(f"{name}.json"))


def tiny3_network() -> Network:
    """Lossless 3-bus grid: slack, one 60 MVA generator, one load/ESS node.

    Reactance-only lines make the slack active power an exact sum of the
    nodal injections, which keeps hand calculations and enumeration oracles
    trivial.
    """
    buses = [
        Bus(id=1, kind="slack", base_kv=110.0, v_min=0.95, v_max=1.05),
        Bus(id=2, kind="generator", base_kv=110.0, v_min=0.85, v_max=1.15),
        Bus(id=3, kind="pq", base_kv=110.0, v_min=0.85, v_max=1.15),
    ]
    branches = [
        Branch(from_bus=1, to_bus=2, resistance=0.0, reactance=0.08, ampacity=2.0),
        Branch(from_bus=2, to_bus=3, resistance=0.0, reactance=0.12, ampacity=2.0),
        Branch(from_bus=1, to_bus=3, resistance=0.0, reactance=0.10, ampacity=2.0),
    ]
    generators = [GeneratorSpec(bus=2, s_max_mva=60.0, p_min_mw=0.0, p_max_mw=60.0,
                                reserve_cost=50.0, q_ratio=0.8)]
    return Network(
        name="tiny3",
        buses=buses,
        branches=branches,
        generators=generators,
        injection_nodes=[3],
        ess_candidates=[3],
        power_base=100.0,
    )


@dataclass
class TinyScenarios:
    """Duck-typed stand-in for ScenarioSet with an arbitrary (short) horizon."""

    forecast: dict
    days: tuple
    lifetime_years: float

    @property
    def typical_days(self):
        return tuple(self.forecast.keys())


def tiny3_scenarios(
    load_forecast_mw=(20.0, 25.0),
    deviations_mw=(6.0, -3.0),
    weight: float = 365.0,
    lifetime_years: float = 20.0,
) -> TinyScenarios:
    """One 2-hour scenario-day on the tiny grid: load at bus 3, Q = 0.3 P."""
    fc_p = np.asarray(load_forecast_mw, dtype=float)
    re_p = fc_p + np.asarray(deviations_mw, dtype=float)

    def series(p):
        return (SimpleNamespace(node=3, grid="hv", kind="demand",
                                p=np.asarray(p, dtype=float), q=0.3 * np.asarray(p)),)

    day = SimpleNamespace(label="d0s0", typical_day="d0", weight=weight,
                          realizations=series(re_p))
    return TinyScenarios(forecast={"d0": series(fc_p)}, days=(day,),
                         lifetime_years=lifetime_years)
