"""Scenario-day assembly: typical days, representative realizations, weights."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError
from .kmeans import choose_k, kmeans_reduce
from .series import NodalSeries

log = logging.getLogger(__name__)

SCHEMA = "bessplan-scenarioset/1"
DAYS_PER_YEAR = 365.0


@dataclass(frozen=True)
class ScenarioDay:
    """One 24-hour stochastic outcome with its annual occurrence weight."""

    label: str
    typical_day: str
    weight: float
    realizations: tuple[NodalSeries, ...]

    def __post_init__(self):
        if self.weight <= 0:
            raise DataError(f"scenario {self.label}: weight must be > 0")
        for s in self.realizations:
            if len(s.p) != 24:
                raise DataError(f"scenario {self.label}: series {s.key} is not 24 hours")


@dataclass(frozen=True)
class ScenarioSet:
    """Forecast per typical day plus weighted realization days."""

    forecast: dict[str, tuple[NodalSeries, ...]]
    days: tuple[ScenarioDay, ...]
    lifetime_years: float
    seed: int = 0

    def __post_init__(self):
        keys = {s.key for day in self.days for s in day.realizations}
        for label, fseries in self.forecast.items():
            fkeys = {s.key for s in fseries}
            if fkeys != keys:
                raise DataError(f"typical day {label}: forecast/realization node sets differ")
        total = sum(d.weight for d in self.days)
        if abs(total - DAYS_PER_YEAR) > 1e-6:
            raise DataError(f"scenario weights sum to {total}, expected {DAYS_PER_YEAR}")

    @property
    def typical_days(self) -> tuple[str, ...]:
        return tuple(self.forecast.keys())

    def days_of(self, typical_day: str) -> tuple[ScenarioDay, ...]:
        return tuple(d for d in self.days if d.typical_day == typical_day)


def build_scenarioset(
    forecasts: list[NodalSeries],
    realizations: list[NodalSeries],
    typical_day_count: int,
    scenarios_per_day: int,
    lifetime_years: float,
    seed: int = 0,
    k_max: int = 8,
) -> ScenarioSet:
    """Reduce aligned multi-day forecast/realization histories to scenario-days.

    Pipeline: (1) partition days into ``typical_day_count`` groups by k-means
    on peak-scaled aggregate PV forecast profiles; (2) inside each group,
    sub-cluster the forecasts with a silhouette-chosen k (capped at ``k_max``)
    and retain the most populated sub-cluster (ties broken towards the lowest
    cluster index); (3) reduce the retained days' realizations to
    ``scenarios_per_day`` medoid days, weighted by cluster population so each
    typical day accounts for 365 / typical_day_count days per year.
    """
    if typical_day_count < 1 or scenarios_per_day < 1:
        raise ValueError("typical_day_count and scenarios_per_day must be >= 1")
    f_map = {s.key: s for s in forecasts}
    r_map = {s.key: s for s in realizations}
    if set(f_map) != set(r_map):
        raise DataError("forecast and realization node sets differ")
    if not f_map:
        raise DataError("no series provided")
    n_days = {s.n_days for s in forecasts} | {s.n_days for s in realizations}
    if len(n_days) != 1:
        raise DataError("series do not share a common day count")
    n_days = n_days.pop()
    if n_days < typical_day_count * scenarios_per_day:
        raise DataError(
            f"{n_days} historical days cannot support "
            f"{typical_day_count} x {scenarios_per_day} scenarios"
        )

    fc_profile = _daily_profiles(forecasts, n_days, kind="pv")
    real_profile = np.hstack(
        [_daily_profiles(realizations, n_days, kind="pv"),
         _daily_profiles(realizations, n_days, kind="demand")]
    )

    groups = kmeans_reduce(list(fc_profile), typical_day_count, seed=seed)
    forecast_by_day: dict[str, tuple[NodalSeries, ...]] = {}
    scenario_days: list[ScenarioDay] = []
    for g in range(typical_day_count):
        members = np.flatnonzero(groups.assignments == g)
        label = f"d{g}"

        retained = _retained_days(fc_profile, members, k_max, seed=seed * 1009 + 17 * g + 1)
        if len(retained) < scenarios_per_day:
            raise DataError(
                f"typical day {label}: retained cluster has {len(retained)} days, "
                f"need at least {scenarios_per_day}"
            )

        reduction = kmeans_reduce(
            list(real_profile[retained]), scenarios_per_day, seed=seed * 2003 + 31 * g + 7
        )
        # forecast of the typical day: member forecast closest to the retained centroid
        centroid = fc_profile[retained].mean(axis=0)
        medoid_fc = retained[int(np.argmin(((fc_profile[retained] - centroid) ** 2).sum(axis=1)))]
        forecast_by_day[label] = tuple(f_map[k].day(int(medoid_fc)) for k in sorted(f_map))

        total_members = sum(reduction.counts)
        for i, (medoid, count) in enumerate(zip(reduction.medoid_indices, reduction.counts)):
            day_idx = int(retained[medoid])
            weight = (DAYS_PER_YEAR / typical_day_count) * count / total_members
            scenario_days.append(
                ScenarioDay(
                    label=f"{label}s{i}",
                    typical_day=label,
                    weight=weight,
                    realizations=tuple(r_map[k].day(day_idx) for k in sorted(r_map)),
                )
            )

    return ScenarioSet(
        forecast=forecast_by_day,
        days=tuple(scenario_days),
        lifetime_years=float(lifetime_years),
        seed=seed,
    )


def _retained_days(profiles: np.ndarray, members: np.ndarray, k_max: int, seed: int) -> np.ndarray:
    """Silhouette-clustered sub-grouping; returns indices of the largest cluster."""
    if len(members) == 0:
        raise DataError("empty typical-day group")
    if len(members) < 4:
        return members
    sub = list(profiles[members])
    k = choose_k(sub, k_max=k_max, seed=seed)
    if k <= 1:
        return members
    result = kmeans_reduce(sub, k, seed=seed)
    counts = np.asarray(result.counts)
    winners = np.flatnonzero(counts == counts.max())
    if len(winners) > 1:
        log.info("typical-day sub-clustering tie between clusters %s; taking the lowest index",
                 winners.tolist())
    winner = int(winners[0])
    return members[np.flatnonzero(result.assignments == winner)]


def _daily_profiles(series: list[NodalSeries], n_days: int, kind: str) -> np.ndarray:
    """Peak-scaled daily profiles of the aggregate of all series of one kind."""
    members = [s for s in series if s.kind == kind]
    if not members:
        members = list(series)
    total = np.sum([s.p for s in members], axis=0).reshape(n_days, 24)
    peaks = np.abs(total).max(axis=1, keepdims=True)
    peaks[peaks == 0.0] = 1.0
    return total / peaks


# -- persistence ---------------------------------------------------------------


def save_scenarioset(sset: ScenarioSet, path: str | Path) -> None:
    payload = {
        "schema": SCHEMA,
        "lifetime_years": sset.lifetime_years,
        "seed": sset.seed,
        "forecast": {
            label: [_series_record(s) for s in series]
            for label, series in sset.forecast.items()
        },
        "days": [
            {
                "label": d.label,
                "typical_day": d.typical_day,
                "weight": d.weight,
                "series": [_series_record(s) for s in d.realizations],
            }
            for d in sset.days
        ],
    }
    Path(path).write_text(json.dumps(payload) + "\n")


def load_scenarioset(path: str | Path) -> ScenarioSet:
    raw = json.loads(Path(path).read_text())
    if raw.get("schema") != SCHEMA:
        raise DataError(f"{path}: unsupported scenario-set schema {raw.get('schema')!r}")
    forecast = {
        label: tuple(_series_from(rec) for rec in series)
        for label, series in raw["forecast"].items()
    }
    days = tuple(
        ScenarioDay(
            label=d["label"],
            typical_day=d["typical_day"],
            weight=float(d["weight"]),
            realizations=tuple(_series_from(rec) for rec in d["series"]),
        )
        for d in raw["days"]
    )
    return ScenarioSet(forecast=forecast, days=days,
                       lifetime_years=float(raw["lifetime_years"]),
                       seed=int(raw.get("seed", 0)))


def _series_record(s: NodalSeries) -> dict:
    return {"node": s.node, "grid": s.grid, "kind": s.kind,
            "p_mw": s.p.tolist(), "q_mvar": s.q.tolist()}


def _series_from(rec: dict) -> NodalSeries:
    return NodalSeries(node=int(rec["node"]), grid=rec["grid"], kind=rec["kind"],
                       p=np.asarray(rec["p_mw"]), q=np.asarray(rec["q_mvar"]))


def nodal_injections(series: tuple[NodalSeries, ...], network, grid: str,
                     hours: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Net per-unit injection arrays (T x n_bus) for one grid's series.

    Demand counts negative (consumption), PV positive; values are divided by
    the network power base.
    """
    p = np.zeros((hours, network.n_bus))
    q = np.zeros((hours, network.n_bus))
    for s in series:
        if s.grid != grid:
            continue
        if len(s.p) != hours:
            raise DataError(f"{s.key}: expected {hours} hours, got {len(s.p)}")
        sign = -1.0 if s.kind in ("demand", "aggregate") else 1.0
        col = network.index_of(s.node)
        p[:, col] += sign * s.p / network.power_base
        q[:, col] += sign * s.q / network.power_base
    return p, q
