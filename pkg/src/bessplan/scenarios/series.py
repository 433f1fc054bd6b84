"""Hourly nodal time series and their delimited-file ingestion.

Series files are plain CSV with one timestamp column plus one column per
node quantity; units and column meaning are declared in a YAML manifest:

    schema: bessplan-series/1
    file: realizations.csv
    columns:
      mv1_demand: {grid: mv, node: 1, kind: demand, unit: MW, power_factor: 0.9}
      mv11_pv:    {grid: mv, node: 11, kind: pv, unit: MW}

Reactive power is taken from an explicit ``quantity: q`` column when declared,
otherwise derived from the declared power factor; PV plants run at unity
power factor and always carry zero reactive power.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from ..errors import DataError

SCHEMA = "bessplan-series/1"
KINDS = ("demand", "pv", "aggregate")


@dataclass(frozen=True)
class NodalSeries:
    """Hourly P/Q series of one quantity at one node (MW / Mvar, consumption-positive
    for demand, production-positive for pv)."""

    node: int
    grid: str
    kind: str
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"{self.key}: unknown kind {self.kind!r}")
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if p.ndim != 1 or p.shape != q.shape:
            raise DataError(f"{self.key}: P and Q must be equal-length vectors")
        if len(p) == 0 or len(p) % 24 != 0:
            raise DataError(f"{self.key}: length {len(p)} is not a positive multiple of 24")
        if np.isnan(p).any() or np.isnan(q).any():
            raise DataError(f"{self.key}: NaN values")
        if self.kind == "pv" and np.any(q != 0.0):
            raise DataError(f"{self.key}: PV series must have zero reactive power")

    @property
    def key(self) -> str:
        return f"{self.grid}:{self.node}:{self.kind}"

    @property
    def n_days(self) -> int:
        return len(self.p) // 24

    def day(self, d: int) -> "NodalSeries":
        sl = slice(24 * d, 24 * (d + 1))
        return NodalSeries(self.node, self.grid, self.kind, self.p[sl], self.q[sl])


def load_series(path: str | Path, schema: dict | str | Path) -> list[NodalSeries]:
    """Read a delimited series file under its manifest; returns one NodalSeries
    per declared (grid, node, kind)."""
    if not isinstance(schema, dict):
        schema_path = Path(schema)
        try:
            schema = yaml.safe_load(schema_path.read_text())
        except FileNotFoundError as exc:
            raise DataError(f"missing series manifest {schema_path}") from exc
    if schema.get("schema") != SCHEMA:
        raise DataError(f"unsupported series schema {schema.get('schema')!r}")
    columns = schema.get("columns")
    if not columns:
        raise DataError("series manifest declares no columns")

    path = Path(path)
    try:
        table = pd.read_csv(path)
    except FileNotFoundError as exc:
        raise DataError(f"missing series file {path}") from exc
    if "timestamp" not in table.columns:
        raise DataError(f"{path}: missing 'timestamp' column")
    stamps = pd.to_datetime(table["timestamp"])
    if len(stamps) == 0 or len(stamps) % 24 != 0:
        raise DataError(f"{path}: {len(stamps)} rows is not a positive multiple of 24")
    deltas = stamps.diff().dropna()
    if len(deltas) and not (deltas == pd.Timedelta(hours=1)).all():
        raise DataError(f"{path}: timestamps are not strictly hourly")

    p_cols: dict[tuple, tuple[str, dict]] = {}
    q_cols: dict[tuple, str] = {}
    for name, spec in columns.items():
        if name not in table.columns:
            raise DataError(f"{path}: declared column {name!r} not present")
        key = (str(spec["grid"]), int(spec["node"]), str(spec["kind"]))
        if spec.get("quantity", "p") == "q":
            q_cols[key] = name
        else:
            p_cols[key] = (name, spec)

    series = []
    for key, (name, spec) in sorted(p_cols.items()):
        grid, node, kind = key
        p = table[name].to_numpy(dtype=float)
        if np.isnan(p).any():
            raise DataError(f"{path}: column {name!r} contains NaN")
        if kind == "pv":
            q = np.zeros_like(p)
        elif key in q_cols:
            q = table[q_cols[key]].to_numpy(dtype=float)
        elif "power_factor" in spec:
            pf = float(spec["power_factor"])
            if not 0.0 < pf <= 1.0:
                raise DataError(f"{path}: column {name!r} power_factor {pf} outside (0, 1]")
            q = p * np.tan(np.arccos(pf))
        else:
            q = np.zeros_like(p)
        series.append(NodalSeries(node=node, grid=grid, kind=kind, p=p, q=q))
    return series


def save_series(series: list[NodalSeries], csv_path: Path, manifest_path: Path,
                start: str = "2018-01-01", power_factors: dict | None = None) -> None:
    """Write series + manifest; inverse of load_series for fixture generation."""
    n = len(series[0].p)
    stamps = pd.date_range(start=start, periods=n, freq="h")
    frame = {"timestamp": stamps}
    columns = {}
    power_factors = power_factors or {}
    for s in series:
        name = f"{s.grid}{s.node}_{s.kind}"
        frame[name] = s.p
        spec = {"grid": s.grid, "node": s.node, "kind": s.kind, "unit": "MW"}
        pf = power_factors.get((s.grid, s.node, s.kind))
        if pf is not None:
            spec["power_factor"] = pf
        elif s.kind != "pv" and np.any(s.q != 0.0):
            qname = f"{s.grid}{s.node}_{s.kind}_q"
            frame[qname] = s.q
            columns[qname] = {"grid": s.grid, "node": s.node, "kind": s.kind,
                              "quantity": "q", "unit": "Mvar"}
        columns[name] = spec
    pd.DataFrame(frame).to_csv(csv_path, index=False, float_format="%.6f")
    manifest = {"schema": SCHEMA, "file": csv_path.name, "columns": columns}
    manifest_path.write_text(yaml.safe_dump(manifest, sort_keys=True))
