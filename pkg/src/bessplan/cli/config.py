"""Declarative run configuration (versioned YAML schema)."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigError
from ..specs import CouplingSpec, EssCostModel, OperatingLimits
from ..sizing.solvers import ADAPTERS, SolverOptions

SCHEMA = "bessplan-run/1"
MODES = ("full", "no-ess-comparison", "replay-only")


@dataclass
class MvRef:
    file: Path
    hv_bus: int
    oltc_band: float = 1.1


@dataclass
class RunConfig:
    path: Path
    mode: str
    hv_file: Path
    mv_refs: list[MvRef]
    realizations: Path
    realizations_manifest: Path
    forecasts: Path | None
    forecasts_manifest: Path | None
    typical_days: int
    scenarios_per_day: int
    seed: int
    k_max: int
    lifetime_years: float
    ess_costs: EssCostModel
    limits: OperatingLimits
    relaxed_voltage_band: tuple[float, float]
    reserve_cost_override: float | None
    candidates: dict | str
    threshold_mva: float
    solver: SolverOptions
    replay_voltage_slack: float
    replay_ampacity_slack: float
    replay_balance_bound: float
    output_dir: Path
    artifacts_from: Path | None
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def couplings(self) -> list[CouplingSpec]:
        return [CouplingSpec(hv_bus=m.hv_bus, mv_network=m.file.stem, oltc_band_c=m.oltc_band)
                for m in self.mv_refs]

    def digest(self) -> str:
        return hashlib.sha256(
            yaml.safe_dump(self.raw, sort_keys=True).encode()
        ).hexdigest()

    def input_files(self) -> list[Path]:
        files = [self.hv_file, self.realizations, self.realizations_manifest]
        files += [m.file for m in self.mv_refs]
        if self.forecasts:
            files += [self.forecasts, self.forecasts_manifest]
        return files


def load_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a run configuration; flag-style overrides win."""
    path = Path(path).resolve()
    try:
        raw = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist")
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}")
    if not isinstance(raw, dict) or raw.get("schema") != SCHEMA:
        raise ConfigError(f"{path}: expected schema {SCHEMA!r}, got {raw.get('schema')!r}")
    overrides = overrides or {}

    base = path.parent

    def resolve(rel) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else (base / p).resolve()

    def section(name, default=None):
        value = raw.get(name, default if default is not None else {})
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: section {name!r} must be a mapping")
        return value

    mode = overrides.get("mode", raw.get("mode", "full"))
    if mode not in MODES:
        raise ConfigError(f"{path}: mode must be one of {MODES}, got {mode!r}")

    networks = section("networks")
    if "hv" not in networks:
        raise ConfigError(f"{path}: networks.hv is required")
    hv_file = resolve(networks["hv"])
    mv_refs = []
    for rec in networks.get("mv", []):
        try:
            mv_refs.append(MvRef(file=resolve(rec["file"]), hv_bus=int(rec["hv_bus"]),
                                 oltc_band=float(rec.get("oltc_band", 1.1))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: malformed networks.mv entry: {exc}")
    for ref in mv_refs:
        if ref.oltc_band <= 1.0:
            raise ConfigError(f"{path}: oltc_band must be > 1, got {ref.oltc_band}")

    series = section("series")
    if "realizations" not in series or "realizations_manifest" not in series:
        raise ConfigError(f"{path}: series.realizations and its manifest are required")
    forecasts = series.get("forecasts")
    forecasts_manifest = series.get("forecasts_manifest")
    if (forecasts is None) != (forecasts_manifest is None):
        raise ConfigError(f"{path}: forecasts and forecasts_manifest go together")

    scen = section("scenarios")
    costs = section("costs")
    ess = section("ess")
    limits_raw = section("limits")
    solver_raw = section("solver")
    replay_raw = section("replay")

    band = tuple(limits_raw.get("voltage_band", (0.95, 1.05)))
    relaxed = tuple(limits_raw.get("relaxed_voltage_band", (0.93, 1.07)))
    for b in (band, relaxed):
        if len(b) != 2 or not (0.0 < b[0] < 1.0 < b[1] < 2.0):
            raise ConfigError(f"{path}: voltage band {b} must satisfy 0 < lo < 1 < hi < 2")

    try:
        ess_costs = EssCostModel(
            c_power=float(costs.get("converter_eur_per_kva", 80.0)) * 1e3,
            c_energy=float(costs.get("energy_eur_per_kwh", 280.0)) * 1e3,
            loss_mode=ess.get("loss_mode", "thevenin"),
            thevenin_resistance=float(ess.get("thevenin_resistance_pu", 0.01)),
            efficiency=float(ess.get("efficiency", 0.95)),
            loss_energy_cost=float(costs.get("loss_energy_eur_per_mwh", 50.0)),
        )
        limits = OperatingLimits(
            voltage_band=band,
            substation_pf_min=limits_raw.get("substation_pf_min", 0.8),
            ampacity_scale=float(limits_raw.get("ampacity_scale", 1.0)),
            voltage_margin=float(limits_raw.get("voltage_margin", 0.0)),
        )
        solver_name = overrides.get("solver", solver_raw.get("name", "clarabel"))
        if solver_name not in ADAPTERS:
            raise ConfigError(
                f"{path}: unknown solver {solver_name!r}; registered: {sorted(ADAPTERS)}"
            )
        solver = SolverOptions(
            name=solver_name,
            tol_feas=float(solver_raw.get("tol_feas", 5e-8)),
            tol_gap_abs=float(solver_raw.get("tol_gap_abs", 5e-8)),
            tol_gap_rel=float(solver_raw.get("tol_gap_rel", 5e-8)),
            max_iter=int(solver_raw.get("max_iter", 100)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}")

    output_dir = Path(overrides.get("out", raw.get("output_dir", "runs/out")))
    if not output_dir.is_absolute():
        output_dir = (base / output_dir).resolve()
    artifacts_from = overrides.get("artifacts_from", raw.get("artifacts_from"))

    config = RunConfig(
        path=path,
        mode=mode,
        hv_file=hv_file,
        mv_refs=mv_refs,
        realizations=resolve(series["realizations"]),
        realizations_manifest=resolve(series["realizations_manifest"]),
        forecasts=resolve(forecasts) if forecasts else None,
        forecasts_manifest=resolve(forecasts_manifest) if forecasts_manifest else None,
        typical_days=int(overrides.get("typical_days", scen.get("typical_days", 4))),
        scenarios_per_day=int(scen.get("scenarios_per_day", 5)),
        seed=int(overrides.get("seed", scen.get("seed", 0))),
        k_max=int(scen.get("k_max", 8)),
        lifetime_years=float(scen.get("lifetime_years", 20.0)),
        ess_costs=ess_costs,
        limits=limits,
        relaxed_voltage_band=relaxed,
        reserve_cost_override=(
            float(costs["reserve_eur_per_mwh"]) if "reserve_eur_per_mwh" in costs else None
        ),
        candidates=ess.get("candidates", "all"),
        threshold_mva=float(ess.get("threshold_mva", 0.01)),
        solver=solver,
        replay_voltage_slack=float(replay_raw.get("voltage_slack", 0.005)),
        replay_ampacity_slack=float(replay_raw.get("ampacity_slack", 0.02)),
        replay_balance_bound=float(replay_raw.get("balance_bound", 0.01)),
        output_dir=output_dir,
        artifacts_from=resolve(artifacts_from) if artifacts_from else None,
        raw=raw,
    )
    _check_files(config)
    return config


def _check_files(config: RunConfig):
    for file in config.input_files():
        if not file.exists():
            raise ConfigError(f"referenced input file does not exist: {file}")
    if config.mode == "replay-only" and config.artifacts_from is None:
        raise ConfigError("mode replay-only requires artifacts_from")
    if config.typical_days < 1 or config.scenarios_per_day < 1:
        raise ConfigError("typical_days and scenarios_per_day must be >= 1")
