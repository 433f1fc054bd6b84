from __future__ import annotations

import json
import shutil
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from bessplan import fixtures
from bessplan.cli.config import load_config
from bessplan.cli.main import cli
from bessplan.errors import ConfigError
from bessplan.netmodel.netfile import save_network
from bessplan.scenarios.series import NodalSeries, save_series

DATA = Path(fixtures.data_path("ieee9.json")).parent


def small_workspace(tmp_path: Path, days: int = 8, seed: int = 3) -> Path:
    """Config + inputs for a fast HV-only run on the tiny grid."""
    ws = tmp_path / "ws"
    ws.mkdir()
    save_network(fixtures.tiny3_network(), ws / "tiny3.json")

    rng = np.random.default_rng(seed)
    hours = np.arange(24)
    shape = 0.6 + 0.4 * np.exp(-0.5 * ((hours - 19) / 3.0) ** 2)
    fc, re = [], []
    for _ in range(days):
        level = rng.normal(1.0, 0.03)
        fc.append(20.0 * shape * level)
        re.append(20.0 * shape * level * (1 + rng.normal(0.0, 0.04, 24)))
    fc = np.concatenate(fc)
    re = np.concatenate(re)
    pf = {("hv", 3, "demand"): 0.9}
    save_series([NodalSeries(3, "hv", "demand", fc, fc * 0.484)],
                ws / "forecasts.csv", ws / "forecasts.yaml", power_factors=pf)
    save_series([NodalSeries(3, "hv", "demand", re, re * 0.484)],
                ws / "realizations.csv", ws / "realizations.yaml", power_factors=pf)

    config = {
        "schema": "bessplan-run/1",
        "mode": "full",
        "networks": {"hv": "tiny3.json"},
        "series": {
            "realizations": "realizations.csv",
            "realizations_manifest": "realizations.yaml",
            "forecasts": "forecasts.csv",
            "forecasts_manifest": "forecasts.yaml",
        },
        "scenarios": {"typical_days": 1, "scenarios_per_day": 2, "seed": 5,
                      "lifetime_years": 20},
        "costs": {"converter_eur_per_kva": 80.0, "energy_eur_per_kwh": 280.0},
        "ess": {"loss_mode": "thevenin", "thevenin_resistance_pu": 0.0},
        "limits": {"voltage_band": [0.9, 1.1], "substation_pf_min": None},
        "solver": {"name": "clarabel"},
        "output_dir": "runs/out",
    }
    (ws / "run.yaml").write_text(yaml.safe_dump(config))
    return ws


def test_validate_config_ok(tmp_path):
    ws = small_workspace(tmp_path)
    result = CliRunner().invoke(cli, ["validate-config", str(ws / "run.yaml")])
    assert result.exit_code == 0, result.output
    assert "OK" in result.output


def test_validate_config_rejects_reversed_band(tmp_path):
    ws = small_workspace(tmp_path)
    raw = yaml.safe_load((ws / "run.yaml").read_text())
    raw["limits"]["voltage_band"] = [1.05, 0.95]
    (ws / "run.yaml").write_text(yaml.safe_dump(raw))
    result = CliRunner().invoke(cli, ["validate-config", str(ws / "run.yaml")])
    assert result.exit_code == 5
    assert "voltage band" in result.output


def test_missing_input_file_rejected(tmp_path):
    ws = small_workspace(tmp_path)
    (ws / "forecasts.csv").unlink()
    with pytest.raises(ConfigError):
        load_config(ws / "run.yaml")


def test_full_run_produces_artifacts(tmp_path):
    ws = small_workspace(tmp_path)
    out = ws / "runs" / "out"
    result = CliRunner().invoke(cli, ["run", str(ws / "run.yaml")])
    assert result.exit_code == 0, result.output
    for name in ("manifest.json", "plan.json", "plan_table.csv", "costs.csv",
                 "sizing.csv", "scenarioset.json", "run.log"):
        assert (out / name).exists(), name
    assert (out / "replay" / "report.json").exists()
    assert (out / "trajectories").is_dir()
    assert not (out / ".lock").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_sha256"]
    assert all(len(h) == 64 for h in manifest["inputs"].values())
    # every input file is hashed in the manifest
    config = load_config(ws / "run.yaml")
    assert {str(p) for p in config.input_files()} == set(manifest["inputs"])


def test_reproducible_outputs(tmp_path):
    ws = small_workspace(tmp_path)
    runner = CliRunner()
    r1 = runner.invoke(cli, ["run", str(ws / "run.yaml"), "--out", str(ws / "a")])
    r2 = runner.invoke(cli, ["run", str(ws / "run.yaml"), "--out", str(ws / "b")])
    assert r1.exit_code == 0 and r2.exit_code == 0
    for name in ("plan_table.csv", "costs.csv", "sizing.csv"):
        assert (ws / "a" / name).read_bytes() == (ws / "b" / name).read_bytes(), name
    ma = json.loads((ws / "a" / "manifest.json").read_text())
    mb = json.loads((ws / "b" / "manifest.json").read_text())
    assert ma == mb


def test_lock_file_blocks_concurrent_runs(tmp_path):
    ws = small_workspace(tmp_path)
    out = ws / "runs" / "out"
    out.mkdir(parents=True)
    (out / ".lock").touch()
    result = CliRunner().invoke(cli, ["run", str(ws / "run.yaml")])
    assert result.exit_code == 5


def test_replay_verb(tmp_path):
    ws = small_workspace(tmp_path)
    runner = CliRunner()
    assert runner.invoke(cli, ["run", str(ws / "run.yaml")]).exit_code == 0
    result = runner.invoke(cli, [
        "replay", str(ws / "run.yaml"),
        "--artifacts", str(ws / "runs" / "out"),
        "--out", str(ws / "replayed"),
    ])
    assert result.exit_code == 0, result.output
    assert (ws / "replayed" / "replay" / "report.json").exists()


def test_plot_verb(tmp_path):
    ws = small_workspace(tmp_path)
    runner = CliRunner()
    assert runner.invoke(cli, ["run", str(ws / "run.yaml")]).exit_code == 0
    out = ws / "runs" / "out"
    result = runner.invoke(cli, ["plot", str(out)])
    assert result.exit_code == 0, result.output
    plots = out / "plots"
    assert (plots / "sizing_bars.csv").exists()
    assert (plots / "sizing_bars.png").exists()
    balance_files = sorted(plots.glob("balance_*.csv"))
    assert balance_files
    frame = pd.read_csv(balance_files[0])
    total = (frame.slack_mw + frame.gen_scheduled_mw + frame.gen_delta_mw + frame.ess_mw)
    np.testing.assert_allclose(total, frame.total_generation_mw, atol=1e-6)
    envelope_files = sorted(plots.glob("envelope_*.csv"))
    assert envelope_files
    env = pd.read_csv(envelope_files[0])
    assert len(env) == 24  # spans the replay horizon


def test_compare_verb(tmp_path):
    ws = small_workspace(tmp_path)
    result = CliRunner().invoke(cli, ["compare", str(ws / "run.yaml"),
                                      "--out", str(ws / "cmp")])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(ws / "cmp" / "comparison.csv")
    assert set(frame["case"]) == {"with-ess", "no-ess", "delta"}
    delta = frame[frame["case"] == "delta"].iloc[0]
    with_total = frame[(frame["case"] == "with-ess")
                       & (frame["section"] == "Total")].iloc[0]["cost_eur"]
    no_total = frame[(frame["case"] == "no-ess")
                     & (frame["section"] == "Total")].iloc[0]["cost_eur"]
    assert abs(delta["cost_eur"] - (with_total - no_total)) < 1e-6
    assert (ws / "cmp" / "comparison_status.json").exists()


def test_plots_with_empty_plan(tmp_path):
    from bessplan.cli.plots import emit_plots
    from bessplan.pipeline import prepare_case
    from bessplan.sizing import (EssCostModel, OperatingLimits, build_problem,
                                 extract_plan, solve)

    tiny = fixtures.tiny3_network()
    scen = fixtures.tiny3_scenarios(deviations_mw=(0.0, 0.0))
    limits = OperatingLimits(substation_pf_min=None)
    case = prepare_case(tiny, [], [], scen, limits=limits)
    problem = build_problem(tiny, [], [], case.models, scen, case.schedule,
                            gens=case.gens,
                            ess_costs=EssCostModel(loss_mode="thevenin",
                                                   thevenin_resistance=0.0),
                            limits=limits)
    plan = extract_plan(problem, solve(problem))
    assert plan.installations == []
    out = tmp_path / "artifacts"
    out.mkdir()
    plan.to_json(out / "plan.json")
    written = emit_plots(out)
    sizing_csv = out / "plots" / "sizing_bars.csv"
    assert sizing_csv in written
    frame = pd.read_csv(sizing_csv)
    assert len(frame) == 0
    assert list(frame.columns) == ["grid", "node", "s_nom_mva", "e_nom_mwh"]


def test_fixtures_verb(tmp_path):
    result = CliRunner().invoke(cli, ["fixtures", "--out", str(tmp_path / "fx")])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "fx" / "ieee9.json").exists()
    assert (tmp_path / "fx" / "fixture_acceptance.yaml").exists()
    # the materialized workspace validates as-is
    check = CliRunner().invoke(
        cli, ["validate-config", str(tmp_path / "fx" / "fixture_acceptance.yaml")])
    assert check.exit_code == 0, check.output
