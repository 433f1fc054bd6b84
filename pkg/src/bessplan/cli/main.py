"""Command-line entry points."""

from __future__ import annotations

import logging
import shutil
import sys
from pathlib import Path

import click

from ..errors import BessplanError, ConfigError
from . import runner
from .config import load_config


@click.group()
def cli():
    """Battery storage siting and sizing across coupled HV/MV grids."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")


def _common_overrides(seed, solver, out):
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if solver is not None:
        overrides["solver"] = solver
    if out is not None:
        overrides["out"] = out
    return overrides


def _load(config_path, overrides):
    try:
        return load_config(config_path, overrides)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(runner.EXIT_INPUT)


@cli.command()
@click.argument("config_path", type=click.Path())
@click.option("--seed", type=int, default=None, help="override scenario seed")
@click.option("--solver", type=str, default=None, help="override solver adapter")
@click.option("--out", type=click.Path(), default=None, help="override output directory")
def run(config_path, seed, solver, out):
    """Full pipeline: ingest, schedule, optimize, extract, replay, report."""
    config = _load(config_path, _common_overrides(seed, solver, out))
    if config.mode == "replay-only":
        click.echo("error: use the 'replay' command for replay-only configs", err=True)
        sys.exit(runner.EXIT_INPUT)
    sys.exit(runner.run(config))


@cli.command()
@click.argument("config_path", type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--solver", type=str, default=None)
@click.option("--out", type=click.Path(), default=None)
def compare(config_path, seed, solver, out):
    """Full run plus the no-storage comparison at nominal and relaxed bands."""
    overrides = _common_overrides(seed, solver, out)
    overrides["mode"] = "no-ess-comparison"
    config = _load(config_path, overrides)
    sys.exit(runner.run(config))


@cli.command()
@click.argument("config_path", type=click.Path())
@click.option("--artifacts", "artifacts_from", type=click.Path(exists=True), default=None,
              help="artifact directory holding plan.json and scenarioset.json")
@click.option("--out", type=click.Path(), default=None)
def replay(config_path, artifacts_from, out):
    """Re-run the nonlinear AC validation of an existing plan."""
    overrides = _common_overrides(None, None, out)
    overrides["mode"] = "replay-only"
    if artifacts_from is not None:
        overrides["artifacts_from"] = str(Path(artifacts_from).resolve())
    config = _load(config_path, overrides)
    sys.exit(runner.run(config))


@cli.command()
@click.argument("artifact_dir", type=click.Path(exists=True))
def plot(artifact_dir):
    """Render sizing, balance, and envelope plots from run artifacts."""
    from .plots import emit_plots

    try:
        written = emit_plots(artifact_dir)
    except BessplanError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(runner.EXIT_INPUT)
    for path in written:
        click.echo(str(path))


@cli.command("validate-config")
@click.argument("config_path", type=click.Path())
def validate_config(config_path):
    """Check a run configuration without solving anything."""
    config = _load(config_path, {})
    click.echo(f"OK: {config.mode} run, {len(config.mv_refs)} MV grid(s), "
               f"seed {config.seed}, solver {config.solver.name}")
    click.echo(f"config digest {config.digest()[:16]}")


@cli.command()
@click.option("--out", type=click.Path(), default="fixture-workspace",
              help="directory to materialize the shipped fixtures into")
def fixtures(out):
    """Copy the shipped benchmark fixtures and example configs to a workspace."""
    from .. import fixtures as fixture_data

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_dir = fixture_data.data_path("ieee9.json").parent
    for path in sorted(data_dir.iterdir()):
        shutil.copy2(path, out_dir / path.name)
        click.echo(str(out_dir / path.name))


if __name__ == "__main__":
    cli()
