"""Sweep commands - D fraction and samples per RP."""

from pathlib import Path

import click

from stellar_loc.commands.common import (
    experiment_options,
    finish_report,
    handle_result,
    make_config,
)
from stellar_loc.workflows import sweep_d, sweep_samples


@click.command("sweep-d")
@experiment_options
def sweep_d_cmd(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    as_json: bool,
) -> None:
    """Retrain and evaluate for every D in sweeps.d_grid.

    \b
    Examples:
      stellar sweep-d --out results
    """
    cfg = make_config(config_path, seed, out_dir)
    if not as_json:
        grid = ", ".join(f"{d:g}" for d in cfg.sweeps.d_grid)
        click.echo(f"Sweeping D over {grid}")
    report = handle_result(sweep_d(cfg))
    finish_report(report, Path(cfg.output_dir), "sweep-d", as_json)


@click.command("sweep-samples")
@experiment_options
def sweep_samples_cmd(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    as_json: bool,
) -> None:
    """Retrain and evaluate for every training-set size in sweeps.samples_grid.

    \b
    Examples:
      stellar sweep-samples --config experiment.json --out results
    """
    cfg = make_config(config_path, seed, out_dir)
    if not as_json:
        grid = ", ".join(str(n) for n in cfg.sweeps.samples_grid)
        click.echo(f"Sweeping samples per RP over {grid}")
    report = handle_result(sweep_samples(cfg))
    finish_report(report, Path(cfg.output_dir), "sweep-samples", as_json)
