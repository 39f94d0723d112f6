"""Experiment commands - evaluate, compare and matrix."""

from pathlib import Path

import click

from stellar_loc.commands.common import (
    experiment_options,
    finish_report,
    handle_result,
    make_config,
)
from stellar_loc.workflows import compare_baselines, cross_device_matrix, load_models, run_pipeline


@click.command()
@experiment_options
@click.option(
    "--models",
    "model_dir",
    type=click.Path(file_okay=False, exists=True, path_type=Path),
    default=None,
    help="Directory with siamese.json and gbt.json from 'stellar train' (skips training)",
)
def evaluate(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    as_json: bool,
    model_dir: Path | None,
) -> None:
    """Train once, then score every (test device, CI) cell without recalibration.

    \b
    Examples:
      stellar evaluate --config experiment.json --out results
      stellar evaluate --models models --out results
    """
    cfg = make_config(config_path, seed, out_dir)
    model = handle_result(load_models(model_dir)) if model_dir is not None else None
    if not as_json:
        if model_dir is not None:
            click.echo(f"Evaluating saved models from {model_dir}")
        else:
            click.echo(f"Evaluating ({cfg.train_device} at CI {cfg.train_ci})")
    report = handle_result(run_pipeline(cfg, model=model))
    finish_report(report, Path(cfg.output_dir), "evaluate", as_json)


@click.command()
@experiment_options
def compare(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    as_json: bool,
) -> None:
    """Compare STELLAR with raw-RSS KNN, LT-KNN and embeddings + KNN.

    \b
    Examples:
      stellar compare --config experiment.json --out results
    """
    cfg = make_config(config_path, seed, out_dir)
    if not as_json:
        click.echo("Comparing arms: stellar, raw-knn, lt-knn, embed-knn")
    report = handle_result(compare_baselines(cfg))
    finish_report(report, Path(cfg.output_dir), "compare", as_json)


@click.command()
@experiment_options
@click.option(
    "--ci",
    type=click.IntRange(min=0),
    default=None,
    help="Test CI (defaults to matrix_ci from the config)",
)
def matrix(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    as_json: bool,
    ci: int | None,
) -> None:
    """Train on each device in turn and test on every device at one CI.

    \b
    Examples:
      stellar matrix --out results
      stellar matrix --ci 0 --config experiment.json
    """
    cfg = make_config(config_path, seed, out_dir)
    if not as_json:
        click.echo(f"Device matrix at CI {cfg.matrix_ci if ci is None else ci}")
    report = handle_result(cross_device_matrix(cfg, ci))
    finish_report(report, Path(cfg.output_dir), "matrix", as_json)
