"""Train command - fit the encoder and the boosted classifier, save both."""

from pathlib import Path

import click

from stellar_loc.commands.common import (
    echo_key_value,
    experiment_options,
    handle_result,
    make_config,
    render_json,
)
from stellar_loc.workflows import train_models


@click.command()
@experiment_options
def train(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    as_json: bool,
) -> None:
    """Train on the configured (device, CI) slice and write the model files.

    Writes siamese.json, gbt.json and train_report.json.

    \b
    Examples:
      stellar train --config experiment.json --out models
      stellar train --seed 3
    """
    cfg = make_config(config_path, seed, out_dir)
    target = Path(cfg.output_dir)
    if not as_json:
        click.echo(f"Training on {cfg.train_device} at CI {cfg.train_ci}")
        echo_key_value("Heads", f"{cfg.model.num_heads} x {cfg.model.head_size}", indent=1)
        echo_key_value("Epochs", cfg.model.epochs, indent=1)
        echo_key_value("Boosting rounds", cfg.gbt.num_rounds, indent=1)
        click.echo()

    outcome = handle_result(
        train_models(cfg, target),
        success_message="Models trained.",
        as_json=as_json,
    )
    report = outcome.report

    if as_json:
        click.echo(
            render_json(
                {
                    "seed": report.metadata.seed,
                    "config_hash": report.metadata.config_hash,
                    "parameter_count": report.metadata.parameter_count,
                    "parameter_hash": report.metadata.parameter_hash,
                    "final_loss": report.loss_history[-1] if report.loss_history else None,
                    "files": [str(p) for p in outcome.paths],
                }
            )
        )
        return

    echo_key_value("Parameters", report.metadata.parameter_count, indent=1)
    if report.loss_history:
        echo_key_value("Final triplet loss", f"{report.loss_history[-1]:.6f}", indent=1)
    echo_key_value("Final log-loss", f"{report.gbt_training_loss[-1]:.6f}", indent=1)
    for path in outcome.paths:
        click.echo(f"  {path}")
