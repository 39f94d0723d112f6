"""Generate command - write the synthetic benchmark buildings."""

from pathlib import Path

import click

from stellar_loc.commands.common import (
    echo_key_value,
    experiment_options,
    handle_result,
    make_config,
    render_json,
)
from stellar_loc.workflows import generate_benchmark


@click.command()
@experiment_options
def generate(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    as_json: bool,
) -> None:
    """Generate the two-building synthetic benchmark as dataset CSVs.

    Writes building-A.csv, building-B.csv and manifest.json.

    \b
    Examples:
      stellar generate --out data
      stellar generate --seed 7 --out data-7
    """
    cfg = make_config(config_path, seed, out_dir)
    target = Path(cfg.output_dir)
    if not as_json:
        click.echo(f"Generating benchmark (seed {cfg.seed})")
        echo_key_value("Output", target, indent=1)

    paths = handle_result(
        generate_benchmark(cfg.seed, target),
        success_message="Benchmark written.",
        as_json=as_json,
    )

    if as_json:
        click.echo(render_json({"seed": cfg.seed, "files": [str(p) for p in paths]}))
        return
    for path in paths:
        click.echo(f"  {path}")
