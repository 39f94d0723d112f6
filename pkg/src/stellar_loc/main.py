"""STELLAR CLI entry point."""

import logging

import click

from . import __version__
from .commands import (
    compare,
    evaluate,
    generate,
    matrix,
    plots,
    sweep_d_cmd,
    sweep_samples_cmd,
    train,
)

_LEVELS = {0: logging.WARNING, 1: logging.INFO}


class ClickHandler(logging.Handler):
    """Route log records to stderr through click."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            line = f"{record.levelname.lower()} {record.name}: {self.format(record)}"
            click.echo(line, err=True)
        except Exception:
            self.handleError(record)


def configure_logging(verbosity: int) -> None:
    root = logging.getLogger("stellar_loc")
    for handler in list(root.handlers):
        if isinstance(handler, ClickHandler):
            root.removeHandler(handler)
    root.addHandler(ClickHandler())
    root.setLevel(_LEVELS.get(verbosity, logging.DEBUG))
    root.propagate = False


@click.group()
@click.version_option(version=__version__, prog_name="stellar")
@click.option("--verbose", "-v", count=True, help="Log progress (-v info, -vv debug)")
def cli(verbose: int) -> None:
    """STELLAR - calibration-free indoor localization experiments."""
    configure_logging(verbose)


# Register commands
cli.add_command(generate)
cli.add_command(train)
cli.add_command(evaluate)
cli.add_command(sweep_d_cmd)
cli.add_command(sweep_samples_cmd)
cli.add_command(compare)
cli.add_command(matrix)
cli.add_command(plots)


if __name__ == "__main__":
    cli()
