"""Plots command - re-emit plot data from a saved report."""

from pathlib import Path

import click

from stellar_loc.commands.common import handle_result, json_option, out_option, render_json
from stellar_loc.lib.errors import ReportLoadError
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.lib.storage import file
from stellar_loc.models import EvalReport
from stellar_loc.workflows import emit_plots


def read_report(path: Path) -> Result[EvalReport, ReportLoadError]:
    text = file.read(path)
    if text is None:
        return Err(ReportLoadError(path, "report file not found"))
    try:
        return Ok(EvalReport.from_json(text))
    except (ValueError, TypeError, KeyError) as e:
        return Err(ReportLoadError(path, f"not a report: {e}"))


@click.command()
@click.argument("report_path", type=click.Path(dir_okay=False, path_type=Path))
@out_option
@json_option
def plots(report_path: Path, out_dir: Path | None, as_json: bool) -> None:
    """Write the plot-data CSVs for REPORT_PATH (a *_report.json file).

    Output goes next to the report unless --out is given.

    \b
    Examples:
      stellar plots results/compare_report.json
      stellar plots results/sweep-d_report.json --out figures
    """
    report = handle_result(read_report(report_path))
    target = out_dir if out_dir is not None else report_path.parent
    paths = handle_result(emit_plots(report, target), as_json=as_json)

    if as_json:
        click.echo(render_json({"files": [str(p) for p in paths]}))
        return
    click.secho(f"{len(paths)} plot files written", fg="green", bold=True, err=True)
    for path in paths:
        click.echo(f"  {path}")
