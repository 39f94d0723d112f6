"""Plot data - tidy CSV tables, one per figure family.

Columns:

- ``d_sweep.csv``: d_fraction, mean_error_m, min_error_m, max_error_m
- ``samples.csv``: samples_per_rp, ci, mean_error_m
- ``device_matrix.csv``: train_device, test_device, mean_error_m
- ``temporal_curves.csv``: arm, ci, mean_error_m
- ``box_deltas.csv``: arm, test_device, ci, delta_m (arm error minus STELLAR's)

A family is written only when the report carries the data it needs.
"""

from dataclasses import asdict
from pathlib import Path

import pandas as pd

from stellar_loc.lib.errors import FileWriteError, ReportIncompleteError
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import EvalReport
from stellar_loc.operations import ARM_STELLAR
from stellar_loc.workflows.report import write_frame

MATRIX_COMMAND = "matrix"

D_SWEEP_COLUMNS = ["d_fraction", "mean_error_m", "min_error_m", "max_error_m"]
SAMPLES_COLUMNS = ["samples_per_rp", "ci", "mean_error_m"]
MATRIX_COLUMNS = ["train_device", "test_device", "mean_error_m"]
CURVE_COLUMNS = ["arm", "ci", "mean_error_m"]
BOX_COLUMNS = ["arm", "test_device", "ci", "delta_m"]

type PlotError = FileWriteError | ReportIncompleteError


def d_sweep_frame(report: EvalReport) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in report.d_sweep], columns=D_SWEEP_COLUMNS)


def samples_frame(report: EvalReport) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in report.samples], columns=SAMPLES_COLUMNS)


def device_matrix_frame(report: EvalReport) -> pd.DataFrame:
    stellar = [asdict(c) for c in report.cells if c.arm == ARM_STELLAR]
    return pd.DataFrame(stellar, columns=MATRIX_COLUMNS)


def temporal_curves_frame(report: EvalReport) -> pd.DataFrame:
    rows = [{"arm": s.arm, "ci": s.ci, "mean_error_m": s.mean_error_m} for s in report.per_ci]
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def box_deltas_frame(report: EvalReport) -> pd.DataFrame:
    """Per-cell error difference between each baseline and STELLAR."""
    cells = pd.DataFrame([asdict(c) for c in report.cells])
    if cells.empty:
        return pd.DataFrame(columns=BOX_COLUMNS)
    keys = ["test_device", "ci"]
    stellar = cells.loc[cells["arm"] == ARM_STELLAR, [*keys, "mean_error_m"]]
    others = cells.loc[cells["arm"] != ARM_STELLAR, ["arm", *keys, "mean_error_m"]]
    merged = others.merge(stellar, on=keys, how="inner", suffixes=("", "_stellar"), sort=False)
    merged["delta_m"] = merged["mean_error_m"] - merged["mean_error_m_stellar"]
    return merged[BOX_COLUMNS].reset_index(drop=True)


def _has_baselines(report: EvalReport) -> bool:
    arms = report.arms
    return ARM_STELLAR in arms and len(arms) > 1


def plot_frames(report: EvalReport) -> dict[str, pd.DataFrame]:
    """File name -> frame for every family the report can fill, in a fixed order."""
    frames: dict[str, pd.DataFrame] = {}
    if report.d_sweep:
        frames["d_sweep.csv"] = d_sweep_frame(report)
    if report.samples:
        frames["samples.csv"] = samples_frame(report)
    if report.metadata.command == MATRIX_COMMAND and report.cells:
        frames["device_matrix.csv"] = device_matrix_frame(report)
    if report.per_ci:
        frames["temporal_curves.csv"] = temporal_curves_frame(report)
    if _has_baselines(report):
        frames["box_deltas.csv"] = box_deltas_frame(report)
    return frames


def emit_plots(report: EvalReport, out_dir: Path) -> Result[list[Path], PlotError]:
    frames = plot_frames(report)
    if not frames:
        return Err(ReportIncompleteError("cells"))

    paths = []
    for name, frame in frames.items():
        match write_frame(frame, out_dir / name):
            case Err() as e:
                return e
            case Ok(path):
                paths.append(path)
    return Ok(paths)
