"""Report assembly and report files.

Every experiment command writes ``<command>_report.json`` (the full
``EvalReport``) and ``<command>_cells.csv`` (one row per evaluated cell). Both
carry the seed and config hash; neither carries timestamps, so re-runs of the
same config are byte-identical.
"""

from collections import defaultdict
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from stellar_loc import __version__
from stellar_loc.lib.config import config_hash
from stellar_loc.lib.errors import FileWriteError
from stellar_loc.lib.result import Result, collect
from stellar_loc.lib.siamese import parameter_count
from stellar_loc.lib.storage import file
from stellar_loc.models import (
    CellError,
    CiSummary,
    EvalReport,
    ExperimentConfig,
    Improvement,
    RunMetadata,
)
from stellar_loc.operations import ARM_STELLAR, StellarModel, model_hash

CELL_COLUMNS = ["arm", "train_device", "test_device", "ci", "mean_error_m", "count"]

# Floor for the improvement denominator when STELLAR's error is exactly 0.
_ZERO_ERROR = 1e-9


def build_metadata(
    cfg: ExperimentConfig, command: str, model: StellarModel | None = None
) -> RunMetadata:
    return RunMetadata(
        command=command,
        seed=cfg.seed,
        config_hash=config_hash(cfg),
        version=__version__,
        numpy_version=np.__version__,
        parameter_count=parameter_count(model.encoder) if model is not None else 0,
        parameter_hash=model_hash(model) if model is not None else "",
        config=cfg.to_dict(),
    )


def per_ci_summaries(cells: Iterable[CellError]) -> tuple[CiSummary, ...]:
    """Mean, best and worst test device per (arm, CI), in arm then CI order."""
    groups: dict[tuple[str, int], list[CellError]] = defaultdict(list)
    for cell in cells:
        groups[(cell.arm, cell.ci)].append(cell)

    out = []
    for (arm, ci), group in groups.items():
        # min/max keep the first device on ties, i.e. test-device order.
        best = min(group, key=lambda c: c.mean_error_m)
        worst = max(group, key=lambda c: c.mean_error_m)
        out.append(
            CiSummary(
                arm=arm,
                ci=ci,
                mean_error_m=float(np.mean([c.mean_error_m for c in group])),
                best_device=best.test_device,
                best_error_m=best.mean_error_m,
                worst_device=worst.test_device,
                worst_error_m=worst.mean_error_m,
                spread_m=worst.mean_error_m - best.mean_error_m,
            )
        )
    arm_order = {arm: i for i, arm in enumerate(dict.fromkeys(a for a, _ in groups))}
    return tuple(sorted(out, key=lambda s: (arm_order[s.arm], s.ci)))


def improvement_pct(arm_error: float, stellar_error: float) -> float:
    """100 * (arm - stellar) / stellar: how much lower STELLAR's error is."""
    return 100.0 * (arm_error - stellar_error) / max(stellar_error, _ZERO_ERROR)


def improvements(cells: Sequence[CellError]) -> tuple[Improvement, ...]:
    """Improvement of STELLAR over each other arm, overall and on the last CI."""
    by_arm: dict[str, list[CellError]] = defaultdict(list)
    for cell in cells:
        by_arm[cell.arm].append(cell)
    stellar = by_arm.get(ARM_STELLAR)
    if not stellar:
        return ()

    last_ci = max(c.ci for c in stellar)

    def mean(group: Iterable[CellError]) -> float:
        return float(np.mean([c.mean_error_m for c in group]))

    s_all = mean(stellar)
    s_last = mean(c for c in stellar if c.ci == last_ci)
    out = []
    for arm, group in by_arm.items():
        if arm == ARM_STELLAR:
            continue
        a_all = mean(group)
        a_last = mean(c for c in group if c.ci == last_ci)
        out.append(
            Improvement(
                arm=arm,
                mean_error_m=a_all,
                improvement_pct=improvement_pct(a_all, s_all),
                extended_ci=last_ci,
                extended_error_m=a_last,
                extended_improvement_pct=improvement_pct(a_last, s_last),
            )
        )
    return tuple(out)


def cells_frame(report: EvalReport) -> pd.DataFrame:
    frame = pd.DataFrame([_cell_row(c) for c in report.cells], columns=CELL_COLUMNS)
    frame["seed"] = report.metadata.seed
    frame["config_hash"] = report.metadata.config_hash
    return frame


def _cell_row(cell: CellError) -> dict[str, object]:
    return {name: getattr(cell, name) for name in CELL_COLUMNS}


def write_frame(frame: pd.DataFrame, path: Path) -> Result[Path, FileWriteError]:
    """Tidy CSV, LF line endings, no index."""
    return file.write(path, frame.to_csv(index=False, lineterminator="\n"))


def write_report(
    report: EvalReport, out_dir: Path, command: str
) -> Result[list[Path], FileWriteError]:
    return collect(
        (
            file.write(out_dir / f"{command}_report.json", report.to_json()),
            write_frame(cells_frame(report), out_dir / f"{command}_cells.csv"),
        )
    )
