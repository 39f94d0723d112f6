"""Sweep workflows - one full pipeline per grid point.

``sweep_d`` varies the positive's AP-dropout fraction; ``sweep_samples``
varies the number of training fingerprints per RP. Grid points share the
data, the split seed and the test queries.
"""

import logging
from collections import defaultdict
from dataclasses import replace

import numpy as np

from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import (
    CellError,
    DSweepRow,
    EvalReport,
    ExperimentConfig,
    FingerprintDataset,
    SamplesRow,
)
from stellar_loc.operations import ARM_STELLAR, with_samples
from stellar_loc.workflows.pipeline import PipelineError, dataset_for, stellar_cells
from stellar_loc.workflows.report import build_metadata, per_ci_summaries

logger = logging.getLogger(__name__)


def d_arm(d_fraction: float) -> str:
    return f"{ARM_STELLAR}@d={d_fraction:g}"


def samples_arm(samples_per_rp: int) -> str:
    return f"{ARM_STELLAR}@samples={samples_per_rp}"


def sweep_d(
    cfg: ExperimentConfig, ds: FingerprintDataset | None = None
) -> Result[EvalReport, PipelineError]:
    """Mean, min and max cell error for every D in ``cfg.sweeps.d_grid``."""
    match dataset_for(cfg, ds):
        case Err() as e:
            return e
        case Ok(data):
            pass

    rows: list[DSweepRow] = []
    cells: list[CellError] = []
    for d in cfg.sweeps.d_grid:
        logger.info("sweep-d: D = %g", d)
        point = replace(cfg, miner=replace(cfg.miner, d_fraction=d))
        match stellar_cells(point, data, arm=d_arm(d)):
            case Err() as e:
                return e
            case Ok((point_cells, _)):
                pass
        errors = [c.mean_error_m for c in point_cells]
        rows.append(DSweepRow(d, float(np.mean(errors)), min(errors), max(errors)))
        cells.extend(point_cells)

    return Ok(
        EvalReport(
            metadata=build_metadata(cfg, "sweep-d"),
            cells=tuple(cells),
            per_ci=per_ci_summaries(cells),
            d_sweep=tuple(rows),
        )
    )


def sweep_samples(
    cfg: ExperimentConfig, ds: FingerprintDataset | None = None
) -> Result[EvalReport, PipelineError]:
    """Per-CI mean error (across test devices) for every count in ``cfg.sweeps.samples_grid``."""
    match dataset_for(cfg, ds):
        case Err() as e:
            return e
        case Ok(data):
            pass

    rows: list[SamplesRow] = []
    cells: list[CellError] = []
    for samples in cfg.sweeps.samples_grid:
        logger.info("sweep-samples: %d per RP", samples)
        point = replace(cfg, split=with_samples(cfg.split, samples))
        match stellar_cells(point, data, arm=samples_arm(samples)):
            case Err() as e:
                return e
            case Ok((point_cells, _)):
                pass
        by_ci: dict[int, list[float]] = defaultdict(list)
        for c in point_cells:
            by_ci[c.ci].append(c.mean_error_m)
        rows.extend(
            SamplesRow(samples, ci, float(np.mean(errs))) for ci, errs in sorted(by_ci.items())
        )
        cells.extend(point_cells)

    return Ok(
        EvalReport(
            metadata=build_metadata(cfg, "sweep-samples"),
            cells=tuple(cells),
            per_ci=per_ci_summaries(cells),
            samples=tuple(rows),
        )
    )
