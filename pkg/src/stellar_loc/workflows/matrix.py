"""Device-heterogeneity matrix - train on each device, test on every device at one CI."""

import logging
from dataclasses import replace

from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import CellError, EvalReport, ExperimentConfig, FingerprintDataset
from stellar_loc.workflows.pipeline import PipelineError, dataset_for, stellar_cells
from stellar_loc.workflows.report import build_metadata

logger = logging.getLogger(__name__)


def cross_device_matrix(
    cfg: ExperimentConfig, ci: int | None = None, ds: FingerprintDataset | None = None
) -> Result[EvalReport, PipelineError]:
    """One pipeline per training device, each scored on every test device at ``ci``.

    ``ci`` defaults to ``cfg.matrix_ci``; training always uses ``cfg.train_ci``.
    """
    match dataset_for(cfg, ds):
        case Err() as e:
            return e
        case Ok(data):
            pass

    at = cfg.matrix_ci if ci is None else ci
    cells: list[CellError] = []
    for train_device in data.devices:
        logger.info("matrix: training on %s", train_device)
        point = replace(cfg, train_device=train_device, test_cis=(at,))
        match stellar_cells(point, data):
            case Err() as e:
                return e
            case Ok((row, _)):
                cells.extend(row)

    metadata = build_metadata(replace(cfg, matrix_ci=at), "matrix")
    return Ok(EvalReport(metadata=metadata, cells=tuple(cells)))
