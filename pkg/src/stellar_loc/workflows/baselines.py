"""Baseline comparison - STELLAR against raw-RSS KNN, LT-KNN and embeddings + KNN.

All arms share the data, the split and the trained encoder, and are scored
on the same cells.
"""

import logging

from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import EvalReport, ExperimentConfig, FingerprintDataset
from stellar_loc.operations import (
    ARM_EMBED_KNN,
    ARM_LT_KNN,
    ARM_RAW_KNN,
    ARM_STELLAR,
    Predictor,
    embed_knn_predictor,
    ltknn_predictor,
    raw_knn_predictor,
    stellar_predictor,
)
from stellar_loc.workflows.pipeline import (
    PipelineError,
    evaluate_frozen,
    resolve_cells,
    train_run,
)
from stellar_loc.workflows.report import build_metadata, improvements, per_ci_summaries

logger = logging.getLogger(__name__)


def compare_baselines(
    cfg: ExperimentConfig, ds: FingerprintDataset | None = None
) -> Result[EvalReport, PipelineError]:
    """Per-cell errors of every arm plus STELLAR's improvement over each baseline."""
    match train_run(cfg, ds):
        case Err() as e:
            return e
        case Ok(run):
            pass

    cells = resolve_cells(run.prepared.dataset, cfg)
    last_ci = max(ci for _, ci in cells)
    k = cfg.knn.k

    arms: list[tuple[str, Predictor]] = [(ARM_STELLAR, stellar_predictor(run.model))]
    for arm, built in (
        (ARM_RAW_KNN, raw_knn_predictor(run.prepared, k)),
        (ARM_LT_KNN, ltknn_predictor(run.prepared, cfg, last_ci)),
        (ARM_EMBED_KNN, embed_knn_predictor(run.model, run.prepared, k)),
    ):
        match built:
            case Err() as e:
                return e
            case Ok(predictor):
                arms.append((arm, predictor))

    logger.info("comparing %d arms on %d cells", len(arms), len(cells))
    match evaluate_frozen(run, arms, cells):
        case Err() as e:
            return e
        case Ok(results):
            pass

    return Ok(
        EvalReport(
            metadata=build_metadata(cfg, "compare", run.model),
            cells=tuple(results),
            per_ci=per_ci_summaries(results),
            improvements=improvements(results),
        )
    )
