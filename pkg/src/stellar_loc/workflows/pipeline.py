"""Pipeline workflows - train once, evaluate every (test device, CI) cell.

The trained model is never refit or touched while the test CIs are scored;
its hash is taken before and after the test loop and any difference aborts
the run.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from stellar_loc.lib.errors import InvalidConfigError, RecalibrationError, StageError
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import CellError, EvalReport, ExperimentConfig, FingerprintDataset
from stellar_loc.operations import (
    ARM_STELLAR,
    Predictor,
    Prepared,
    StellarModel,
    evaluate_cells,
    load_source,
    load_stellar,
    model_hash,
    prepare,
    stellar_predictor,
    train_stellar,
)
from stellar_loc.workflows.report import build_metadata, per_ci_summaries

logger = logging.getLogger(__name__)

type PipelineError = StageError | RecalibrationError


@dataclass(frozen=True, eq=False)
class TrainedRun:
    prepared: Prepared
    model: StellarModel


def dataset_for(
    cfg: ExperimentConfig, ds: FingerprintDataset | None
) -> Result[FingerprintDataset, StageError]:
    """``ds`` when the caller already holds the data, otherwise ``cfg.source``."""
    return Ok(ds) if ds is not None else load_source(cfg)


def resolve_cells(ds: FingerprintDataset, cfg: ExperimentConfig) -> list[tuple[str, int]]:
    """Requested (test device, CI) cells, device-major; empty selections mean all."""
    devices = cfg.test_devices or ds.devices
    cis = cfg.test_cis or ds.cis
    return [(device, ci) for device in devices for ci in cis]


def train_run(
    cfg: ExperimentConfig,
    ds: FingerprintDataset | None = None,
    *,
    model: StellarModel | None = None,
) -> Result[TrainedRun, StageError]:
    """Prepare the data and train, or adopt a saved ``model`` trained on the same slice."""
    match dataset_for(cfg, ds):
        case Err() as e:
            return e
        case Ok(data):
            pass
    match prepare(data, cfg):
        case Err() as e:
            return e
        case Ok(prep):
            pass

    if model is not None:
        if model.encoder.ap_universe != prep.ap_universe or model.encoder.rps != prep.dataset.rps:
            reason = "saved encoder was trained on a different AP universe or RP set"
            return Err(StageError("load-model", InvalidConfigError("models", reason)))
        return Ok(TrainedRun(prep, model))

    match train_stellar(prep.train_norm, cfg):
        case Err() as e:
            return e
        case Ok(trained):
            return Ok(TrainedRun(prep, trained))


def evaluate_frozen(
    run: TrainedRun,
    arms: Sequence[tuple[str, Predictor]],
    cells: Sequence[tuple[str, int]],
) -> Result[list[CellError], PipelineError]:
    """Score every arm on every cell and prove the model was left untouched."""
    before = model_hash(run.model)
    out: list[CellError] = []
    for arm, predictor in arms:
        match evaluate_cells(arm, predictor, run.prepared, cells):
            case Err() as e:
                return e
            case Ok(arm_cells):
                out.extend(arm_cells)
    after = model_hash(run.model)
    if after != before:
        return Err(RecalibrationError(before, after))
    return Ok(out)


def stellar_cells(
    cfg: ExperimentConfig,
    ds: FingerprintDataset | None = None,
    *,
    arm: str = ARM_STELLAR,
    model: StellarModel | None = None,
) -> Result[tuple[list[CellError], TrainedRun], PipelineError]:
    match train_run(cfg, ds, model=model):
        case Err() as e:
            return e
        case Ok(run):
            pass
    cells = resolve_cells(run.prepared.dataset, cfg)
    match evaluate_frozen(run, [(arm, stellar_predictor(run.model))], cells):
        case Err() as e:
            return e
        case Ok(results):
            return Ok((results, run))


def run_pipeline(
    cfg: ExperimentConfig,
    ds: FingerprintDataset | None = None,
    *,
    model: StellarModel | None = None,
) -> Result[EvalReport, PipelineError]:
    """Train on the (train device, train CI) slice once and evaluate every requested cell."""
    match stellar_cells(cfg, ds, model=model):
        case Err() as e:
            return e
        case Ok((cells, run)):
            pass
    return Ok(
        EvalReport(
            metadata=build_metadata(cfg, "evaluate", run.model),
            cells=tuple(cells),
            per_ci=per_ci_summaries(cells),
        )
    )


def load_models(model_dir: Path) -> Result[StellarModel, StageError]:
    return load_stellar(model_dir)
