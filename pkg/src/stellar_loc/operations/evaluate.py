"""Evaluation stages - per-arm predictors and per-cell localization error."""

import logging
from collections.abc import Callable, Sequence

import numpy as np

from stellar_loc.lib.errors import StageError
from stellar_loc.lib.knn import CiData, KnnModel, knn_fit, knn_predict, ltknn_models
from stellar_loc.lib.metrics import label_errors, rp_coordinates
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import CellError, ExperimentConfig
from stellar_loc.operations.data import Prepared, Queries, cell_queries, refit_slice
from stellar_loc.operations.model import StellarModel, embed, predict_stellar

logger = logging.getLogger(__name__)

ARM_STELLAR = "stellar"
ARM_RAW_KNN = "raw-knn"
ARM_LT_KNN = "lt-knn"
ARM_EMBED_KNN = "embed-knn"
BASELINE_ARMS = (ARM_RAW_KNN, ARM_LT_KNN, ARM_EMBED_KNN)

type Predictor = Callable[[Queries], Result[np.ndarray, StageError]]


def stellar_predictor(model: StellarModel) -> Predictor:
    return lambda q: predict_stellar(model, q.values)


def _knn(X: np.ndarray, y: np.ndarray, k: int, stage: str) -> Result[KnnModel, StageError]:
    match knn_fit(X, y, k):
        case Err(error):
            return Err(StageError(stage, error))
        case Ok(model):
            return Ok(model)


def raw_knn_predictor(prep: Prepared, k: int) -> Result[Predictor, StageError]:
    """KNN on normalized RSS of the training split, never refit."""
    match _knn(prep.train_norm.values, prep.train_norm.labels, k, ARM_RAW_KNN):
        case Err() as e:
            return e
        case Ok(model):
            return Ok(lambda q: Ok(knn_predict(model, q.values)))


def embed_knn_predictor(
    model: StellarModel, prep: Prepared, k: int
) -> Result[Predictor, StageError]:
    """KNN over encoder embeddings instead of the boosted classifier."""
    match embed(model.encoder, prep.train_norm.values):
        case Err() as e:
            return e
        case Ok(train_emb):
            pass
    match _knn(train_emb, prep.train_norm.labels, k, ARM_EMBED_KNN):
        case Err() as e:
            return e
        case Ok(knn):
            pass

    def predict(q: Queries) -> Result[np.ndarray, StageError]:
        match embed(model.encoder, q.values):
            case Err() as e:
                return e
            case Ok(emb):
                return Ok(knn_predict(knn, emb))

    return Ok(predict)


def ltknn_predictor(
    prep: Prepared, cfg: ExperimentConfig, last_ci: int
) -> Result[Predictor, StageError]:
    """KNN refit on the training device's fresh data every ``ltknn_retrain_every`` CIs.

    The schedule starts at the training CI; CIs before it use the initial fit.
    """
    stream = []
    for ci in range(prep.train_ci, max(last_ci, prep.train_ci) + 1):
        match refit_slice(prep, ci, cfg.split):
            case Err() as e:
                return e
            case Ok(norm):
                pass
        empty = np.empty((0, norm.num_aps))
        stream.append(CiData(ci, norm.values, norm.labels, empty, np.empty(0, dtype=np.int64)))

    match ltknn_models(stream, cfg.knn.k, cfg.ltknn_retrain_every):
        case Err(error):
            return Err(StageError(ARM_LT_KNN, error))
        case Ok(models):
            pass

    def predict(q: Queries) -> Result[np.ndarray, StageError]:
        _, model = models[max(q.ci, prep.train_ci)]
        return Ok(knn_predict(model, q.values))

    return Ok(predict)


def evaluate_cells(
    arm: str,
    predictor: Predictor,
    prep: Prepared,
    cells: Sequence[tuple[str, int]],
) -> Result[list[CellError], StageError]:
    """Mean localization error of ``arm`` on every (test device, CI) cell, in order."""
    coords = rp_coordinates(prep.dataset.rps)
    out = []
    for device_id, ci in cells:
        match cell_queries(prep, device_id, ci):
            case Err() as e:
                return e
            case Ok(queries):
                pass
        match predictor(queries):
            case Err() as e:
                return e
            case Ok(predicted):
                pass
        errors = label_errors(predicted, queries.labels, coords)
        out.append(
            CellError(
                arm=arm,
                train_device=prep.train_device,
                test_device=device_id,
                ci=ci,
                mean_error_m=float(errors.mean()),
                count=int(errors.size),
            )
        )
    logger.info("%s: evaluated %d cells", arm, len(out))
    return Ok(out)
