"""Brute-force k-nearest-neighbour classifier and its periodically refit variant."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from stellar_loc.lib.errors import InvalidConfigError, MissingCIError, ShapeMismatchError
from stellar_loc.lib.metrics import label_errors
from stellar_loc.lib.result import Err, Ok, Result

logger = logging.getLogger(__name__)

type LtKnnError = MissingCIError | InvalidConfigError | ShapeMismatchError


@dataclass(frozen=True, eq=False)
class KnnModel:
    """Stored training vectors and class labels; euclidean distance."""

    vectors: np.ndarray
    labels: np.ndarray
    k: int

    def __len__(self) -> int:
        return int(self.vectors.shape[0])


def knn_fit(
    X: np.ndarray, y: np.ndarray, k: int = 4
) -> Result[KnnModel, InvalidConfigError | ShapeMismatchError]:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (X.shape[0],):
        return Err(ShapeMismatchError("y", (X.shape[0],), y.shape))
    if not 1 <= k <= X.shape[0]:
        return Err(InvalidConfigError("k", f"must lie in [1, {X.shape[0]}], got {k}"))
    X = X.copy()
    y = y.copy()
    X.setflags(write=False)
    y.setflags(write=False)
    return Ok(KnnModel(X, y, k))


def _vote(labels: np.ndarray, dists: np.ndarray) -> int:
    """Majority label; ties by smaller mean distance, then lowest label."""
    classes, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
    mean_dist = np.bincount(inverse, weights=dists) / counts
    # lexsort keys run last-to-first: count desc, mean distance asc, label asc.
    best = np.lexsort((classes, mean_dist, -counts))[0]
    return int(classes[best])


def knn_predict(model: KnnModel, x: np.ndarray) -> np.ndarray:
    """Predicted class index for each row of ``x`` (one vector gives a length-1 array).

    Neighbours are the k smallest distances, equal distances ordered by
    training row.
    """
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    rows = np.arange(len(model))
    out = np.empty(X.shape[0], dtype=np.int64)
    for i, q in enumerate(X):
        dist = np.sqrt(np.sum((model.vectors - q) ** 2, axis=1))
        nearest = np.lexsort((rows, dist))[: model.k]
        out[i] = _vote(model.labels[nearest], dist[nearest])
    return out


# =============================================================================
# LT-KNN
# =============================================================================


@dataclass(frozen=True, eq=False)
class CiData:
    """One CI of a temporal sequence: the refit slice and the queries to score."""

    ci: int
    fit_X: np.ndarray
    fit_y: np.ndarray
    test_X: np.ndarray
    test_y: np.ndarray


@dataclass(frozen=True)
class CiOutcome:
    ci: int
    fit_ci: int
    refit: bool
    mean_error_m: float


def fit_schedule(cis: Sequence[int], retrain_every: int | None) -> dict[int, int]:
    """CI -> the CI whose data the active model was fit on.

    The first CI always fits. With ``retrain_every = n`` refits happen every
    n CIs after it (entering CI 3, 6, ... from CI 0 with n = 3); None never
    refits.
    """
    if not cis:
        return {}
    first = cis[0]
    if retrain_every is None:
        return {ci: first for ci in cis}
    return {ci: first + (ci - first) // retrain_every * retrain_every for ci in cis}


def _check_sequence(cis: Sequence[int]) -> MissingCIError | None:
    for offset, ci in enumerate(cis):
        expected = cis[0] + offset
        if ci != expected:
            return MissingCIError(expected)
    return None


def ltknn_models(
    stream: Sequence[CiData], k: int, retrain_every: int | None
) -> Result[dict[int, tuple[int, KnnModel]], LtKnnError]:
    """CI -> (fit CI, model) following ``fit_schedule``."""
    if retrain_every is not None and retrain_every < 1:
        return Err(InvalidConfigError("retrain_every", "must be >= 1 or null"))
    cis = [d.ci for d in stream]
    if (missing := _check_sequence(cis)) is not None:
        return Err(missing)

    schedule = fit_schedule(cis, retrain_every)
    by_ci = {d.ci: d for d in stream}
    models: dict[int, tuple[int, KnnModel]] = {}
    fitted: dict[int, KnnModel] = {}
    for ci in cis:
        fit_ci = schedule[ci]
        if fit_ci not in fitted:
            match knn_fit(by_ci[fit_ci].fit_X, by_ci[fit_ci].fit_y, k):
                case Err() as e:
                    return e
                case Ok(model):
                    fitted[fit_ci] = model
            logger.debug("lt-knn fit on CI %d", fit_ci)
        models[ci] = (fit_ci, fitted[fit_ci])
    return Ok(models)


def ltknn_evaluate(
    stream: Sequence[CiData], coords: np.ndarray, k: int = 4, retrain_every: int | None = 3
) -> Result[list[CiOutcome], LtKnnError]:
    """Per-CI mean localization error of KNN refit on the schedule.

    ``coords`` is the R x 2 RP coordinate table indexed by class.
    """
    match ltknn_models(stream, k, retrain_every):
        case Err() as e:
            return e
        case Ok(models):
            pass

    outcomes = []
    for d in stream:
        fit_ci, model = models[d.ci]
        errors = label_errors(knn_predict(model, d.test_X), d.test_y, coords)
        outcomes.append(
            CiOutcome(
                ci=d.ci,
                fit_ci=fit_ci,
                refit=fit_ci == d.ci and d.ci != stream[0].ci,
                mean_error_m=float(errors.mean()) if errors.size else 0.0,
            )
        )
    return Ok(outcomes)
