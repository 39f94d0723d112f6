"""Operations layer - pipeline stages that return Result types."""

from stellar_loc.operations.data import (
    Prepared,
    Queries,
    cell_queries,
    load_source,
    prepare,
    refit_slice,
    with_samples,
)
from stellar_loc.operations.evaluate import (
    ARM_EMBED_KNN,
    ARM_LT_KNN,
    ARM_RAW_KNN,
    ARM_STELLAR,
    BASELINE_ARMS,
    Predictor,
    embed_knn_predictor,
    evaluate_cells,
    ltknn_predictor,
    raw_knn_predictor,
    stellar_predictor,
)
from stellar_loc.operations.model import (
    StellarModel,
    embed,
    fit_ensemble,
    load_stellar,
    model_hash,
    predict_stellar,
    save_stellar,
    train_stellar,
)

__all__ = [
    # data
    "Prepared",
    "Queries",
    "load_source",
    "prepare",
    "cell_queries",
    "refit_slice",
    "with_samples",
    # model
    "StellarModel",
    "train_stellar",
    "fit_ensemble",
    "embed",
    "predict_stellar",
    "model_hash",
    "save_stellar",
    "load_stellar",
    # evaluate
    "ARM_STELLAR",
    "ARM_RAW_KNN",
    "ARM_LT_KNN",
    "ARM_EMBED_KNN",
    "BASELINE_ARMS",
    "Predictor",
    "stellar_predictor",
    "raw_knn_predictor",
    "embed_knn_predictor",
    "ltknn_predictor",
    "evaluate_cells",
]
