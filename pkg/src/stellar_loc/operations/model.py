"""Model stages - train the encoder, embed, fit and apply the boosted classifier."""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from stellar_loc.lib.errors import StageError
from stellar_loc.lib.gbt import BoostedEnsemble, gbt_fit, gbt_predict
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.lib.siamese import SiameseModel, encode, parameter_hash, train
from stellar_loc.lib.storage import modelfile
from stellar_loc.models import ExperimentConfig, NormalizedDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StellarModel:
    """Encoder plus the ensemble fit on its training embeddings."""

    encoder: SiameseModel
    ensemble: BoostedEnsemble
    loss_history: tuple[float, ...] = ()


def embed(encoder: SiameseModel, values: np.ndarray) -> Result[np.ndarray, StageError]:
    match encode(encoder, np.atleast_2d(values)):
        case Err(error):
            return Err(StageError("encode", error))
        case Ok(emb):
            return Ok(emb)


def fit_ensemble(
    encoder: SiameseModel, db: NormalizedDataset, cfg: ExperimentConfig
) -> Result[BoostedEnsemble, StageError]:
    match embed(encoder, db.values):
        case Err() as e:
            return e
        case Ok(emb):
            pass
    logger.info("fitting %d boosting rounds on %d embeddings", cfg.gbt.num_rounds, len(db))
    match gbt_fit(
        emb,
        db.labels,
        cfg.gbt,
        num_classes=db.num_classes,
        class_ids=[rp.rp_id for rp in db.rps],
    ):
        case Err(error):
            return Err(StageError("fit-gbt", error))
        case Ok(ensemble):
            return Ok(ensemble)


def train_stellar(
    db: NormalizedDataset, cfg: ExperimentConfig
) -> Result[StellarModel, StageError]:
    """Train the encoder on ``db``, then the classifier on its embeddings."""
    match train(db, cfg.miner, cfg.model):
        case Err(error):
            return Err(StageError("train-encoder", error))
        case Ok(result):
            pass
    match fit_ensemble(result.model, db, cfg):
        case Err() as e:
            return e
        case Ok(ensemble):
            return Ok(StellarModel(result.model, ensemble, result.loss_history))


def predict_stellar(model: StellarModel, values: np.ndarray) -> Result[np.ndarray, StageError]:
    """Class index per row of normalized fingerprints."""
    match embed(model.encoder, values):
        case Err() as e:
            return e
        case Ok(emb):
            pass
    match gbt_predict(model.ensemble, emb):
        case Err(error):
            return Err(StageError("predict", error))
        case Ok(prediction):
            return Ok(prediction.labels)


def model_hash(model: StellarModel) -> str:
    """Fingerprint of every trained value: encoder tensors, context and trees."""
    digest = hashlib.sha256(parameter_hash(model.encoder).encode())
    digest.update(modelfile.gbt_to_json(model.ensemble).encode())
    return digest.hexdigest()


SIAMESE_FILE = "siamese.json"
GBT_FILE = "gbt.json"


def save_stellar(model: StellarModel, out_dir: Path) -> Result[list[Path], StageError]:
    paths = []
    for result in (
        modelfile.save_siamese(model.encoder, out_dir / SIAMESE_FILE),
        modelfile.save_gbt(model.ensemble, out_dir / GBT_FILE),
    ):
        match result:
            case Err(error):
                return Err(StageError("save-model", error))
            case Ok(path):
                paths.append(path)
    return Ok(paths)


def load_stellar(model_dir: Path) -> Result[StellarModel, StageError]:
    match modelfile.load_siamese(model_dir / SIAMESE_FILE):
        case Err(error):
            return Err(StageError("load-model", error))
        case Ok(encoder):
            pass
    match modelfile.load_gbt(model_dir / GBT_FILE):
        case Err(error):
            return Err(StageError("load-model", error))
        case Ok(ensemble):
            return Ok(StellarModel(encoder, ensemble))
