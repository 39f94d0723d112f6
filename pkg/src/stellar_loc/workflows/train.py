"""Train workflow - fit the encoder and classifier, write the model files."""

from dataclasses import dataclass
from pathlib import Path

from stellar_loc.lib.errors import FileWriteError, StageError
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.lib.storage import file
from stellar_loc.models import ExperimentConfig, FingerprintDataset, TrainReport
from stellar_loc.operations import save_stellar
from stellar_loc.workflows.pipeline import TrainedRun, train_run
from stellar_loc.workflows.report import build_metadata

TRAIN_REPORT_FILE = "train_report.json"

type TrainModelsError = StageError | FileWriteError


@dataclass(frozen=True, eq=False)
class TrainOutcome:
    run: TrainedRun
    report: TrainReport
    paths: tuple[Path, ...]


def train_models(
    cfg: ExperimentConfig, out_dir: Path, ds: FingerprintDataset | None = None
) -> Result[TrainOutcome, TrainModelsError]:
    """Train on the configured slice and write siamese.json, gbt.json and train_report.json."""
    match train_run(cfg, ds):
        case Err() as e:
            return e
        case Ok(run):
            pass

    report = TrainReport(
        metadata=build_metadata(cfg, "train", run.model),
        loss_history=run.model.loss_history,
        gbt_training_loss=run.model.ensemble.training_loss,
    )
    match save_stellar(run.model, out_dir):
        case Err() as e:
            return e
        case Ok(model_paths):
            pass
    match file.write(out_dir / TRAIN_REPORT_FILE, report.to_json()):
        case Err() as e:
            return e
        case Ok(report_path):
            pass
    return Ok(TrainOutcome(run, report, (*model_paths, report_path)))
