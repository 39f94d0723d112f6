"""Data stages - load a building, fix the AP universe, split the training slice."""

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from stellar_loc.lib.dataset import normalize_dataset, realign, require_slice, split
from stellar_loc.lib.errors import EmptySliceError, MissingCIError, StageError
from stellar_loc.lib.result import Err, Ok, Result, map_err
from stellar_loc.lib.storage.csvfile import load_csv
from stellar_loc.lib.synthgen import benchmark_building
from stellar_loc.models import (
    ExperimentConfig,
    FingerprintDataset,
    NormalizedDataset,
    SourceKind,
    SplitSpec,
)

logger = logging.getLogger(__name__)


def load_source(cfg: ExperimentConfig) -> Result[FingerprintDataset, StageError]:
    """The building dataset named by ``cfg.source``."""
    match cfg.source.kind:
        case SourceKind.CSV:
            path = Path(cfg.source.csv_path or "")
            logger.info("loading %s", path)
            return map_err(load_csv(path), lambda error: StageError("load", error))
        case SourceKind.SYNTHETIC:
            logger.info(
                "generating benchmark building %s (seed %d)", cfg.source.building, cfg.seed
            )
            return Ok(benchmark_building(cfg.source.building, cfg.seed).dataset)


@dataclass(frozen=True, eq=False)
class Prepared:
    """A dataset re-expressed over the training universe plus the training split.

    ``dataset`` holds every record, realigned. ``train``/``test`` partition the
    (train device, train CI) slice; ``train_norm`` is the normalized training part.
    ``split_spec`` is the partition every training-device slice is held out with.
    """

    dataset: FingerprintDataset
    train_device: str
    train_ci: int
    train: FingerprintDataset
    test: FingerprintDataset
    train_norm: NormalizedDataset
    split_spec: SplitSpec

    @property
    def ap_universe(self) -> tuple[str, ...]:
        return self.dataset.ap_universe


def _normalized(ds: FingerprintDataset, stage: str) -> Result[NormalizedDataset, StageError]:
    return map_err(normalize_dataset(ds), lambda error: StageError(stage, error))


def prepare(ds: FingerprintDataset, cfg: ExperimentConfig) -> Result[Prepared, StageError]:
    """Select the training slice, restrict the AP universe to the APs it sees and split it.

    Every other slice is realigned to that universe: APs the training device
    never saw are dropped, unseen training APs read -100.
    """
    match require_slice(ds, cfg.train_device, cfg.train_ci):
        case Err(error):
            return Err(StageError("select", error))
        case Ok(slice_ds):
            pass

    universe = slice_ds.visible_aps()
    if not universe:
        return Err(StageError("select", EmptySliceError(cfg.train_device, cfg.train_ci)))
    aligned = realign(ds, universe)
    logger.info("AP universe: %d of %d APs", len(universe), len(ds.ap_universe))

    match split(aligned.select(cfg.train_device, cfg.train_ci), cfg.split):
        case Err(error):
            return Err(StageError("split", error))
        case Ok((train, test)):
            pass

    match _normalized(train, "normalize"):
        case Err() as e:
            return e
        case Ok(train_norm):
            pass

    return Ok(
        Prepared(
            dataset=aligned,
            train_device=cfg.train_device,
            train_ci=cfg.train_ci,
            train=train,
            test=test,
            train_norm=train_norm,
            split_spec=cfg.split,
        )
    )


@dataclass(frozen=True, eq=False)
class Queries:
    """Normalized fingerprints of one evaluation cell with true class labels."""

    device_id: str
    ci: int
    values: np.ndarray
    labels: np.ndarray


def held_out(prep: Prepared, ci: int) -> Result[FingerprintDataset, StageError]:
    """Test part of the training device's slice in ``ci``.

    Only the test draw is taken, so it matches the test part of any split
    with the same seed and ``test_per_rp``, whatever its ``train_per_rp``.
    """
    if ci == prep.train_ci:
        return Ok(prep.test)
    match require_slice(prep.dataset, prep.train_device, ci):
        case Err(error):
            return Err(StageError("evaluate", error))
        case Ok(slice_ds):
            pass
    match split(slice_ds, replace(prep.split_spec, train_per_rp=0)):
        case Err(error):
            return Err(StageError("evaluate", error))
        case Ok((_, test)):
            return Ok(test)


def cell_queries(prep: Prepared, device_id: str, ci: int) -> Result[Queries, StageError]:
    """Training-device cells use their held-out test split; other cells use every fingerprint.

    The queries of a training-device cell never overlap what ``refit_slice``
    returns for the same CI.
    """
    if device_id == prep.train_device:
        match held_out(prep, ci):
            case Err() as e:
                return e
            case Ok(source):
                pass
    else:
        source = prep.dataset.select(device_id, ci)
    if not source.records:
        return Err(StageError("evaluate", EmptySliceError(device_id, ci)))
    match _normalized(source, "evaluate"):
        case Err() as e:
            return e
        case Ok(norm):
            return Ok(Queries(device_id, ci, norm.values, norm.labels))


def refit_slice(
    prep: Prepared, ci: int, spec: SplitSpec
) -> Result[NormalizedDataset, StageError]:
    """Training part of the training device's slice in ``ci`` (what LT-KNN refits on)."""
    if ci == prep.train_ci:
        return Ok(prep.train_norm)
    match require_slice(prep.dataset, prep.train_device, ci):
        case Err(_):
            return Err(StageError("ltknn", MissingCIError(ci)))
        case Ok(slice_ds):
            pass
    match split(slice_ds, spec):
        case Err(error):
            return Err(StageError("ltknn", error))
        case Ok((train, _)):
            return _normalized(train, "ltknn")


def with_samples(spec: SplitSpec, samples_per_rp: int) -> SplitSpec:
    """Same seed and test count, ``samples_per_rp`` training fingerprints per RP."""
    return replace(spec, train_per_rp=samples_per_rp)
