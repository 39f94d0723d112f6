"""Shared pytest fixtures for stellar-loc tests."""

from pathlib import Path

import numpy as np
import pytest

from stellar_loc.lib.result import unwrap
from stellar_loc.lib.storage.csvfile import save_csv
from stellar_loc.lib.synthgen import (
    DeviceProfile,
    churn_schedule,
    generate,
    line_environment,
    merge_slices,
)
from stellar_loc.models import (
    DataSource,
    ExperimentConfig,
    Fingerprint,
    FingerprintDataset,
    GbtParams,
    KnnParams,
    MinerConfig,
    ModelConfig,
    ReferencePoint,
    SourceKind,
    SplitSpec,
    SweepConfig,
)

TINY_DEVICES = (
    DeviceProfile("dev-a", gain_offset=0.0, per_ap_jitter_sigma=0.5, dropout_bias=0.0),
    DeviceProfile("dev-b", gain_offset=-5.0, per_ap_jitter_sigma=1.0, dropout_bias=0.2),
)

# Six MAC-like AP ids for hand-built datasets.
MACS = tuple(f"02:00:00:00:00:{i:02x}" for i in range(6))


@pytest.fixture
def tiny_world() -> FingerprintDataset:
    """4 RPs, 6 APs, 2 devices, 3 CIs (half the APs off in CI 2), 4 readings per RP."""
    env = line_environment("tiny", num_rps=4, num_aps=6, seed=5, margin=2.0, half_width=3.0)
    schedule = churn_schedule(6, ((2, 0.0), (1, 0.5)), seed=5)
    return merge_slices(generate(env, TINY_DEVICES, schedule, 4, seed=5))


@pytest.fixture
def tiny_csv(tmp_path: Path, tiny_world: FingerprintDataset) -> Path:
    return unwrap(save_csv(tiny_world, tmp_path / "tiny.csv"))


def tiny_model_config(seed: int = 1) -> ModelConfig:
    return ModelConfig(
        num_heads=2,
        head_size=3,
        dense_widths=(8,),
        embedding_dim=4,
        learning_rate=1e-2,
        epochs=3,
        batch_size=8,
        seed=seed,
    )


@pytest.fixture
def tiny_config(tiny_csv: Path, tmp_path: Path) -> ExperimentConfig:
    """Small enough that a full train-and-evaluate run takes well under a second."""
    return ExperimentConfig(
        source=DataSource(kind=SourceKind.CSV, csv_path=str(tiny_csv)),
        train_device="dev-a",
        train_ci=0,
        split=SplitSpec(train_per_rp=3, test_per_rp=1, seed=1),
        miner=MinerConfig(d_fraction=0.3, seed=1),
        model=tiny_model_config(),
        gbt=GbtParams(num_rounds=3, max_depth=2),
        knn=KnnParams(k=3),
        sweeps=SweepConfig(d_grid=(0.2, 0.6), samples_grid=(1, 3)),
        ltknn_retrain_every=2,
        output_dir=str(tmp_path / "out"),
        seed=1,
    )


def hand_dataset(rows: list[tuple[str, int, str, tuple[float, ...]]]) -> FingerprintDataset:
    """Dataset over ``MACS`` with RPs rp-0..rp-2 one meter apart on the x axis.

    ``rows`` are (device, ci, rp_id, six dBm values).
    """
    rps = tuple(ReferencePoint(f"rp-{i}", float(i), 0.0) for i in range(3))
    records = tuple(Fingerprint(values, rp, device, ci) for device, ci, rp, values in rows)
    return FingerprintDataset("hand", MACS, rps, records)


@pytest.fixture
def gen() -> np.random.Generator:
    return np.random.default_rng(1234)
