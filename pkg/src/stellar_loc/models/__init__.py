"""STELLAR data models.

Immutable data structures with JSON serialization. No storage coupling.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import StrEnum
from functools import cached_property
from typing import Any, Self

import numpy as np

RSS_FLOOR_DBM = -100.0
RSS_CEIL_DBM = 0.0

# =============================================================================
# Fingerprints
# =============================================================================


@dataclass(frozen=True)
class Fingerprint:
    """One RSS reading per AP at one RP, by one device, in one CI.

    ``ap_values`` are in dBm and align positionally with the owning dataset's
    AP universe; -100 marks an invisible AP.
    """

    ap_values: tuple[float, ...]
    rp_id: str
    device_id: str
    ci: int


@dataclass(frozen=True)
class NormalizedFingerprint:
    """Fingerprint mapped to [0, 1]; 0 is invisible/weakest, 1 strongest."""

    values: tuple[float, ...]
    rp_id: str
    device_id: str
    ci: int


@dataclass(frozen=True)
class ReferencePoint:
    """Surveyed location, coordinates in meters."""

    rp_id: str
    x: float
    y: float


@dataclass(frozen=True)
class FingerprintDataset:
    """All fingerprints of one building over an ordered AP universe."""

    building_id: str
    ap_universe: tuple[str, ...]
    rps: tuple[ReferencePoint, ...]
    records: tuple[Fingerprint, ...]

    @cached_property
    def rp_index(self) -> dict[str, int]:
        """rp_id -> position in ``rps`` (the class index used by classifiers)."""
        return {rp.rp_id: i for i, rp in enumerate(self.rps)}

    @cached_property
    def matrix(self) -> np.ndarray:
        """Read-only N x M matrix of dBm values."""
        m = np.array([r.ap_values for r in self.records], dtype=np.float64)
        m = m.reshape(len(self.records), len(self.ap_universe))
        m.setflags(write=False)
        return m

    @property
    def devices(self) -> tuple[str, ...]:
        """Device ids in first-seen order."""
        return tuple(dict.fromkeys(r.device_id for r in self.records))

    @property
    def cis(self) -> tuple[int, ...]:
        return tuple(sorted({r.ci for r in self.records}))

    def select(self, device_id: str | None = None, ci: int | None = None) -> FingerprintDataset:
        """Records matching the device and/or CI filter, same universe and RPs."""
        kept = tuple(
            r
            for r in self.records
            if (device_id is None or r.device_id == device_id) and (ci is None or r.ci == ci)
        )
        return FingerprintDataset(self.building_id, self.ap_universe, self.rps, kept)

    def visible_aps(self) -> tuple[str, ...]:
        """APs with at least one reading above the invisible sentinel."""
        if not self.records:
            return ()
        seen = (self.matrix > RSS_FLOOR_DBM).any(axis=0)
        return tuple(ap for ap, s in zip(self.ap_universe, seen) if s)

    def with_records(self, records: tuple[Fingerprint, ...]) -> FingerprintDataset:
        return FingerprintDataset(self.building_id, self.ap_universe, self.rps, records)


@dataclass(frozen=True, eq=False)
class NormalizedDataset:
    """Normalized fingerprints as a matrix, ready for mining and training.

    ``labels`` are class indices into ``rps``.
    """

    values: np.ndarray
    labels: np.ndarray
    rps: tuple[ReferencePoint, ...]
    ap_universe: tuple[str, ...]
    devices: tuple[str, ...]
    cis: tuple[int, ...]

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def num_aps(self) -> int:
        return int(self.values.shape[1])

    @property
    def num_classes(self) -> int:
        return len(self.rps)

    def rp_id(self, row: int) -> str:
        return self.rps[int(self.labels[row])].rp_id


@dataclass(frozen=True)
class SplitSpec:
    """Per-RP train/test fingerprint counts."""

    train_per_rp: int = 5
    test_per_rp: int = 1
    seed: int = 0


# =============================================================================
# Training Configuration
# =============================================================================


class DropoutTarget(StrEnum):
    """Which triplet member receives the D% AP dropout."""

    POSITIVE = "positive"
    NEGATIVE = "negative"


class LossMode(StrEnum):
    """Triplet loss form."""

    HINGE = "hinge"
    RAW = "raw"


@dataclass(frozen=True)
class MinerConfig:
    """Triplet mining parameters."""

    d_fraction: float = 0.6
    seed: int = 0
    resample_per_epoch: bool = True
    dropout_target: DropoutTarget = DropoutTarget.POSITIVE


@dataclass(frozen=True)
class FaStConfig:
    """Fingerprint augmentation stack, applied to training anchors only."""

    ap_dropout_p: float = 0.1
    contrast_delta: float = 0.1
    brightness_delta: float = 0.1
    gaussian_sigma: float = 0.12
    infill_sigma: float = 0.1


@dataclass(frozen=True)
class ModelConfig:
    """Siamese multi-head attention encoder and its trainer."""

    num_heads: int = 7
    head_size: int = 50
    dense_widths: tuple[int, ...] = (128, 64)
    embedding_dim: int = 64
    learning_rate: float = 1e-4
    epochs: int = 300
    margin: float = 0.2
    loss_mode: LossMode = LossMode.HINGE
    fast: FaStConfig = field(default_factory=FaStConfig)
    batch_size: int = 32
    dense_dropout: float = 0.0
    seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        return _from_dict(cls, data)


@dataclass(frozen=True)
class GbtParams:
    """Gradient-boosted tree settings."""

    num_rounds: int = 100
    learning_rate: float = 0.3
    max_depth: int = 7
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    min_split_gain: float = 1e-6

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        return _from_dict(cls, data)


@dataclass(frozen=True)
class KnnParams:
    k: int = 4


# =============================================================================
# Experiment Configuration
# =============================================================================


class SourceKind(StrEnum):
    SYNTHETIC = "synthetic"
    CSV = "csv"


@dataclass(frozen=True)
class DataSource:
    """Where fingerprints come from.

    ``building`` picks the synthetic benchmark building ("A" or "B");
    ``csv_path`` points at a dataset CSV when kind is csv.
    """

    kind: SourceKind = SourceKind.SYNTHETIC
    building: str = "A"
    csv_path: str | None = None


@dataclass(frozen=True)
class SweepConfig:
    d_grid: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    samples_grid: tuple[int, ...] = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: data, the training slice, test grid and all stage configs.

    Empty ``test_devices`` / ``test_cis`` mean every device / CI in the data.
    ``ltknn_retrain_every`` of None disables refitting (static KNN).
    """

    source: DataSource = field(default_factory=DataSource)
    train_device: str = "dev-a"
    train_ci: int = 0
    test_devices: tuple[str, ...] = ()
    test_cis: tuple[int, ...] = ()
    split: SplitSpec = field(default_factory=SplitSpec)
    miner: MinerConfig = field(default_factory=MinerConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    gbt: GbtParams = field(default_factory=GbtParams)
    knn: KnnParams = field(default_factory=KnnParams)
    sweeps: SweepConfig = field(default_factory=SweepConfig)
    ltknn_retrain_every: int | None = 3
    matrix_ci: int = 0
    output_dir: str = "out"
    seed: int = 42

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def canonical_json(self) -> str:
        """Sorted, compact JSON used for the provenance hash."""
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


# =============================================================================
# Reports
# =============================================================================


@dataclass(frozen=True)
class CellError:
    """Mean localization error of one arm on one (test device, CI) cell."""

    arm: str
    train_device: str
    test_device: str
    ci: int
    mean_error_m: float
    count: int


@dataclass(frozen=True)
class CiSummary:
    """Per-CI aggregate across test devices for one arm."""

    arm: str
    ci: int
    mean_error_m: float
    best_device: str
    best_error_m: float
    worst_device: str
    worst_error_m: float
    spread_m: float


@dataclass(frozen=True)
class DSweepRow:
    d_fraction: float
    mean_error_m: float
    min_error_m: float
    max_error_m: float


@dataclass(frozen=True)
class SamplesRow:
    samples_per_rp: int
    ci: int
    mean_error_m: float


@dataclass(frozen=True)
class Improvement:
    """How much lower STELLAR's error is than an arm, in percent of STELLAR's."""

    arm: str
    mean_error_m: float
    improvement_pct: float
    extended_ci: int
    extended_error_m: float
    extended_improvement_pct: float


@dataclass(frozen=True)
class RunMetadata:
    command: str
    seed: int
    config_hash: str
    version: str
    numpy_version: str
    parameter_count: int = 0
    parameter_hash: str = ""
    config: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class EvalReport:
    """Everything one CLI run measured. Sections a command does not fill stay empty."""

    metadata: RunMetadata
    cells: tuple[CellError, ...] = ()
    per_ci: tuple[CiSummary, ...] = ()
    d_sweep: tuple[DSweepRow, ...] = ()
    samples: tuple[SamplesRow, ...] = ()
    improvements: tuple[Improvement, ...] = ()

    @property
    def arms(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(c.arm for c in self.cells))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: str) -> Self:
        return _from_dict(cls, json.loads(data))


@dataclass(frozen=True)
class TrainReport:
    """What ``train`` measured: provenance, encoder loss per epoch, ensemble log-loss per round."""

    metadata: RunMetadata
    loss_history: tuple[float, ...] = ()
    gbt_training_loss: tuple[float, ...] = ()

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: str) -> Self:
        return _from_dict(cls, json.loads(data))


def _from_dict(cls: type, data: Any) -> Any:
    """Reconstruct typed dataclass from dict. Handles Enum, Optional, tuples, nested."""
    import types
    from dataclasses import fields, is_dataclass
    from enum import Enum
    from typing import get_args, get_origin, get_type_hints

    if data is None:
        return None

    origin = get_origin(cls)

    # Union (X | None)
    if origin is types.UnionType:
        args = [a for a in get_args(cls) if a is not type(None)]
        return _from_dict(args[0], data) if args else None

    if isinstance(cls, type) and issubclass(cls, Enum):
        return cls(data)

    if is_dataclass(cls):
        hints = get_type_hints(cls)
        kwargs = {}
        for f in fields(cls):
            if f.name in data:
                kwargs[f.name] = _from_dict(hints[f.name], data[f.name])
        return cls(**kwargs)

    if origin is dict:
        _, val_type = get_args(cls)
        return {k: _from_dict(val_type, v) for k, v in data.items()}

    if origin is list:
        (item_type,) = get_args(cls)
        return [_from_dict(item_type, v) for v in data]

    if origin is tuple:
        tuple_args = get_args(cls)
        if len(tuple_args) == 2 and tuple_args[1] is ...:
            return tuple(_from_dict(tuple_args[0], v) for v in data)
        return tuple(_from_dict(t, v) for t, v in zip(tuple_args, data))

    if cls is float and isinstance(data, int):
        return float(data)

    return data