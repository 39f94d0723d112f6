"""Error types for the STELLAR localization pipeline.

All errors are frozen dataclasses - no exceptions in business logic.
Pattern match on these in the CLI layer to provide user-friendly messages.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any

# =============================================================================
# Dataset Errors
# =============================================================================


@dataclass(frozen=True, slots=True)
class NonFiniteValueError:
    """A fingerprint carries NaN or an infinity."""

    ap_index: int
    value: float


@dataclass(frozen=True, slots=True)
class LengthMismatchError:
    """Two vectors that must align have different lengths."""

    expected: int
    actual: int


@dataclass(frozen=True, slots=True)
class InsufficientFingerprintsError:
    """An RP has fewer fingerprints than the split needs."""

    rp_id: str
    required: int
    available: int


@dataclass(frozen=True, slots=True)
class UnknownReferencePointError:
    """An rp_id does not exist in the building."""

    rp_id: str


@dataclass(frozen=True, slots=True)
class EmptySliceError:
    """No fingerprints exist for a (device, CI) selection."""

    device_id: str | None
    ci: int | None


# =============================================================================
# CSV Errors
# =============================================================================


@dataclass(frozen=True, slots=True)
class CsvFormatError:
    """A row or header in a dataset CSV cannot be parsed."""

    path: Path
    line: int
    reason: str


@dataclass(frozen=True, slots=True)
class CsvRangeError:
    """An RSS cell lies outside [-100, 0] dBm."""

    path: Path
    line: int
    column: str
    value: float


@dataclass(frozen=True, slots=True)
class CsvSchemaError:
    """Header does not follow the dataset schema."""

    path: Path
    column: str
    reason: str


# =============================================================================
# Triplet / Model Errors
# =============================================================================


@dataclass(frozen=True, slots=True)
class NoNegativeCandidateError:
    """Every fingerprint in the database sits at the anchor's RP."""

    anchor_rp: str


@dataclass(frozen=True, slots=True)
class ShapeMismatchError:
    """Matrix operands are not conformable."""

    operand: str
    expected: tuple[int, ...]
    actual: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class NonFiniteActivationError:
    """A forward pass produced NaN or an infinity."""

    layer: str


@dataclass(frozen=True, slots=True)
class NonFiniteLossError:
    """Training diverged."""

    epoch: int
    step: int


@dataclass(frozen=True, slots=True)
class TooFewReferencePointsError:
    """Contrastive training needs at least two RPs."""

    available: int


# =============================================================================
# Classifier Errors
# =============================================================================


@dataclass(frozen=True, slots=True)
class SingleClassError:
    """Boosting needs at least two classes in the labels."""

    label: int


@dataclass(frozen=True, slots=True)
class NonFiniteFeatureError:
    """A feature matrix cell is NaN or infinite."""

    row: int
    column: int


@dataclass(frozen=True, slots=True)
class MissingCIError:
    """A CI in a temporal sequence is absent."""

    ci: int


# =============================================================================
# Configuration / File Errors
# =============================================================================


@dataclass(frozen=True, slots=True)
class ConfigLoadError:
    """Config document could not be read or parsed."""

    path: Path
    reason: str


@dataclass(frozen=True, slots=True)
class UnknownConfigKeyError:
    """Config document contains a key the schema does not declare."""

    key: str


@dataclass(frozen=True, slots=True)
class InvalidConfigError:
    """A config field violates its invariant."""

    field: str
    reason: str


@dataclass(frozen=True, slots=True)
class ModelFileError:
    """A model file could not be written or read back."""

    path: Path
    reason: str


@dataclass(frozen=True, slots=True)
class FileWriteError:
    """An output file could not be written."""

    path: Path
    reason: str


@dataclass(frozen=True, slots=True)
class ReportLoadError:
    """A saved report could not be read back."""

    path: Path
    reason: str


@dataclass(frozen=True, slots=True)
class ReportIncompleteError:
    """The report lacks the section a plot family needs."""

    section: str


# =============================================================================
# Pipeline Errors
# =============================================================================


@dataclass(frozen=True, slots=True)
class RecalibrationError:
    """Model parameters changed while evaluating test CIs."""

    before: str
    after: str


@dataclass(frozen=True, slots=True)
class StageError:
    """An experiment stage failed; wraps the stage's own error."""

    stage: str
    error: Any


# =============================================================================
# Type Aliases for Error Unions
# =============================================================================

type CsvError = CsvFormatError | CsvRangeError | CsvSchemaError
type ConfigError = ConfigLoadError | UnknownConfigKeyError | InvalidConfigError
type TrainError = (
    TooFewReferencePointsError
    | NoNegativeCandidateError
    | NonFiniteLossError
    | NonFiniteActivationError
)
type FitError = SingleClassError | NonFiniteFeatureError | ShapeMismatchError
