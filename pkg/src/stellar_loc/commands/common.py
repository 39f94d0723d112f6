"""Shared CLI utilities.

Common options, config loading, error handling, output formatting.
"""

import json
import sys
from collections.abc import Callable
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, ParamSpec, TypeVar

import click

from stellar_loc.lib.config import apply_overrides, load_config
from stellar_loc.lib.errors import (
    ConfigLoadError,
    CsvFormatError,
    CsvRangeError,
    CsvSchemaError,
    EmptySliceError,
    FileWriteError,
    InsufficientFingerprintsError,
    InvalidConfigError,
    LengthMismatchError,
    MissingCIError,
    ModelFileError,
    NoNegativeCandidateError,
    NonFiniteActivationError,
    NonFiniteFeatureError,
    NonFiniteLossError,
    NonFiniteValueError,
    RecalibrationError,
    ReportIncompleteError,
    ReportLoadError,
    ShapeMismatchError,
    SingleClassError,
    StageError,
    TooFewReferencePointsError,
    UnknownConfigKeyError,
    UnknownReferencePointError,
)
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import EvalReport, ExperimentConfig
from stellar_loc.workflows import emit_plots, write_report

# Type variables for decorators
P = ParamSpec("P")
T = TypeVar("T")

MAX_SEED = 2**64 - 1


# Common CLI options as decorators
def config_option(fn: Callable[P, T]) -> Callable[P, T]:
    """Add --config/-c option."""
    return click.option(
        "--config",
        "-c",
        "config_path",
        type=click.Path(dir_okay=False, path_type=Path),
        default=None,
        help="Experiment config (JSON or YAML); defaults apply when omitted",
    )(fn)


def seed_option(fn: Callable[P, T]) -> Callable[P, T]:
    """Add --seed option."""
    return click.option(
        "--seed",
        type=click.IntRange(0, MAX_SEED),
        default=None,
        help="Override the config seed (also reseeds split, miner and model)",
    )(fn)


def out_option(fn: Callable[P, T]) -> Callable[P, T]:
    """Add --out/-o option."""
    return click.option(
        "--out",
        "-o",
        "out_dir",
        type=click.Path(file_okay=False, path_type=Path),
        default=None,
        help="Output directory (overrides output_dir)",
    )(fn)


def json_option(fn: Callable[P, T]) -> Callable[P, T]:
    """Add --json flag for JSON output."""
    return click.option(
        "--json",
        "as_json",
        is_flag=True,
        help="Output as JSON",
    )(fn)


def experiment_options(fn: Callable[P, T]) -> Callable[P, T]:
    """Add all experiment options (config, seed, out, json)."""
    fn = json_option(fn)
    fn = out_option(fn)
    fn = seed_option(fn)
    fn = config_option(fn)
    return fn


def make_config(
    config_path: Path | None, seed: int | None, out_dir: Path | None
) -> ExperimentConfig:
    """Load the config document and apply CLI overrides, exiting on error."""
    cfg = handle_result(load_config(config_path))
    return handle_result(
        apply_overrides(cfg, seed=seed, output_dir=str(out_dir) if out_dir is not None else None)
    )


def handle_result(
    result: Result[T, Any],
    success_message: str | None = None,
    as_json: bool = False,
) -> T:
    """Handle a Result, exiting on error.

    On Ok: returns the value, optionally prints success message (suppressed
    when as_json=True so JSON consumers aren't polluted by human output).
    On Err: writes the error envelope to stderr and exits with code 1.
    """
    match result:
        case Ok(value):
            if success_message and not as_json:
                click.secho(success_message, fg="green", bold=True, err=True)
            return value
        case Err(error):
            handle_error(error)
            sys.exit(1)  # Should never reach here, but for type checker


def handle_error(error: Any) -> None:
    """Print the structured error payload to stderr and exit 1."""
    click.echo(render_json_error(error), err=True)
    sys.exit(1)


def _format_error(error: Any) -> str:
    """Format error for display."""
    match error:
        case StageError(stage, inner):
            return f"Stage '{stage}' failed: {_format_error(inner)}"

        case RecalibrationError(before, after):
            return (
                f"Model parameters changed during evaluation "
                f"(hash {before[:12]} -> {after[:12]}); the run is invalid."
            )

        case NonFiniteValueError(ap_index, value):
            return f"Fingerprint value {value} at AP index {ap_index} is not finite."

        case LengthMismatchError(expected, actual):
            return f"Expected {expected} values, got {actual}."

        case InsufficientFingerprintsError(rp_id, required, available):
            return (
                f"RP '{rp_id}' has {available} fingerprints in the training slice, "
                f"{required} needed. Lower split.train_per_rp or split.test_per_rp."
            )

        case UnknownReferencePointError(rp_id):
            return f"Reference point '{rp_id}' is not part of the building."

        case EmptySliceError(device_id, ci):
            device = device_id if device_id is not None else "any device"
            at = f"CI {ci}" if ci is not None else "any CI"
            return f"No fingerprints for {device} at {at}."

        case CsvFormatError(path, line, reason):
            return f"{path}:{line}: {reason}"

        case CsvRangeError(path, line, column, value):
            return f"{path}:{line}: column '{column}' value {value} is outside [-100, 0] dBm."

        case CsvSchemaError(path, column, reason):
            return f"{path}: column '{column}': {reason}"

        case NoNegativeCandidateError(anchor_rp):
            return f"Every fingerprint sits at RP '{anchor_rp}'; no negative can be mined."

        case ShapeMismatchError(operand, expected, actual):
            return f"Shape mismatch for {operand}: expected {expected}, got {actual}."

        case NonFiniteActivationError(layer):
            return f"Non-finite activation in layer '{layer}'."

        case NonFiniteLossError(epoch, step):
            return (
                f"Training diverged at epoch {epoch}, step {step}. "
                f"Try a lower model.learning_rate."
            )

        case TooFewReferencePointsError(available):
            return f"Contrastive training needs at least 2 RPs, the training slice has {available}."

        case SingleClassError(label):
            return f"All training labels are class {label}; boosting needs at least 2 classes."

        case NonFiniteFeatureError(row, column):
            return f"Feature matrix cell ({row}, {column}) is not finite."

        case MissingCIError(ci):
            return f"CI {ci} is missing from the temporal sequence."

        case ConfigLoadError(path, reason):
            return f"Failed to load config '{path}': {reason}"

        case UnknownConfigKeyError(key):
            return f"Unknown config key '{key}'."

        case InvalidConfigError(field, reason):
            return f"Invalid config field '{field}': {reason}"

        case ModelFileError(path, reason):
            return f"Model file '{path}': {reason}"

        case FileWriteError(path, reason):
            return f"Failed to write '{path}': {reason}"

        case ReportIncompleteError(section):
            return f"Report has no '{section}' data to plot."

        case ReportLoadError(path, reason):
            return f"Failed to read report '{path}': {reason}"

        case _:
            return str(error)


# =============================================================================
# JSON output schema
#
#   Success (stdout, --json only):
#     { "schema_version": "v1", ...command-specific fields... }
#
#   Error (stderr, always, exit code 1):
#     { "schema_version": "v1",
#       "error": { "type": "<DataclassName>", "message": str, "fields": {...} } }
#
# Additive changes are safe under v1. Removing or renaming a field requires
# bumping the schema_version.
# =============================================================================

JSON_SCHEMA_VERSION = "v1"


def render_json(payload: dict[str, Any]) -> str:
    """Render a command's success payload with the versioned envelope."""
    envelope: dict[str, Any] = {"schema_version": JSON_SCHEMA_VERSION}
    envelope.update(_to_serializable(payload))
    return json.dumps(envelope, indent=2)


def render_json_error(error: Any) -> str:
    """Render an error as a structured JSON payload.

    error.type is the dataclass name, error.message matches ``_format_error``
    and error.fields carries the dataclass attributes.
    """
    if is_dataclass(error) and not isinstance(error, type):
        fields = _to_serializable(asdict(error))
    else:
        fields = {}

    payload: dict[str, Any] = {
        "schema_version": JSON_SCHEMA_VERSION,
        "error": {
            "type": type(error).__name__,
            "message": _format_error(error),
            "fields": fields,
        },
    }
    return json.dumps(payload, indent=2)


def _to_serializable(obj: Any) -> Any:
    """Convert object to JSON-serializable form."""
    if obj is None:
        return None
    if isinstance(obj, (str, int, float, bool)):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {k: _to_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_serializable(v) for v in obj]
    if is_dataclass(obj) and not isinstance(obj, type):
        return _to_serializable(asdict(obj))
    return str(obj)


def echo_key_value(key: str, value: Any, indent: int = 0, err: bool = False) -> None:
    """Print a key-value pair with optional indentation."""
    prefix = "  " * indent
    click.echo(f"{prefix}{key}: {value}", err=err)


def echo_section(title: str) -> None:
    """Print a section header."""
    click.echo()
    click.secho(title, bold=True)
    click.echo("-" * len(title))


def finish_report(report: EvalReport, out_dir: Path, command: str, as_json: bool) -> None:
    """Write the report, its cell table and its plot data, then summarize."""
    paths = handle_result(write_report(report, out_dir, command))
    paths += handle_result(emit_plots(report, out_dir))

    if as_json:
        click.echo(
            render_json(
                {
                    "command": command,
                    "seed": report.metadata.seed,
                    "config_hash": report.metadata.config_hash,
                    "cells": len(report.cells),
                    "files": [str(p) for p in paths],
                }
            )
        )
        return

    click.secho(f"{command}: {len(report.cells)} cells", fg="green", bold=True, err=True)
    for summary in report.per_ci:
        echo_key_value(f"{summary.arm} CI {summary.ci}", f"{summary.mean_error_m:.3f} m", indent=1)
    for imp in report.improvements:
        echo_key_value(
            f"vs {imp.arm}",
            f"{imp.improvement_pct:+.1f}% (CI {imp.extended_ci}: "
            f"{imp.extended_improvement_pct:+.1f}%)",
            indent=1,
        )
    echo_section("Files")
    for path in paths:
        click.echo(f"  {path}")
