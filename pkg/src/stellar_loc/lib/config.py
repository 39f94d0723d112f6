"""Experiment configuration documents.

A config file is one JSON (or YAML) mapping that mirrors ``ExperimentConfig``.
Missing keys take their declared defaults; unknown keys at any depth are
rejected with their dotted path. After parsing, field invariants are checked.
"""

import dataclasses
import hashlib
import types
from enum import Enum
from pathlib import Path
from typing import Any, get_args, get_origin, get_type_hints

import yaml

from stellar_loc.lib.errors import (
    ConfigError,
    ConfigLoadError,
    InvalidConfigError,
    UnknownConfigKeyError,
)
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import ExperimentConfig, SourceKind

SYNTHETIC_BUILDINGS = ("A", "B")


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _convert(tp: Any, value: Any, path: str) -> Result[Any, ConfigError]:
    """Typed value for ``tp`` built from a parsed document node."""
    origin = get_origin(tp)

    if origin is types.UnionType:
        if value is None:
            return Ok(None)
        args = [a for a in get_args(tp) if a is not type(None)]
        return _convert(args[0], value, path)

    if isinstance(tp, type) and issubclass(tp, Enum):
        try:
            return Ok(tp(value))
        except ValueError:
            allowed = ", ".join(str(m.value) for m in tp)
            return Err(InvalidConfigError(path, f"expected one of: {allowed}"))

    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            return Err(InvalidConfigError(path or "<root>", "expected a mapping"))
        hints = get_type_hints(tp)
        names = {f.name for f in dataclasses.fields(tp)}
        for key in value:
            if key not in names:
                return Err(UnknownConfigKeyError(_join(path, str(key))))
        kwargs = {}
        for key, node in value.items():
            match _convert(hints[key], node, _join(path, key)):
                case Err() as e:
                    return e
                case Ok(converted):
                    kwargs[key] = converted
        return Ok(tp(**kwargs))

    if origin is tuple:
        if not isinstance(value, list):
            return Err(InvalidConfigError(path, "expected a list"))
        (item_type, _) = get_args(tp)
        items = []
        for i, node in enumerate(value):
            match _convert(item_type, node, f"{path}[{i}]"):
                case Err() as e:
                    return e
                case Ok(converted):
                    items.append(converted)
        return Ok(tuple(items))

    if tp is bool:
        if not isinstance(value, bool):
            return Err(InvalidConfigError(path, "expected true or false"))
        return Ok(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            return Err(InvalidConfigError(path, "expected an integer"))
        return Ok(value)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, int | float):
            return Err(InvalidConfigError(path, "expected a number"))
        return Ok(float(value))
    if tp is str:
        if not isinstance(value, str):
            return Err(InvalidConfigError(path, "expected a string"))
        return Ok(value)
    return Ok(value)


def _checks(cfg: ExperimentConfig) -> list[tuple[bool, str, str]]:
    """(holds, field, reason) for every invariant."""
    m, f, g = cfg.model, cfg.model.fast, cfg.gbt
    probability = "must lie in [0, 1]"
    non_negative = "must be >= 0"
    return [
        (cfg.seed >= 0, "seed", non_negative),
        (
            cfg.source.kind is not SourceKind.CSV or bool(cfg.source.csv_path),
            "source.csv_path",
            "required when source.kind is csv",
        ),
        (
            cfg.source.kind is not SourceKind.SYNTHETIC
            or cfg.source.building in SYNTHETIC_BUILDINGS,
            "source.building",
            f"must be one of {', '.join(SYNTHETIC_BUILDINGS)}",
        ),
        (cfg.train_ci >= 0, "train_ci", non_negative),
        (all(ci >= 0 for ci in cfg.test_cis), "test_cis", "CIs must be >= 0"),
        (cfg.split.train_per_rp >= 1, "split.train_per_rp", "must be >= 1"),
        (cfg.split.test_per_rp >= 1, "split.test_per_rp", "must be >= 1"),
        (0.0 <= cfg.miner.d_fraction <= 1.0, "miner.d_fraction", probability),
        (m.num_heads >= 1, "model.num_heads", "must be >= 1"),
        (m.head_size >= 1, "model.head_size", "must be >= 1"),
        (m.embedding_dim >= 1, "model.embedding_dim", "must be >= 1"),
        (all(w >= 1 for w in m.dense_widths), "model.dense_widths", "widths must be >= 1"),
        (m.learning_rate > 0, "model.learning_rate", "must be > 0"),
        (m.epochs >= 0, "model.epochs", non_negative),
        (m.margin >= 0, "model.margin", non_negative),
        (m.batch_size >= 1, "model.batch_size", "must be >= 1"),
        (0.0 <= m.dense_dropout < 1.0, "model.dense_dropout", "must lie in [0, 1)"),
        (0.0 <= f.ap_dropout_p <= 1.0, "model.fast.ap_dropout_p", probability),
        (0.0 <= f.contrast_delta <= 1.0, "model.fast.contrast_delta", probability),
        (f.brightness_delta >= 0, "model.fast.brightness_delta", non_negative),
        (f.gaussian_sigma >= 0, "model.fast.gaussian_sigma", non_negative),
        (f.infill_sigma >= 0, "model.fast.infill_sigma", non_negative),
        (g.num_rounds >= 0, "gbt.num_rounds", non_negative),
        (g.learning_rate > 0, "gbt.learning_rate", "must be > 0"),
        (g.max_depth >= 0, "gbt.max_depth", non_negative),
        (g.reg_lambda >= 0, "gbt.reg_lambda", non_negative),
        (g.min_child_weight >= 0, "gbt.min_child_weight", non_negative),
        (g.min_split_gain >= 0, "gbt.min_split_gain", non_negative),
        (cfg.knn.k >= 1, "knn.k", "must be >= 1"),
        (bool(cfg.sweeps.d_grid), "sweeps.d_grid", "must not be empty"),
        (all(0.0 <= d <= 1.0 for d in cfg.sweeps.d_grid), "sweeps.d_grid", probability),
        (bool(cfg.sweeps.samples_grid), "sweeps.samples_grid", "must not be empty"),
        (all(s >= 1 for s in cfg.sweeps.samples_grid), "sweeps.samples_grid", "must be >= 1"),
        (
            cfg.ltknn_retrain_every is None or cfg.ltknn_retrain_every >= 1,
            "ltknn_retrain_every",
            "must be >= 1 or null",
        ),
        (cfg.matrix_ci >= 0, "matrix_ci", non_negative),
        (bool(cfg.output_dir), "output_dir", "must not be empty"),
    ]


def validate(cfg: ExperimentConfig) -> Result[ExperimentConfig, InvalidConfigError]:
    for holds, name, reason in _checks(cfg):
        if not holds:
            return Err(InvalidConfigError(name, reason))
    return Ok(cfg)


SEEDED_STAGES = ("split", "miner", "model")


def _inherit_seed(data: Any) -> Any:
    """Copy of ``data`` where a top-level seed fills every stage seed left unset."""
    if not isinstance(data, dict) or "seed" not in data:
        return data
    out = dict(data)
    for stage in SEEDED_STAGES:
        node = out.get(stage, {})
        if isinstance(node, dict) and "seed" not in node:
            out[stage] = {**node, "seed": data["seed"]}
    return out


def parse_config(data: Any) -> Result[ExperimentConfig, ConfigError]:
    """Build and validate a config from a parsed document (None means all defaults).

    A top-level ``seed`` also seeds the split, miner and model stages that do
    not name their own.
    """
    match _convert(ExperimentConfig, {} if data is None else _inherit_seed(data), ""):
        case Err() as e:
            return e
        case Ok(cfg):
            return validate(cfg)


def load_config(path: Path | None) -> Result[ExperimentConfig, ConfigError]:
    """Read a config document; no path gives the default config."""
    if path is None:
        return parse_config(None)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        return Err(ConfigLoadError(path, str(e)))
    except yaml.YAMLError as e:
        return Err(ConfigLoadError(path, f"not valid JSON/YAML: {e}"))
    return parse_config(data)


def apply_overrides(
    cfg: ExperimentConfig, *, seed: int | None = None, output_dir: str | None = None
) -> Result[ExperimentConfig, InvalidConfigError]:
    """CLI overrides. ``seed`` also replaces the split, miner and model seeds."""
    if seed is not None:
        cfg = dataclasses.replace(
            cfg,
            seed=seed,
            split=dataclasses.replace(cfg.split, seed=seed),
            miner=dataclasses.replace(cfg.miner, seed=seed),
            model=dataclasses.replace(cfg.model, seed=seed),
        )
    if output_dir is not None:
        cfg = dataclasses.replace(cfg, output_dir=output_dir)
    return validate(cfg)


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonical (sorted-key) JSON of ``cfg``."""
    return hashlib.sha256(cfg.canonical_json().encode("utf-8")).hexdigest()
