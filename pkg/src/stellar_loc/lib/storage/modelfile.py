"""Versioned JSON model files for the encoder and the boosted ensemble.

Layout (keys sorted on write):

    {"format": "stellar-model", "format_version": 1, "kind": "siamese" | "gbt", ...}

Siamese files hold the model config, the AP universe, the RPs and every
tensor in declared order as ``{"name", "shape", "data"}`` with flat row-major
data. Floats are written in shortest round-trip form, so load(save(m)) is
exact.
"""

import json
from dataclasses import asdict
from pathlib import Path
from typing import Any

import numpy as np

from stellar_loc.lib.errors import ModelFileError
from stellar_loc.lib.gbt import BoostedEnsemble, RegressionTree
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.lib.siamese import SiameseModel, parameter_shapes
from stellar_loc.lib.storage import file
from stellar_loc.models import GbtParams, ModelConfig, ReferencePoint

FORMAT = "stellar-model"
FORMAT_VERSION = 1

_CONTEXT_KEYS = "context.keys"
_CONTEXT_VALUES = "context.values"


def _tensor(name: str, arr: np.ndarray) -> dict[str, Any]:
    return {"name": name, "shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}


def _dump(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def siamese_to_json(model: SiameseModel) -> str:
    tensors = [_tensor(name, p) for name, p in model.params.items()]
    tensors.append(_tensor(_CONTEXT_KEYS, model.keys))
    tensors.append(_tensor(_CONTEXT_VALUES, model.values))
    return _dump(
        {
            "format": FORMAT,
            "format_version": FORMAT_VERSION,
            "kind": "siamese",
            "config": model.config.to_dict(),
            "ap_universe": list(model.ap_universe),
            "rps": [asdict(rp) for rp in model.rps],
            "tensors": tensors,
        }
    )


def gbt_to_json(model: BoostedEnsemble) -> str:
    return _dump(
        {
            "format": FORMAT,
            "format_version": FORMAT_VERSION,
            "kind": "gbt",
            "params": model.params.to_dict(),
            "bias": list(model.bias),
            "class_ids": list(model.class_ids),
            "num_features": model.num_features,
            "training_loss": list(model.training_loss),
            "trees": [[asdict(tree) for tree in trees] for trees in model.trees],
        }
    )


def _header(path: Path, text: str, kind: str) -> Result[dict[str, Any], ModelFileError]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        return Err(ModelFileError(path, f"not JSON: {e}"))
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        return Err(ModelFileError(path, f"not a {FORMAT} file"))
    if data.get("format_version") != FORMAT_VERSION:
        return Err(
            ModelFileError(path, f"unsupported format_version {data.get('format_version')!r}")
        )
    if data.get("kind") != kind:
        return Err(ModelFileError(path, f"expected a {kind} model, found {data.get('kind')!r}"))
    return Ok(data)


def _read(path: Path) -> Result[str, ModelFileError]:
    try:
        text = file.read(path)
    except (OSError, UnicodeDecodeError) as e:
        return Err(ModelFileError(path, str(e)))
    if text is None:
        return Err(ModelFileError(path, "file not found"))
    return Ok(text)


def _frozen(data: list[float], shape: list[int]) -> np.ndarray:
    arr = np.array(data, dtype=np.float64).reshape(shape)
    arr.setflags(write=False)
    return arr


def siamese_from_json(path: Path, text: str) -> Result[SiameseModel, ModelFileError]:
    match _header(path, text, "siamese"):
        case Err() as e:
            return e
        case Ok(data):
            pass
    try:
        config = ModelConfig.from_dict(data["config"])
        tensors = {t["name"]: _frozen(t["data"], t["shape"]) for t in data["tensors"]}
        keys = tensors.pop(_CONTEXT_KEYS)
        values = tensors.pop(_CONTEXT_VALUES)
        rps = tuple(ReferencePoint(r["rp_id"], float(r["x"]), float(r["y"])) for r in data["rps"])
        ap_universe = tuple(data["ap_universe"])
    except (KeyError, TypeError, ValueError) as e:
        return Err(ModelFileError(path, f"malformed siamese model: {e}"))

    expected = parameter_shapes(config, keys.shape[1], values.shape[1])
    if list(tensors) != list(expected):
        return Err(ModelFileError(path, "tensor names do not match the model config"))
    for name, shape in expected.items():
        if tensors[name].shape != shape:
            return Err(ModelFileError(path, f"tensor {name} has shape {tensors[name].shape}"))
    if len(ap_universe) != keys.shape[1] or len(rps) != values.shape[1]:
        return Err(ModelFileError(path, "context does not match AP universe / RPs"))
    return Ok(SiameseModel(config, tensors, keys, values, ap_universe, rps))


def gbt_from_json(path: Path, text: str) -> Result[BoostedEnsemble, ModelFileError]:
    match _header(path, text, "gbt"):
        case Err() as e:
            return e
        case Ok(data):
            pass
    try:
        trees = tuple(
            tuple(
                RegressionTree(
                    feature=tuple(int(v) for v in t["feature"]),
                    threshold=tuple(float(v) for v in t["threshold"]),
                    left=tuple(int(v) for v in t["left"]),
                    right=tuple(int(v) for v in t["right"]),
                    value=tuple(float(v) for v in t["value"]),
                )
                for t in rnd
            )
            for rnd in data["trees"]
        )
        return Ok(
            BoostedEnsemble(
                bias=tuple(float(b) for b in data["bias"]),
                trees=trees,
                num_features=int(data["num_features"]),
                class_ids=tuple(data["class_ids"]),
                params=GbtParams.from_dict(data["params"]),
                training_loss=tuple(float(v) for v in data["training_loss"]),
            )
        )
    except (KeyError, TypeError, ValueError) as e:
        return Err(ModelFileError(path, f"malformed gbt model: {e}"))


def _save(path: Path, text: str) -> Result[Path, ModelFileError]:
    match file.write(path, text):
        case Err(error):
            return Err(ModelFileError(path, error.reason))
        case Ok(written):
            return Ok(written)


def save_siamese(model: SiameseModel, path: Path) -> Result[Path, ModelFileError]:
    return _save(path, siamese_to_json(model))


def save_gbt(model: BoostedEnsemble, path: Path) -> Result[Path, ModelFileError]:
    return _save(path, gbt_to_json(model))


def load_siamese(path: Path) -> Result[SiameseModel, ModelFileError]:
    match _read(path):
        case Err() as e:
            return e
        case Ok(text):
            return siamese_from_json(path, text)


def load_gbt(path: Path) -> Result[BoostedEnsemble, ModelFileError]:
    match _read(path):
        case Err() as e:
            return e
        case Ok(text):
            return gbt_from_json(path, text)
