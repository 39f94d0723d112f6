"""Tests for lib/storage/modelfile.py - versioned model files."""

import json
from pathlib import Path

import numpy as np
import pytest

from stellar_loc.lib.dataset import normalize_dataset
from stellar_loc.lib.errors import ModelFileError
from stellar_loc.lib.gbt import BoostedEnsemble, gbt_fit
from stellar_loc.lib.result import Err, unwrap
from stellar_loc.lib.siamese import SiameseModel, parameter_hash, train
from stellar_loc.lib.storage.modelfile import (
    FORMAT,
    load_gbt,
    load_siamese,
    save_gbt,
    save_siamese,
    siamese_to_json,
)
from stellar_loc.models import FingerprintDataset, GbtParams, MinerConfig
from tests.conftest import tiny_model_config


@pytest.fixture
def encoder(tiny_world: FingerprintDataset) -> SiameseModel:
    db = unwrap(normalize_dataset(tiny_world.select("dev-a", 0)))
    return unwrap(train(db, MinerConfig(seed=1), tiny_model_config())).model


@pytest.fixture
def ensemble(gen: np.random.Generator) -> BoostedEnsemble:
    X = np.vstack([gen.normal(0.0, 1.0, (8, 3)), gen.normal(4.0, 1.0, (8, 3))])
    y = np.repeat([0, 1], 8)
    return unwrap(gbt_fit(X, y, GbtParams(num_rounds=4, max_depth=2), class_ids=("rp-0", "rp-1")))


def _rewrite(path: Path, **changes: object) -> None:
    data = json.loads(path.read_text())
    data.update(changes)
    path.write_text(json.dumps(data))


class TestSiameseFile:
    def test_round_trip_is_exact(self, tmp_path: Path, encoder: SiameseModel) -> None:
        path = unwrap(save_siamese(encoder, tmp_path / "encoder.json"))
        back = unwrap(load_siamese(path))
        assert parameter_hash(back) == parameter_hash(encoder)
        assert back.config == encoder.config
        assert back.ap_universe == encoder.ap_universe
        assert back.rps == encoder.rps
        for name, tensor in encoder.params.items():
            assert np.array_equal(back.params[name], tensor)

    def test_loaded_tensors_are_read_only(self, tmp_path: Path, encoder: SiameseModel) -> None:
        back = unwrap(load_siamese(unwrap(save_siamese(encoder, tmp_path / "e.json"))))
        with pytest.raises(ValueError):
            back.params["w_o"][0, 0] = 0.0

    def test_header(self, encoder: SiameseModel) -> None:
        data = json.loads(siamese_to_json(encoder))
        assert (data["format"], data["format_version"], data["kind"]) == (FORMAT, 1, "siamese")
        assert [t["name"] for t in data["tensors"]][-2:] == ["context.keys", "context.values"]

    def test_wrong_kind(self, tmp_path: Path, encoder: SiameseModel) -> None:
        path = unwrap(save_siamese(encoder, tmp_path / "e.json"))
        result = load_gbt(path)
        assert isinstance(result, Err)
        assert "expected a gbt model" in result.error.reason

    def test_future_version(self, tmp_path: Path, encoder: SiameseModel) -> None:
        path = unwrap(save_siamese(encoder, tmp_path / "e.json"))
        _rewrite(path, format_version=2)
        assert "unsupported format_version" in load_siamese(path).error.reason

    def test_foreign_json(self, tmp_path: Path) -> None:
        path = tmp_path / "other.json"
        path.write_text('{"format": "something-else"}')
        assert load_siamese(path) == Err(ModelFileError(path, f"not a {FORMAT} file"))

    def test_not_json(self, tmp_path: Path) -> None:
        path = tmp_path / "e.json"
        path.write_text("weights go here")
        assert isinstance(load_siamese(path).error, ModelFileError)

    def test_tensor_shape_mismatch(self, tmp_path: Path, encoder: SiameseModel) -> None:
        path = unwrap(save_siamese(encoder, tmp_path / "e.json"))
        data = json.loads(path.read_text())
        dense = next(t for t in data["tensors"] if t["name"] == "dense_0.w")
        dense["shape"] = list(reversed(dense["shape"]))
        path.write_text(json.dumps(data))
        assert "tensor dense_0.w has shape" in load_siamese(path).error.reason

    def test_missing_file(self, tmp_path: Path) -> None:
        path = tmp_path / "absent.json"
        assert load_siamese(path) == Err(ModelFileError(path, "file not found"))


class TestGbtFile:
    def test_round_trip_is_exact(self, tmp_path: Path, ensemble: BoostedEnsemble) -> None:
        path = unwrap(save_gbt(ensemble, tmp_path / "gbt.json"))
        assert unwrap(load_gbt(path)) == ensemble

    def test_malformed_trees(self, tmp_path: Path, ensemble: BoostedEnsemble) -> None:
        path = unwrap(save_gbt(ensemble, tmp_path / "gbt.json"))
        _rewrite(path, trees=[[{"feature": [0]}]])
        assert "malformed gbt model" in load_gbt(path).error.reason

    def test_sorted_keys(self, ensemble: BoostedEnsemble, tmp_path: Path) -> None:
        path = unwrap(save_gbt(ensemble, tmp_path / "gbt.json"))
        keys = list(json.loads(path.read_text()))
        assert keys == sorted(keys)
