"""Tests for lib/dataset.py - normalization, alignment and splitting."""

import math

import pytest

from stellar_loc.lib.dataset import (
    align,
    denormalize,
    merge,
    normalize,
    normalize_dataset,
    realign,
    require_slice,
    split,
)
from stellar_loc.lib.errors import (
    EmptySliceError,
    InsufficientFingerprintsError,
    NonFiniteValueError,
)
from stellar_loc.lib.result import Err, unwrap
from stellar_loc.models import Fingerprint, FingerprintDataset, SplitSpec
from tests.conftest import MACS, hand_dataset


def _fp(*values: float) -> Fingerprint:
    return Fingerprint(tuple(values), "rp-0", "dev", 0)


class TestNormalize:
    def test_endpoints(self) -> None:
        nf = unwrap(normalize(_fp(-100.0, 0.0, -50.0)))
        assert nf.values == (0.0, 1.0, 0.5)

    def test_keeps_provenance(self) -> None:
        nf = unwrap(normalize(Fingerprint((-60.0,), "rp-7", "dev-x", 4)))
        assert (nf.rp_id, nf.device_id, nf.ci) == ("rp-7", "dev-x", 4)

    def test_out_of_range_is_clamped(self) -> None:
        nf = unwrap(normalize(_fp(-130.0, 12.0)))
        assert nf.values == (0.0, 1.0)

    def test_nan_rejected(self) -> None:
        result = normalize(_fp(-40.0, math.nan))
        assert isinstance(result, Err)
        assert isinstance(result.error, NonFiniteValueError)
        assert result.error.ap_index == 1

    def test_infinity_rejected(self) -> None:
        assert isinstance(normalize(_fp(-math.inf)), Err)

    def test_denormalize_inverts(self) -> None:
        f = _fp(-100.0, -73.0, -41.0, 0.0)
        back = denormalize(unwrap(normalize(f)))
        assert back.ap_values == pytest.approx(f.ap_values, abs=1e-12)

    def test_empty_vector(self) -> None:
        assert unwrap(normalize(_fp())).values == ()


class TestNormalizeDataset:
    def test_matrix_and_labels(self) -> None:
        ds = hand_dataset(
            [
                ("d", 0, "rp-1", (-100.0, -50.0, 0.0, -100.0, -100.0, -100.0)),
                ("d", 0, "rp-0", (-20.0, -100.0, -100.0, -100.0, -100.0, -100.0)),
            ]
        )
        norm = unwrap(normalize_dataset(ds))
        assert norm.values.shape == (2, 6)
        assert norm.values[0, :3].tolist() == [0.0, 0.5, 1.0]
        assert norm.labels.tolist() == [1, 0]
        assert norm.devices == ("d", "d")

    def test_values_are_read_only(self) -> None:
        ds = hand_dataset([("d", 0, "rp-0", (-50.0,) * 6)])
        norm = unwrap(normalize_dataset(ds))
        with pytest.raises(ValueError):
            norm.values[0, 0] = 1.0


class TestAlign:
    def test_orders_by_universe_and_fills_missing(self) -> None:
        fp, dropped = align({"b": -40.0, "a": -60.0}, ("a", "b", "c"))
        assert fp.ap_values == (-60.0, -40.0, -100.0)
        assert dropped == 0

    def test_counts_unknown_aps(self) -> None:
        fp, dropped = align({"a": -60.0, "zz": -30.0, "yy": -20.0}, ("a",))
        assert fp.ap_values == (-60.0,)
        assert dropped == 2

    def test_empty_scan_is_all_invisible(self) -> None:
        fp, _ = align({}, ("a", "b"))
        assert fp.ap_values == (-100.0, -100.0)

    def test_realign_keeps_records(self) -> None:
        ds = hand_dataset([("d", 0, "rp-0", (-10.0, -20.0, -30.0, -40.0, -50.0, -60.0))])
        out = realign(ds, (MACS[2], "02:00:00:00:00:ff"))
        assert out.ap_universe == (MACS[2], "02:00:00:00:00:ff")
        assert out.records[0].ap_values == (-30.0, -100.0)
        assert out.records[0].rp_id == "rp-0"


class TestSelectAndMerge:
    def test_select_and_visible_aps(self) -> None:
        ds = hand_dataset(
            [
                ("a", 0, "rp-0", (-50.0, -100.0, -100.0, -100.0, -100.0, -100.0)),
                ("b", 0, "rp-0", (-100.0, -60.0, -100.0, -100.0, -100.0, -100.0)),
                ("a", 1, "rp-1", (-100.0, -100.0, -70.0, -100.0, -100.0, -100.0)),
            ]
        )
        assert ds.devices == ("a", "b")
        assert ds.cis == (0, 1)
        assert ds.select("a").visible_aps() == (MACS[0], MACS[2])
        assert ds.select(ci=0).visible_aps() == (MACS[0], MACS[1])
        assert len(ds.select("a", 1).records) == 1

    def test_require_slice_empty(self) -> None:
        ds = hand_dataset([("a", 0, "rp-0", (-50.0,) * 6)])
        assert require_slice(ds, "b", 0) == Err(EmptySliceError("b", 0))

    def test_merge_concatenates(self) -> None:
        a = hand_dataset([("a", 0, "rp-0", (-50.0,) * 6)])
        b = hand_dataset([("b", 0, "rp-1", (-60.0,) * 6)])
        assert [r.device_id for r in merge([a, b]).records] == ["a", "b"]

    def test_merge_rejects_other_universe(self) -> None:
        a = hand_dataset([("a", 0, "rp-0", (-50.0,) * 6)])
        b = FingerprintDataset("x", ("02:00:00:00:00:aa",), a.rps, ())
        with pytest.raises(ValueError):
            merge([a, b])


class TestSplit:
    @pytest.fixture
    def five_per_rp(self) -> FingerprintDataset:
        rows = [
            ("d", 0, f"rp-{r}", (-50.0 - k,) * 6)
            for r in range(3)
            for k in range(5)
        ]
        return hand_dataset(rows)

    def test_counts_per_rp(self, five_per_rp: FingerprintDataset) -> None:
        train, test = unwrap(split(five_per_rp, SplitSpec(train_per_rp=3, test_per_rp=1, seed=3)))
        for rp in ("rp-0", "rp-1", "rp-2"):
            assert sum(r.rp_id == rp for r in train.records) == 3
            assert sum(r.rp_id == rp for r in test.records) == 1

    def test_parts_are_disjoint(self, five_per_rp: FingerprintDataset) -> None:
        train, test = unwrap(split(five_per_rp, SplitSpec(3, 2, seed=3)))
        assert not set(train.records) & set(test.records)
        assert len(train.records) + len(test.records) == 15

    def test_deterministic_per_seed(self, five_per_rp: FingerprintDataset) -> None:
        first = unwrap(split(five_per_rp, SplitSpec(3, 1, seed=9)))
        second = unwrap(split(five_per_rp, SplitSpec(3, 1, seed=9)))
        assert first == second

    def test_seed_changes_partition(self, five_per_rp: FingerprintDataset) -> None:
        tests = {unwrap(split(five_per_rp, SplitSpec(1, 1, seed=s)))[1].records for s in range(8)}
        assert len(tests) > 1

    def test_insufficient(self, five_per_rp: FingerprintDataset) -> None:
        result = split(five_per_rp, SplitSpec(train_per_rp=5, test_per_rp=1))
        assert result == Err(InsufficientFingerprintsError("rp-0", 6, 5))

    def test_exact_fit_uses_every_record(self, five_per_rp: FingerprintDataset) -> None:
        train, test = unwrap(split(five_per_rp, SplitSpec(4, 1)))
        assert len(train.records) == 12
        assert len(test.records) == 3
