"""Tests for lib/triplets.py - positive construction and hard-negative mining."""

import numpy as np
import pytest

from stellar_loc.lib.errors import LengthMismatchError, NoNegativeCandidateError
from stellar_loc.lib.result import Err, Ok, unwrap
from stellar_loc.lib.triplets import (
    TripletMiner,
    dropout_count,
    euclidean,
    make_positive,
    mine_epoch,
    select_negative,
)
from stellar_loc.models import DropoutTarget, MinerConfig, NormalizedDataset, ReferencePoint

RPS = tuple(ReferencePoint(f"rp-{i}", float(i), 0.0) for i in range(3))


def _db(values: list[list[float]], labels: list[int]) -> NormalizedDataset:
    n, m = len(values), len(values[0])
    return NormalizedDataset(
        values=np.array(values, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        rps=RPS,
        ap_universe=tuple(f"ap-{j}" for j in range(m)),
        devices=("d",) * n,
        cis=(0,) * n,
    )


def _flat_db() -> NormalizedDataset:
    """Six rows of 0.5s over ten APs, two per RP."""
    return _db([[0.5 + 0.01 * i] * 10 for i in range(6)], [0, 0, 1, 1, 2, 2])


@pytest.mark.parametrize(
    ("d_fraction", "num_aps", "expected"),
    [
        (0.6, 10, 6),
        (0.25, 10, 3),
        (0.05, 10, 1),
        (0.0, 10, 0),
        (1.0, 7, 7),
        (0.3, 520, 156),
    ],
)
def test_dropout_count(d_fraction: float, num_aps: int, expected: int) -> None:
    assert dropout_count(d_fraction, num_aps) == expected


class TestMakePositive:
    def test_zeroes_exactly_round_d_m(self, gen: np.random.Generator) -> None:
        anchor = np.linspace(0.1, 1.0, 10)
        positive = make_positive(anchor, 0.4, gen)
        zeroed = positive == 0.0
        assert int(zeroed.sum()) == 4
        assert np.array_equal(positive[~zeroed], anchor[~zeroed])

    def test_leaves_anchor_untouched(self, gen: np.random.Generator) -> None:
        anchor = np.full(5, 0.7)
        make_positive(anchor, 1.0, gen)
        assert (anchor == 0.7).all()

    def test_zero_fraction_is_a_copy(self, gen: np.random.Generator) -> None:
        anchor = np.full(5, 0.7)
        assert np.array_equal(make_positive(anchor, 0.0, gen), anchor)


class TestEuclidean:
    def test_three_four_five(self) -> None:
        assert euclidean(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == Ok(5.0)

    def test_length_mismatch(self) -> None:
        result = euclidean(np.zeros(3), np.zeros(2))
        assert result == Err(LengthMismatchError(3, 2))


class TestSelectNegative:
    def test_nearest_other_rp(self) -> None:
        db = _db([[0.0, 0.0], [0.1, 0.0], [0.9, 0.0], [0.2, 0.0]], [0, 0, 1, 2])
        # Row 1 is closer but shares the anchor's RP.
        assert select_negative(np.array([0.0, 0.0]), 0, db) == Ok(3)

    def test_tie_goes_to_lowest_rp(self) -> None:
        db = _db([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]], [0, 2, 1])
        assert select_negative(np.array([0.0, 0.0]), 0, db) == Ok(2)

    def test_tie_within_rp_goes_to_lowest_row(self) -> None:
        db = _db([[0.0, 0.0], [0.0, 0.5], [0.5, 0.0]], [0, 1, 1])
        assert select_negative(np.array([0.0, 0.0]), 0, db) == Ok(1)

    def test_single_rp_has_no_negative(self) -> None:
        db = _db([[0.0, 0.0], [0.5, 0.5]], [0, 0])
        result = select_negative(np.array([0.0, 0.0]), 0, db)
        assert result == Err(NoNegativeCandidateError("rp-0"))


class TestTripletMiner:
    def test_one_triplet_per_row(self) -> None:
        triplets = unwrap(mine_epoch(_flat_db(), MinerConfig(d_fraction=0.3, seed=2), 0))
        assert [t.anchor_index for t in triplets] == list(range(6))
        for t in triplets:
            assert t.anchor_rp != t.negative_rp
            assert int((t.positive == 0.0).sum()) == 3
            assert np.array_equal(t.negative, _flat_db().values[t.negative_index])

    def test_deterministic_across_instances(self) -> None:
        cfg = MinerConfig(d_fraction=0.5, seed=7)
        first = unwrap(TripletMiner(_flat_db(), cfg).epoch_arrays(3))
        second = unwrap(TripletMiner(_flat_db(), cfg).epoch_arrays(3))
        for a, b in zip(first, second):
            assert np.array_equal(a, b)

    def test_resamples_each_epoch(self) -> None:
        miner = TripletMiner(_flat_db(), MinerConfig(d_fraction=0.5, seed=7))
        _, pos0, _ = unwrap(miner.epoch_arrays(0))
        _, pos1, _ = unwrap(miner.epoch_arrays(1))
        assert not np.array_equal(pos0, pos1)

    def test_fixed_dropout_sets(self) -> None:
        cfg = MinerConfig(d_fraction=0.5, seed=7, resample_per_epoch=False)
        miner = TripletMiner(_flat_db(), cfg)
        _, pos0, _ = unwrap(miner.epoch_arrays(0))
        _, pos5, _ = unwrap(miner.epoch_arrays(5))
        assert np.array_equal(pos0, pos5)

    def test_negative_dropout_target(self) -> None:
        cfg = MinerConfig(d_fraction=0.2, seed=1, dropout_target=DropoutTarget.NEGATIVE)
        anchors, positives, negatives = unwrap(TripletMiner(_flat_db(), cfg).epoch_arrays(0))
        assert np.array_equal(anchors, positives)
        assert ((negatives == 0.0).sum(axis=1) == 2).all()

    def test_negatives_are_cached(self) -> None:
        miner = TripletMiner(_flat_db(), MinerConfig())
        assert miner.negatives is miner.negatives

    def test_single_rp_database(self) -> None:
        db = _db([[0.1, 0.2], [0.3, 0.4]], [1, 1])
        assert mine_epoch(db, MinerConfig(), 0) == Err(NoNegativeCandidateError("rp-1"))


def _brute_negative(anchor: np.ndarray, anchor_label: int, db: NormalizedDataset) -> int:
    best: tuple[float, int, int] | None = None
    for row in range(len(db)):
        label = int(db.labels[row])
        if label == anchor_label:
            continue
        dist = sum((float(a) - float(v)) ** 2 for a, v in zip(anchor, db.values[row]))
        key = (dist, label, row)
        if best is None or key < best:
            best = key
    assert best is not None
    return best[2]


class TestMiningOracle:
    def test_negative_matches_exhaustive_scan(self) -> None:
        gen = np.random.default_rng(11)
        for _ in range(100):
            num_rps = int(gen.integers(2, 13))
            num_aps = int(gen.integers(1, 21))
            labels = np.concatenate([np.arange(num_rps), gen.integers(0, num_rps, size=8)])
            # Small integer grid values keep distances exact and produce ties.
            values = gen.integers(0, 4, size=(labels.size, num_aps)).astype(np.float64) / 4.0
            db = NormalizedDataset(
                values=values,
                labels=labels,
                rps=tuple(ReferencePoint(f"rp-{i}", float(i), 0.0) for i in range(num_rps)),
                ap_universe=tuple(f"ap-{j}" for j in range(num_aps)),
                devices=("d",) * labels.size,
                cis=(0,) * labels.size,
            )
            for row in range(labels.size):
                anchor, label = values[row], int(labels[row])
                expected = _brute_negative(anchor, label, db)
                assert select_negative(anchor, label, db) == Ok(expected)

    @pytest.mark.parametrize("d_fraction", [0.0, 0.3, 0.6, 1.0])
    def test_positive_zero_counts(self, d_fraction: float) -> None:
        gen = np.random.default_rng(12)
        for _ in range(100):
            num_aps = int(gen.integers(1, 21))
            anchor = gen.uniform(0.05, 1.0, size=num_aps)
            positive = make_positive(anchor, d_fraction, gen)
            assert int((positive == 0.0).sum()) == dropout_count(d_fraction, num_aps)
