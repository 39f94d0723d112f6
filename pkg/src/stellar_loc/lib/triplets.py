"""Offline triplet mining over a normalized training database.

Each training fingerprint is an anchor. Its positive is the same fingerprint
with ``round(D * M)`` APs forced to 0 (simulated AP loss), and its negative is
the fingerprint at another RP that sits closest to it in Euclidean distance.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from stellar_loc.lib import rng
from stellar_loc.lib.errors import LengthMismatchError, NoNegativeCandidateError
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import DropoutTarget, MinerConfig, NormalizedDataset


@dataclass(frozen=True, eq=False)
class Triplet:
    """Anchor, positive and negative vectors plus their provenance rows."""

    anchor: np.ndarray
    positive: np.ndarray
    negative: np.ndarray
    anchor_rp: str
    negative_rp: str
    anchor_index: int
    negative_index: int


def dropout_count(d_fraction: float, num_aps: int) -> int:
    """round(D * M), halves rounded up."""
    return math.floor(d_fraction * num_aps + 0.5)


def make_positive(anchor: np.ndarray, d_fraction: float, gen: np.random.Generator) -> np.ndarray:
    """Copy of ``anchor`` with exactly round(D * M) uniformly chosen entries set to 0."""
    out = np.array(anchor, dtype=np.float64, copy=True)
    count = dropout_count(d_fraction, out.shape[0])
    if count:
        out[gen.choice(out.shape[0], size=count, replace=False)] = 0.0
    return out


def euclidean(a: np.ndarray, b: np.ndarray) -> Result[float, LengthMismatchError]:
    """Square root of the summed squared elementwise differences."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        return Err(LengthMismatchError(a.shape[0], b.shape[0]))
    diff = a - b
    return Ok(float(np.sqrt(np.dot(diff, diff))))


def _sq_distances(anchor: np.ndarray, values: np.ndarray) -> np.ndarray:
    diff = values - np.asarray(anchor, dtype=np.float64)[None, :]
    return np.einsum("ij,ij->i", diff, diff)


def _nearest_other(dist: np.ndarray, labels: np.ndarray, anchor_label: int) -> int | None:
    """Index of the closest row whose label differs; ties go to (label, index)."""
    eligible = np.flatnonzero(labels != anchor_label)
    if eligible.size == 0:
        return None
    d = dist[eligible]
    tied = eligible[d == d.min()]
    order = np.lexsort((tied, labels[tied]))
    return int(tied[order[0]])


def select_negative(
    anchor: np.ndarray, anchor_label: int, db: NormalizedDataset
) -> Result[int, NoNegativeCandidateError]:
    """Row index of the nearest fingerprint at a different RP.

    Ties are broken by the lowest RP (class order) and then the lowest row.
    """
    match _nearest_other(_sq_distances(anchor, db.values), db.labels, anchor_label):
        case None:
            return Err(NoNegativeCandidateError(db.rps[anchor_label].rp_id))
        case index:
            return Ok(index)


class TripletMiner:
    """Mines one triplet per training fingerprint, caching the negatives.

    Negative distances do not change between epochs, so they are computed
    once. Dropout index sets come from a stream keyed by (seed, epoch, anchor);
    with ``resample_per_epoch`` off every epoch reuses epoch 0's sets.
    """

    def __init__(self, db: NormalizedDataset, cfg: MinerConfig) -> None:
        self.db = db
        self.cfg = cfg

    @cached_property
    def negatives(self) -> Result[np.ndarray, NoNegativeCandidateError]:
        out = np.empty(len(self.db), dtype=np.int64)
        for i in range(len(self.db)):
            match select_negative(self.db.values[i], int(self.db.labels[i]), self.db):
                case Err() as e:
                    return e
                case Ok(index):
                    out[i] = index
        return Ok(out)

    def _dropout_rows(self, rows: np.ndarray, epoch: int) -> np.ndarray:
        key = epoch if self.cfg.resample_per_epoch else 0
        out = np.array(rows, dtype=np.float64, copy=True)
        for i in range(out.shape[0]):
            gen = rng.stream(self.cfg.seed, "dropout", key, i)
            out[i] = make_positive(rows[i], self.cfg.d_fraction, gen)
        return out

    def epoch_arrays(
        self, epoch: int
    ) -> Result[tuple[np.ndarray, np.ndarray, np.ndarray], NoNegativeCandidateError]:
        """Stacked (anchors, positives, negatives), one row per training fingerprint."""
        match self.negatives:
            case Err() as e:
                return e
            case Ok(neg_idx):
                pass

        anchors = self.db.values
        negatives = anchors[neg_idx]
        if self.cfg.dropout_target is DropoutTarget.NEGATIVE:
            return Ok((anchors, anchors.copy(), self._dropout_rows(negatives, epoch)))
        return Ok((anchors, self._dropout_rows(anchors, epoch), negatives))

    def mine_epoch(self, epoch: int) -> Result[list[Triplet], NoNegativeCandidateError]:
        match self.epoch_arrays(epoch):
            case Err() as e:
                return e
            case Ok((anchors, positives, negatives)):
                pass
        neg_idx = self.negatives.value
        return Ok(
            [
                Triplet(
                    anchor=anchors[i],
                    positive=positives[i],
                    negative=negatives[i],
                    anchor_rp=self.db.rp_id(i),
                    negative_rp=self.db.rp_id(int(neg_idx[i])),
                    anchor_index=i,
                    negative_index=int(neg_idx[i]),
                )
                for i in range(len(self.db))
            ]
        )


def mine_epoch(
    db: NormalizedDataset, cfg: MinerConfig, epoch: int
) -> Result[list[Triplet], NoNegativeCandidateError]:
    """One-shot mining; use ``TripletMiner`` across epochs to keep the cache."""
    return TripletMiner(db, cfg).mine_epoch(epoch)
