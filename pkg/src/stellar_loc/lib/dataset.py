"""Fingerprint normalization, AP-universe alignment and train/test splitting.

RSS lives in [-100, 0] dBm with -100 meaning "AP not seen". Normalization is
the affine map v -> (v + 100) / 100 onto [0, 1]. Ingestion rejects values out
of range (see ``storage.csvfile``); the trusted internal paths here clamp.
"""

import math
from collections.abc import Iterable, Mapping

import numpy as np

from stellar_loc.lib import rng
from stellar_loc.lib.errors import (
    EmptySliceError,
    InsufficientFingerprintsError,
    NonFiniteValueError,
)
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import (
    RSS_CEIL_DBM,
    RSS_FLOOR_DBM,
    Fingerprint,
    FingerprintDataset,
    NormalizedDataset,
    NormalizedFingerprint,
    SplitSpec,
)


def clamp_dbm(value: float) -> float:
    return min(max(value, RSS_FLOOR_DBM), RSS_CEIL_DBM)


def normalize(f: Fingerprint) -> Result[NormalizedFingerprint, NonFiniteValueError]:
    """Map a fingerprint onto [0, 1]; out-of-range dBm is clamped first."""
    values = []
    for i, v in enumerate(f.ap_values):
        if not math.isfinite(v):
            return Err(NonFiniteValueError(i, v))
        values.append((clamp_dbm(v) + 100.0) / 100.0)
    return Ok(NormalizedFingerprint(tuple(values), f.rp_id, f.device_id, f.ci))


def denormalize(nf: NormalizedFingerprint) -> Fingerprint:
    """Inverse of ``normalize`` on in-range data."""
    return Fingerprint(tuple(v * 100.0 - 100.0 for v in nf.values), nf.rp_id, nf.device_id, nf.ci)


def normalize_matrix(m: np.ndarray) -> np.ndarray:
    """Vectorized ``normalize`` for an N x M dBm matrix (clamping, no checks)."""
    return (np.clip(m, RSS_FLOOR_DBM, RSS_CEIL_DBM) + 100.0) / 100.0


def normalize_dataset(ds: FingerprintDataset) -> Result[NormalizedDataset, NonFiniteValueError]:
    """Normalize every record into a matrix with class labels over ``ds.rps``."""
    m = ds.matrix
    bad = np.argwhere(~np.isfinite(m))
    if bad.size:
        row, col = (int(v) for v in bad[0])
        return Err(NonFiniteValueError(col, float(m[row, col])))

    values = normalize_matrix(m)
    values.setflags(write=False)
    labels = np.array([ds.rp_index[r.rp_id] for r in ds.records], dtype=np.int64)
    labels.setflags(write=False)
    return Ok(
        NormalizedDataset(
            values=values,
            labels=labels,
            rps=ds.rps,
            ap_universe=ds.ap_universe,
            devices=tuple(r.device_id for r in ds.records),
            cis=tuple(r.ci for r in ds.records),
        )
    )


def align(
    scan: Mapping[str, float],
    universe: tuple[str, ...],
    *,
    rp_id: str = "",
    device_id: str = "",
    ci: int = 0,
) -> tuple[Fingerprint, int]:
    """Order a raw AP -> dBm scan by ``universe``.

    APs missing from the scan read -100; APs outside the universe are dropped.
    Returns the fingerprint and the number of dropped APs.
    """
    values = tuple(float(scan.get(ap, RSS_FLOOR_DBM)) for ap in universe)
    known = set(universe)
    dropped = sum(1 for ap in scan if ap not in known)
    return Fingerprint(values, rp_id, device_id, ci), dropped


def realign(ds: FingerprintDataset, universe: tuple[str, ...]) -> FingerprintDataset:
    """Re-express every record of ``ds`` over a new AP universe."""
    records = tuple(
        align(
            dict(zip(ds.ap_universe, r.ap_values)),
            universe,
            rp_id=r.rp_id,
            device_id=r.device_id,
            ci=r.ci,
        )[0]
        for r in ds.records
    )
    return FingerprintDataset(ds.building_id, universe, ds.rps, records)


def merge(datasets: Iterable[FingerprintDataset]) -> FingerprintDataset:
    """Concatenate datasets that share building, universe and RPs."""
    items = list(datasets)
    if not items:
        raise ValueError("merge needs at least one dataset")
    first = items[0]
    for other in items[1:]:
        if other.ap_universe != first.ap_universe or other.rps != first.rps:
            raise ValueError("merge requires identical AP universes and RPs")
    records = tuple(r for ds in items for r in ds.records)
    return first.with_records(records)


def split(
    ds: FingerprintDataset, spec: SplitSpec
) -> Result[tuple[FingerprintDataset, FingerprintDataset], InsufficientFingerprintsError]:
    """Per-RP train/test partition.

    For each RP the test fingerprints are drawn uniformly without replacement
    from a stream keyed by (seed, rp_id); the next ``train_per_rp`` of the same
    permutation form the training part. Extra fingerprints are left out.
    Record order inside each part follows the original dataset order.
    """
    by_rp: dict[str, list[int]] = {rp.rp_id: [] for rp in ds.rps}
    for i, r in enumerate(ds.records):
        by_rp[r.rp_id].append(i)

    needed = spec.train_per_rp + spec.test_per_rp
    train_idx: list[int] = []
    test_idx: list[int] = []
    for rp in ds.rps:
        idx = by_rp[rp.rp_id]
        if len(idx) < needed:
            return Err(InsufficientFingerprintsError(rp.rp_id, needed, len(idx)))
        perm = rng.stream(spec.seed, "split", rp.rp_id).permutation(len(idx))
        test_idx.extend(idx[j] for j in perm[: spec.test_per_rp])
        train_idx.extend(idx[j] for j in perm[spec.test_per_rp : needed])

    train = ds.with_records(tuple(ds.records[i] for i in sorted(train_idx)))
    test = ds.with_records(tuple(ds.records[i] for i in sorted(test_idx)))
    return Ok((train, test))


def require_slice(
    ds: FingerprintDataset, device_id: str | None, ci: int | None
) -> Result[FingerprintDataset, EmptySliceError]:
    """``ds.select`` that fails instead of returning an empty dataset."""
    sliced = ds.select(device_id, ci)
    if not sliced.records:
        return Err(EmptySliceError(device_id, ci))
    return Ok(sliced)
