"""Counter-based random streams.

Every random draw in the package comes from ``stream(seed, *keys)``: a Philox
generator keyed by the run seed plus a path of labels (device, CI, epoch,
anchor index, ...). Independent slices therefore get independent streams, and
the same labels always give the same numbers on any platform, regardless of
the order in which slices are processed.
"""

import hashlib

import numpy as np


def _word(key: int | str) -> int:
    if isinstance(key, str):
        return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:4], "little")
    if key < 0:
        raise ValueError(f"stream keys must be non-negative, got {key}")
    return key


def stream(seed: int, *keys: int | str) -> np.random.Generator:
    """Philox generator for the (seed, *keys) path."""
    entropy = [_word(seed), *(_word(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
