"""Localization error in meters."""

import math

import numpy as np

from stellar_loc.lib.errors import UnknownReferencePointError
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import ReferencePoint


def localization_error(
    predicted_rp: str, true_rp: str, rps: tuple[ReferencePoint, ...]
) -> Result[float, UnknownReferencePointError]:
    """Euclidean distance between the two RPs' coordinates."""
    coords = {rp.rp_id: rp for rp in rps}
    for rp_id in (predicted_rp, true_rp):
        if rp_id not in coords:
            return Err(UnknownReferencePointError(rp_id))
    p, t = coords[predicted_rp], coords[true_rp]
    return Ok(math.hypot(p.x - t.x, p.y - t.y))


def rp_coordinates(rps: tuple[ReferencePoint, ...]) -> np.ndarray:
    """R x 2 coordinate table indexed by class."""
    return np.array([(rp.x, rp.y) for rp in rps], dtype=np.float64).reshape(len(rps), 2)


def label_errors(predicted: np.ndarray, true: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Per-sample error for class-index predictions."""
    diff = coords[np.asarray(predicted)] - coords[np.asarray(true)]
    return np.hypot(diff[:, 0], diff[:, 1])
