"""Scaled dot-product attention: softmax(Q K^T / sqrt(d_k)) V."""

import numpy as np

from stellar_loc.lib.errors import InvalidConfigError, ShapeMismatchError
from stellar_loc.lib.result import Err, Ok, Result


def softmax_rows(scores: np.ndarray) -> np.ndarray:
    """Softmax over the last axis, shifted by the row max for stability."""
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def attention(
    Q: np.ndarray, K: np.ndarray, V: np.ndarray, d_k: float
) -> Result[tuple[np.ndarray, np.ndarray], ShapeMismatchError | InvalidConfigError]:
    """Attend queries (B x D) over keys (N x D) and values (N x R).

    Returns ``(output, weights)``: output is B x R, weights is B x N with
    non-negative rows summing to 1.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    K = np.atleast_2d(np.asarray(K, dtype=np.float64))
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if d_k <= 0:
        return Err(InvalidConfigError("d_k", "must be positive"))
    if K.shape[1] != Q.shape[1]:
        return Err(ShapeMismatchError("K", (K.shape[0], Q.shape[1]), K.shape))
    if V.shape[0] != K.shape[0]:
        return Err(ShapeMismatchError("V", (K.shape[0], V.shape[1]), V.shape))

    weights = softmax_rows(Q @ K.T / np.sqrt(d_k))
    return Ok((weights @ V, weights))
