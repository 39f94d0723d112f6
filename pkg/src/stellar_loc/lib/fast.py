"""FaSt: the fingerprint augmentation stack used on training anchors.

Steps, in order, on normalized fingerprints:

1. AP dropout - each entry dropped with probability p and refilled with
   |N(0, infill_sigma)| clipped to [0, 1]
2. random brightness - one shift u ~ U(-delta, +delta) added to every entry
3. random contrast - deviations from the row mean scaled by c ~ U(1-delta, 1+delta)
4. additive Gaussian noise N(0, gaussian_sigma) per entry

and a final clip to [0, 1]. Inference never augments.
"""

import numpy as np

from stellar_loc.models import FaStConfig


def apply_fast(
    x: np.ndarray,
    *,
    dropped: np.ndarray,
    infill: np.ndarray,
    brightness: np.ndarray | float,
    contrast: np.ndarray | float,
    noise: np.ndarray,
) -> np.ndarray:
    """Apply the stack with every random draw supplied by the caller.

    ``x`` is one fingerprint (M,) or a batch (B, M); ``brightness`` and
    ``contrast`` are scalars or one value per row.
    """
    x = np.asarray(x, dtype=np.float64)
    batch = np.atleast_2d(x)
    b = np.reshape(np.asarray(brightness, dtype=np.float64), (-1, 1))
    c = np.reshape(np.asarray(contrast, dtype=np.float64), (-1, 1))

    out = np.where(np.atleast_2d(dropped), np.clip(np.abs(np.atleast_2d(infill)), 0.0, 1.0), batch)
    out = out + b
    mean = out.mean(axis=1, keepdims=True)
    out = c * out + (1.0 - c) * mean
    out = np.clip(out + np.atleast_2d(noise), 0.0, 1.0)
    return out.reshape(x.shape)


def fast_augment(x: np.ndarray, cfg: FaStConfig, gen: np.random.Generator) -> np.ndarray:
    """Augment one fingerprint or a batch of fingerprints with fresh draws from ``gen``."""
    x = np.asarray(x, dtype=np.float64)
    batch = np.atleast_2d(x)
    rows, width = batch.shape
    return apply_fast(
        x,
        dropped=(gen.random((rows, width)) < cfg.ap_dropout_p).reshape(batch.shape),
        infill=gen.normal(0.0, cfg.infill_sigma, size=(rows, width)),
        brightness=gen.uniform(-cfg.brightness_delta, cfg.brightness_delta, size=rows),
        contrast=gen.uniform(1.0 - cfg.contrast_delta, 1.0 + cfg.contrast_delta, size=rows),
        noise=gen.normal(0.0, cfg.gaussian_sigma, size=(rows, width)),
    )
