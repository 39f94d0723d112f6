"""Siamese multi-head attention encoder with triplet-loss training.

One parameter set serves the anchor, positive and negative branches. A query
fingerprint q (1 x M) attends over the fixed training context:

    K = every training fingerprint (N x M)
    V = their one-hot RP labels (N x R)

Per head i: h_i = attention(q Wq_i, K Wk_i, V Wv_i, d_k). The heads are
concatenated, projected by Wo back to M, passed through the ReLU dense stack
and a linear embedding layer, then L2-normalized.

Gradients are written out by hand for exactly this architecture and checked
against central finite differences (see ``gradient_check``).
"""

import hashlib
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from stellar_loc.lib import rng
from stellar_loc.lib.attention import softmax_rows
from stellar_loc.lib.errors import (
    NonFiniteActivationError,
    NonFiniteLossError,
    ShapeMismatchError,
    TooFewReferencePointsError,
    TrainError,
)
from stellar_loc.lib.fast import fast_augment
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.lib.triplets import TripletMiner
from stellar_loc.models import (
    LossMode,
    MinerConfig,
    ModelConfig,
    NormalizedDataset,
    ReferencePoint,
)

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_NORM_FLOOR = 1e-12

type Params = dict[str, np.ndarray]


# =============================================================================
# Model
# =============================================================================


@dataclass(frozen=True, eq=False)
class SiameseModel:
    """Trained encoder: config, parameters in declared order, and the K/V context."""

    config: ModelConfig
    params: Params
    keys: np.ndarray
    values: np.ndarray
    ap_universe: tuple[str, ...]
    rps: tuple[ReferencePoint, ...]

    @property
    def num_aps(self) -> int:
        return int(self.keys.shape[1])

    @property
    def num_classes(self) -> int:
        return int(self.values.shape[1])


def parameter_shapes(
    cfg: ModelConfig, num_aps: int, num_classes: int
) -> dict[str, tuple[int, ...]]:
    """Name -> shape for every trainable tensor, in declared (serialization) order."""
    h, d = cfg.num_heads, cfg.head_size
    shapes: dict[str, tuple[int, ...]] = {
        "w_q": (h, num_aps, d),
        "w_k": (h, num_aps, d),
        "w_v": (h, num_classes, d),
        "w_o": (h * d, num_aps),
    }
    width = num_aps
    for i, out in enumerate(cfg.dense_widths):
        shapes[f"dense_{i}.w"] = (width, out)
        shapes[f"dense_{i}.b"] = (out,)
        width = out
    shapes["embed.w"] = (width, cfg.embedding_dim)
    shapes["embed.b"] = (cfg.embedding_dim,)
    return shapes


def init_params(
    cfg: ModelConfig, num_aps: int, num_classes: int, gen: np.random.Generator
) -> Params:
    """Glorot-uniform weights, zero biases."""
    params: Params = {}
    for name, shape in parameter_shapes(cfg, num_aps, num_classes).items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
            continue
        fan_in, fan_out = shape[-2], shape[-1]
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        params[name] = gen.uniform(-limit, limit, size=shape)
    return params


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def parameter_count(model: SiameseModel) -> int:
    return int(sum(p.size for p in model.params.values()))


def parameter_hash(model: SiameseModel) -> str:
    """SHA-256 over every parameter and the K/V context, in declared order."""
    h = hashlib.sha256()
    tensors = [
        *model.params.items(),
        ("context.keys", model.keys),
        ("context.values", model.values),
    ]
    for name, tensor in tensors:
        arr = np.ascontiguousarray(tensor, dtype=np.float64)
        h.update(f"{name}:{arr.shape}".encode())
        h.update(arr.tobytes())
    return h.hexdigest()


# =============================================================================
# Forward / backward
# =============================================================================


@dataclass
class _Cache:
    x: np.ndarray
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    attn: np.ndarray
    heads: np.ndarray
    layer_inputs: list[np.ndarray] = field(default_factory=list)
    pre: list[np.ndarray] = field(default_factory=list)
    masks: list[np.ndarray | None] = field(default_factory=list)
    last: np.ndarray | None = None
    emb: np.ndarray | None = None
    norm: np.ndarray | None = None
    out: np.ndarray | None = None


def _forward(
    params: Params,
    cfg: ModelConfig,
    keys: np.ndarray,
    values: np.ndarray,
    x: np.ndarray,
    masks: Sequence[np.ndarray | None] | None = None,
) -> tuple[np.ndarray, _Cache, str | None]:
    """Batched forward pass over rows of ``x`` (B x M).

    Returns the unit embeddings, the cache for ``_backward`` and the name of
    the first layer with a non-finite activation (None if all finite).
    """
    bad: str | None = None

    def check(name: str, arr: np.ndarray) -> None:
        nonlocal bad
        if bad is None and not np.isfinite(arr).all():
            bad = name

    q = np.einsum("bm,hmd->hbd", x, params["w_q"])
    k = np.einsum("nm,hmd->hnd", keys, params["w_k"])
    v = np.einsum("nr,hrd->hnd", values, params["w_v"])
    attn = softmax_rows(np.einsum("hbd,hnd->hbn", q, k) / math.sqrt(cfg.head_size))
    h = np.einsum("hbn,hnd->hbd", attn, v)
    heads = h.transpose(1, 0, 2).reshape(x.shape[0], -1)
    check("attention", heads)
    cache = _Cache(x=x, q=q, k=k, v=v, attn=attn, heads=heads)

    z = heads @ params["w_o"]
    check("output_projection", z)
    for i in range(len(cfg.dense_widths)):
        cache.layer_inputs.append(z)
        pre = z @ params[f"dense_{i}.w"] + params[f"dense_{i}.b"]
        cache.pre.append(pre)
        z = np.maximum(pre, 0.0)
        mask = masks[i] if masks is not None else None
        cache.masks.append(mask)
        if mask is not None:
            z = z * mask
        check(f"dense_{i}", z)

    cache.last = z
    emb = z @ params["embed.w"] + params["embed.b"]
    check("embedding", emb)
    norm = np.maximum(np.linalg.norm(emb, axis=1, keepdims=True), _NORM_FLOOR)
    out = emb / norm
    cache.emb, cache.norm, cache.out = emb, norm, out
    return out, cache, bad


def _backward(
    params: Params,
    cfg: ModelConfig,
    keys: np.ndarray,
    values: np.ndarray,
    cache: _Cache,
    grad_out: np.ndarray,
) -> Params:
    """Gradients of a scalar loss given dLoss/dEmbedding (B x E)."""
    assert cache.out is not None and cache.norm is not None and cache.last is not None
    grads: Params = {}

    y = cache.out
    d_emb = (grad_out - y * np.sum(grad_out * y, axis=1, keepdims=True)) / cache.norm
    grads["embed.w"] = cache.last.T @ d_emb
    grads["embed.b"] = d_emb.sum(axis=0)
    dz = d_emb @ params["embed.w"].T

    for i in reversed(range(len(cfg.dense_widths))):
        mask = cache.masks[i]
        if mask is not None:
            dz = dz * mask
        d_pre = dz * (cache.pre[i] > 0.0)
        grads[f"dense_{i}.w"] = cache.layer_inputs[i].T @ d_pre
        grads[f"dense_{i}.b"] = d_pre.sum(axis=0)
        dz = d_pre @ params[f"dense_{i}.w"].T

    grads["w_o"] = cache.heads.T @ dz
    d_heads = dz @ params["w_o"].T
    h, d = cfg.num_heads, cfg.head_size
    dh = d_heads.reshape(-1, h, d).transpose(1, 0, 2)

    d_attn = np.einsum("hbd,hnd->hbn", dh, cache.v)
    dv = np.einsum("hbn,hbd->hnd", cache.attn, dh)
    d_scores = cache.attn * (d_attn - np.sum(d_attn * cache.attn, axis=2, keepdims=True))
    d_scores /= math.sqrt(d)
    dq = np.einsum("hbn,hnd->hbd", d_scores, cache.k)
    dk = np.einsum("hbn,hbd->hnd", d_scores, cache.q)

    grads["w_q"] = np.einsum("bm,hbd->hmd", cache.x, dq)
    grads["w_k"] = np.einsum("nm,hnd->hmd", keys, dk)
    grads["w_v"] = np.einsum("nr,hnd->hrd", values, dv)
    return {name: grads[name] for name in params}


def multi_head(
    q: np.ndarray, model: SiameseModel
) -> Result[np.ndarray, NonFiniteActivationError | ShapeMismatchError]:
    """Embed one fingerprint (M,) or a batch (B, M); output keeps the leading shape."""
    x = np.asarray(q, dtype=np.float64)
    batch = np.atleast_2d(x)
    if batch.ndim != 2 or batch.shape[1] != model.num_aps:
        return Err(ShapeMismatchError("query", (batch.shape[0], model.num_aps), x.shape))
    out, _, bad = _forward(model.params, model.config, model.keys, model.values, batch)
    if bad is not None:
        return Err(NonFiniteActivationError(bad))
    return Ok(out[0] if x.ndim == 1 else out)


def encode(
    model: SiameseModel, q: np.ndarray
) -> Result[np.ndarray, NonFiniteActivationError | ShapeMismatchError]:
    """Clean (un-augmented) embedding used at inference."""
    return multi_head(q, model)


# =============================================================================
# Triplet loss
# =============================================================================


def _loss_terms(
    a: np.ndarray, p: np.ndarray, n: np.ndarray, margin: float, mode: LossMode
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Summed loss and its gradients with respect to each branch."""
    d_pos = np.sum((a - p) ** 2, axis=1)
    d_neg = np.sum((a - n) ** 2, axis=1)
    if mode is LossMode.RAW:
        active = np.ones_like(d_pos)
        loss = float(np.sum(d_pos - d_neg))
    else:
        term = d_pos - d_neg + margin
        active = (term > 0.0).astype(np.float64)
        loss = float(np.sum(np.maximum(term, 0.0)))
    w = active[:, None]
    return loss, 2.0 * (n - p) * w, -2.0 * (a - p) * w, 2.0 * (a - n) * w


def triplet_loss(
    anchors: np.ndarray,
    positives: np.ndarray,
    negatives: np.ndarray,
    margin: float,
    mode: LossMode = LossMode.HINGE,
) -> Result[float, ShapeMismatchError]:
    """Sum over the batch of d(A,P)^2 - d(A,N)^2 (+ margin, floored at 0 in hinge mode)."""
    a = np.atleast_2d(np.asarray(anchors, dtype=np.float64))
    p = np.atleast_2d(np.asarray(positives, dtype=np.float64))
    n = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    if p.shape != a.shape:
        return Err(ShapeMismatchError("positives", a.shape, p.shape))
    if n.shape != a.shape:
        return Err(ShapeMismatchError("negatives", a.shape, n.shape))
    return Ok(_loss_terms(a, p, n, margin, mode)[0])


def _loss_and_gradients(
    params: Params,
    cfg: ModelConfig,
    keys: np.ndarray,
    values: np.ndarray,
    anchors: np.ndarray,
    positives: np.ndarray,
    negatives: np.ndarray,
    masks: Sequence[np.ndarray | None] | None = None,
) -> tuple[float, Params]:
    b = anchors.shape[0]
    x = np.vstack([anchors, positives, negatives])
    out, cache, _ = _forward(params, cfg, keys, values, x, masks)
    loss, ga, gp, gn = _loss_terms(out[:b], out[b : 2 * b], out[2 * b :], cfg.margin, cfg.loss_mode)
    return loss, _backward(params, cfg, keys, values, cache, np.vstack([ga, gp, gn]))


def loss_and_gradients(
    model: SiameseModel, anchors: np.ndarray, positives: np.ndarray, negatives: np.ndarray
) -> tuple[float, Params]:
    """Summed triplet loss of a batch and its gradient for every parameter."""
    return _loss_and_gradients(
        model.params, model.config, model.keys, model.values, anchors, positives, negatives
    )


# =============================================================================
# Gradient check
# =============================================================================


@dataclass(frozen=True)
class GradientCheck:
    name: str
    index: tuple[int, ...]
    analytic: float
    numeric: float

    @property
    def relative_error(self) -> float:
        """|a - n| / max(|a|, |n|), with a 1e-6 floor on the denominator."""
        return abs(self.analytic - self.numeric) / max(abs(self.analytic), abs(self.numeric), 1e-6)


def random_coordinates(
    model: SiameseModel, count: int, gen: np.random.Generator
) -> list[tuple[str, tuple[int, ...]]]:
    """``count`` (parameter name, index) pairs drawn uniformly over all scalars."""
    names = list(model.params)
    sizes = np.array([model.params[n].size for n in names])
    flat = gen.choice(int(sizes.sum()), size=count, replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    coords = []
    for f in flat:
        j = int(np.searchsorted(offsets, f, side="right") - 1)
        index = np.unravel_index(int(f - offsets[j]), model.params[names[j]].shape)
        coords.append((names[j], tuple(int(i) for i in index)))
    return coords


def _perturbed_loss(
    model: SiameseModel,
    batch: tuple[np.ndarray, np.ndarray, np.ndarray],
    name: str,
    index: tuple[int, ...],
    delta: float,
) -> float:
    params = {k: v.copy() for k, v in model.params.items()}
    params[name][index] += delta
    anchors, positives, negatives = batch
    b = anchors.shape[0]
    x = np.vstack([anchors, positives, negatives])
    out, _, _ = _forward(params, model.config, model.keys, model.values, x)
    cfg = model.config
    return _loss_terms(out[:b], out[b : 2 * b], out[2 * b :], cfg.margin, cfg.loss_mode)[0]


def gradient_check(
    model: SiameseModel,
    batch: tuple[np.ndarray, np.ndarray, np.ndarray],
    coords: Sequence[tuple[str, tuple[int, ...]]],
    step: float = 1e-5,
) -> list[GradientCheck]:
    """Compare analytic gradients with central finite differences at ``coords``."""
    _, grads = loss_and_gradients(model, *batch)
    results = []
    for name, index in coords:
        plus = _perturbed_loss(model, batch, name, index, step)
        minus = _perturbed_loss(model, batch, name, index, -step)
        numeric = (plus - minus) / (2.0 * step)
        results.append(GradientCheck(name, index, float(grads[name][index]), numeric))
    return results


# =============================================================================
# Training
# =============================================================================


class _Adam:
    def __init__(self, params: Params, lr: float) -> None:
        self.lr = lr
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        c1 = 1.0 - ADAM_BETA1**self.t
        c2 = 1.0 - ADAM_BETA2**self.t
        for name, g in grads.items():
            self.m[name] = ADAM_BETA1 * self.m[name] + (1.0 - ADAM_BETA1) * g
            self.v[name] = ADAM_BETA2 * self.v[name] + (1.0 - ADAM_BETA2) * g * g
            m_hat = self.m[name] / c1
            v_hat = self.v[name] / c2
            params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def _dropout_masks(
    cfg: ModelConfig, rows: int, gen: np.random.Generator
) -> list[np.ndarray | None] | None:
    """Inverted-dropout masks for each dense layer, or None when disabled."""
    if cfg.dense_dropout <= 0.0:
        return None
    keep = 1.0 - cfg.dense_dropout
    return [(gen.random((rows, w)) < keep) / keep for w in cfg.dense_widths]


@dataclass(frozen=True, eq=False)
class TrainResult:
    """The trained model and the mean triplet loss of every epoch."""

    model: SiameseModel
    loss_history: tuple[float, ...]


def train(
    db: NormalizedDataset, miner_cfg: MinerConfig, model_cfg: ModelConfig
) -> Result[TrainResult, TrainError]:
    """Mini-batch Adam on the triplet loss over ``db``.

    Batches of ``model_cfg.batch_size`` triplets are drawn from a per-epoch
    shuffle; FaSt augments the anchor branch only. Runs are bit-identical for
    the same data, configs and seeds.
    """
    classes = int(np.unique(db.labels).size)
    if classes < 2:
        return Err(TooFewReferencePointsError(classes))

    cfg = model_cfg
    keys = np.array(db.values, dtype=np.float64)
    values = one_hot(np.asarray(db.labels), db.num_classes)
    params = init_params(cfg, db.num_aps, db.num_classes, rng.stream(cfg.seed, "init"))
    adam = _Adam(params, cfg.learning_rate)
    miner = TripletMiner(db, miner_cfg)
    n = len(db)

    logger.info(
        "training on %d fingerprints, %d APs, %d RPs for %d epochs",
        n,
        db.num_aps,
        db.num_classes,
        cfg.epochs,
    )
    history: list[float] = []
    for epoch in range(cfg.epochs):
        match miner.epoch_arrays(epoch):
            case Err() as e:
                return e
            case Ok((anchors, positives, negatives)):
                pass

        order = rng.stream(cfg.seed, "shuffle", epoch).permutation(n)
        total = 0.0
        for step, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            a = fast_augment(anchors[idx], cfg.fast, rng.stream(cfg.seed, "fast", epoch, step))
            masks = _dropout_masks(
                cfg, 3 * idx.size, rng.stream(cfg.seed, "dense-dropout", epoch, step)
            )
            loss, grads = _loss_and_gradients(
                params, cfg, keys, values, a, positives[idx], negatives[idx], masks
            )
            if not math.isfinite(loss):
                return Err(NonFiniteLossError(epoch, step))
            adam.step(params, {k: g / idx.size for k, g in grads.items()})
            total += loss

        history.append(total / n)
        logger.debug("epoch %d loss %.6f", epoch, history[-1])

    if history:
        logger.info("final loss %.6f (first epoch %.6f)", history[-1], history[0])
    for p in params.values():
        p.setflags(write=False)
    keys.setflags(write=False)
    values.setflags(write=False)
    model = SiameseModel(cfg, params, keys, values, db.ap_universe, db.rps)
    return Ok(TrainResult(model, tuple(history)))
