"""Gradient-boosted regression trees for multiclass softmax classification.

Scores are ``F_c(x) = W0_c + sum_rounds tree_rc(x)`` with W0 the log class
prior. Each round fits one tree per class to the softmax cross-entropy
gradient ``g = p - y`` and hessian ``h = max(2 p (1 - p), 1e-16)``. Splits are
exact greedy over sorted feature values with L2 leaf regularization; the
learning rate is folded into the stored leaf values.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from stellar_loc.lib.attention import softmax_rows
from stellar_loc.lib.errors import (
    FitError,
    NonFiniteFeatureError,
    ShapeMismatchError,
    SingleClassError,
)
from stellar_loc.lib.result import Err, Ok, Result
from stellar_loc.models import GbtParams

logger = logging.getLogger(__name__)

HESSIAN_FLOOR = 1e-16
PRIOR_FLOOR = 1e-12
# Gains this close to the best are ties, settled by (feature, threshold).
_TIE_RTOL = 1e-10


@dataclass(frozen=True)
class RegressionTree:
    """Flat binary tree; node 0 is the root and leaves have ``feature == -1``.

    An internal node sends ``x`` left when ``x[feature] < threshold``.
    """

    feature: tuple[int, ...]
    threshold: tuple[float, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]
    value: tuple[float, ...]

    @property
    def depth(self) -> int:
        depths = [0] * len(self.feature)
        for node, f in enumerate(self.feature):
            if f >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return max(depths)

    def predict(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        rows = np.arange(X.shape[0])
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            f = feature[node]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] < threshold[node]
            node = np.where(internal, np.where(go_left, left[node], right[node]), node)
        return np.asarray(self.value)[node]


@dataclass(frozen=True)
class BoostedEnsemble:
    """Bias per class plus ``rounds x classes`` trees.

    ``training_loss[0]`` is the prior-only log-loss; entry ``r`` follows round r.
    """

    bias: tuple[float, ...]
    trees: tuple[tuple[RegressionTree, ...], ...]
    num_features: int
    class_ids: tuple[str, ...]
    params: GbtParams
    training_loss: tuple[float, ...] = ()

    @property
    def num_classes(self) -> int:
        return len(self.bias)


@dataclass(frozen=True, eq=False)
class GbtPrediction:
    probabilities: np.ndarray
    labels: np.ndarray
    rp_ids: tuple[str, ...]


# =============================================================================
# Split finding
# =============================================================================


@dataclass(frozen=True)
class _Split:
    feature: int
    threshold: float
    gain: float


def _leaf_weight(g_sum: float, h_sum: float, reg_lambda: float) -> float:
    return -g_sum / (h_sum + reg_lambda)


def best_split(
    X: np.ndarray, g: np.ndarray, h: np.ndarray, params: GbtParams
) -> _Split | None:
    """Exact greedy split of one node, or None when nothing beats ``min_split_gain``.

    Ties within a relative 1e-10 of the best gain go to the lowest feature
    index, then the lowest threshold.
    """
    n, num_features = X.shape
    if n < 2:
        return None
    lam = params.reg_lambda
    G, H = float(g.sum()), float(h.sum())

    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    GL = np.cumsum(g[order], axis=0)[:-1]
    HL = np.cumsum(h[order], axis=0)[:-1]
    GR = G - GL
    HR = H - HL

    valid = (
        (xs[:-1] < xs[1:])
        & (HL >= params.min_child_weight)
        & (HR >= params.min_child_weight)
    )
    if not valid.any():
        return None
    gain = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam))
    gain = np.where(valid, gain, -np.inf)

    top = float(gain.max())
    if top <= params.min_split_gain:
        return None
    tol = _TIE_RTOL * max(1.0, abs(top))
    rows, feats = np.nonzero(gain >= top - tol)
    f = int(feats.min())
    i = int(rows[feats == f].min())
    threshold = float((xs[i, f] + xs[i + 1, f]) / 2.0)
    return _Split(f, threshold, float(gain[i, f]))


class _TreeBuilder:
    def __init__(self, X: np.ndarray, g: np.ndarray, h: np.ndarray, params: GbtParams) -> None:
        self.X, self.g, self.h, self.params = X, g, h, params
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def grow(self, rows: np.ndarray, depth: int) -> int:
        node = self._new_node()
        g, h = self.g[rows], self.h[rows]
        split = None
        if depth < self.params.max_depth:
            split = best_split(self.X[rows], g, h, self.params)
        if split is None:
            w = _leaf_weight(float(g.sum()), float(h.sum()), self.params.reg_lambda)
            self.value[node] = w * self.params.learning_rate
            return node

        goes_left = self.X[rows, split.feature] < split.threshold
        self.feature[node] = split.feature
        self.threshold[node] = split.threshold
        self.left[node] = self.grow(rows[goes_left], depth + 1)
        self.right[node] = self.grow(rows[~goes_left], depth + 1)
        return node

    def build(self) -> RegressionTree:
        self.grow(np.arange(self.X.shape[0]), 0)
        return RegressionTree(
            tuple(self.feature),
            tuple(self.threshold),
            tuple(self.left),
            tuple(self.right),
            tuple(self.value),
        )


def fit_tree(X: np.ndarray, g: np.ndarray, h: np.ndarray, params: GbtParams) -> RegressionTree:
    """One regression tree on first/second-order gradients."""
    return _TreeBuilder(X, g, h, params).build()


# =============================================================================
# Boosting
# =============================================================================


def log_loss(scores: np.ndarray, y: np.ndarray) -> float:
    """Mean softmax cross-entropy of integer labels ``y``."""
    shifted = scores - scores.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(log_z - shifted[np.arange(y.shape[0]), y]))


def _check_features(X: np.ndarray) -> NonFiniteFeatureError | None:
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        return NonFiniteFeatureError(int(bad[0][0]), int(bad[0][1]))
    return None


def gbt_fit(
    X: np.ndarray,
    y: np.ndarray,
    params: GbtParams,
    *,
    num_classes: int | None = None,
    class_ids: Sequence[str] | None = None,
) -> Result[BoostedEnsemble, FitError]:
    """Boost ``params.num_rounds`` rounds of per-class trees on (X, y).

    ``y`` holds class indices in ``[0, num_classes)``; ``num_classes`` defaults
    to ``max(y) + 1``. Classes absent from ``y`` get a floored log prior.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or y.shape[0] != X.shape[0] or y.size == 0:
        return Err(ShapeMismatchError("y", (X.shape[0],), y.shape))
    if (bad := _check_features(X)) is not None:
        return Err(bad)
    if np.unique(y).size < 2:
        return Err(SingleClassError(int(y[0])))

    R = num_classes if num_classes is not None else int(y.max()) + 1
    ids = tuple(class_ids) if class_ids is not None else tuple(str(c) for c in range(R))
    if len(ids) != R:
        return Err(ShapeMismatchError("class_ids", (R,), (len(ids),)))

    counts = np.bincount(y, minlength=R).astype(np.float64)
    bias = np.log(np.maximum(counts / counts.sum(), PRIOR_FLOOR))
    Y = np.zeros((y.shape[0], R))
    Y[np.arange(y.shape[0]), y] = 1.0

    scores = np.tile(bias, (X.shape[0], 1))
    losses = [log_loss(scores, y)]
    rounds: list[tuple[RegressionTree, ...]] = []
    for r in range(params.num_rounds):
        p = softmax_rows(scores)
        g = p - Y
        h = np.maximum(2.0 * p * (1.0 - p), HESSIAN_FLOOR)
        trees = tuple(fit_tree(X, g[:, c], h[:, c], params) for c in range(R))
        for c, tree in enumerate(trees):
            scores[:, c] += tree.predict(X)
        rounds.append(trees)
        losses.append(log_loss(scores, y))
        logger.debug("round %d log-loss %.6f", r + 1, losses[-1])

    return Ok(
        BoostedEnsemble(
            bias=tuple(float(b) for b in bias),
            trees=tuple(rounds),
            num_features=X.shape[1],
            class_ids=ids,
            params=params,
            training_loss=tuple(losses),
        )
    )


def decision_scores(model: BoostedEnsemble, X: np.ndarray) -> np.ndarray:
    """Raw per-class scores W0 + sum of tree outputs (B x R)."""
    scores = np.tile(np.asarray(model.bias), (X.shape[0], 1))
    for trees in model.trees:
        for c, tree in enumerate(trees):
            scores[:, c] += tree.predict(X)
    return scores


def gbt_predict(
    model: BoostedEnsemble, x: np.ndarray
) -> Result[GbtPrediction, ShapeMismatchError | NonFiniteFeatureError]:
    """Class probabilities and argmax class for one vector or a batch.

    Argmax ties go to the lowest class index.
    """
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if X.ndim != 2 or X.shape[1] != model.num_features:
        return Err(ShapeMismatchError("x", (X.shape[0], model.num_features), np.shape(x)))
    if (bad := _check_features(X)) is not None:
        return Err(bad)
    probs = softmax_rows(decision_scores(model, X))
    labels = np.argmax(probs, axis=1)
    return Ok(GbtPrediction(probs, labels, tuple(model.class_ids[i] for i in labels)))
