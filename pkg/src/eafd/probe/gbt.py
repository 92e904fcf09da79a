"""Small deterministic gradient-boosted trees.

This is the learner behind every probe and downstream model in the
package. It is intentionally self-contained: exact greedy splits over
sorted unique values, learned routing for missing values, Newton leaf
values, and bit-reproducible fits (row order is canonicalized
internally, accumulation order is fixed, and all randomness is seeded).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..validation import as_float_matrix, as_float_vector
from ._kernels import best_split, build_histograms, predict_trees

SQUARED = "squared"
LOGISTIC = "logistic"


@dataclass(frozen=True)
class GbtConfig:
    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_samples_leaf: int = 20
    loss: str = SQUARED
    seed: int = 0
    feature_subsample: float = 1.0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.loss not in (SQUARED, LOGISTIC):
            raise ValueError(f"unknown loss {self.loss!r}")
        if not 0.0 < self.feature_subsample <= 1.0:
            raise ValueError("feature_subsample must be in (0, 1]")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "GbtConfig":
        return cls(**obj)


class _Tree:
    """One regression tree in flat-array form."""

    __slots__ = ("feature", "threshold", "missing_left", "left", "right", "value", "gain")

    def __init__(self, feature, threshold, missing_left, left, right, value, gain):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.missing_left = np.asarray(missing_left, dtype=np.bool_)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.value = np.asarray(value, dtype=np.float64)
        self.gain = np.asarray(gain, dtype=np.float64)

    def to_json(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "missing_left": self.missing_left.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "_Tree":
        return cls(
            obj["feature"], obj["threshold"], obj["missing_left"],
            obj["left"], obj["right"], obj["value"], obj["gain"],
        )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class GbtModel:
    """Fitted boosting ensemble: a base score plus regression trees."""

    def __init__(self, config: GbtConfig, base_score: float, trees: list[_Tree],
                 n_features: int, train_loss_curve: np.ndarray):
        self.config = config
        self.base_score = float(base_score)
        self.trees = trees
        self.n_features = int(n_features)
        self.train_loss_curve = np.asarray(train_loss_curve, dtype=np.float64)
        self._flat = None

    # prediction ---------------------------------------------------------

    def _flatten(self):
        if self._flat is None:
            if self.trees:
                starts = np.cumsum([0] + [t.feature.size for t in self.trees[:-1]])
                self._flat = (
                    np.concatenate([t.feature for t in self.trees]),
                    np.concatenate([t.threshold for t in self.trees]),
                    np.concatenate([t.missing_left for t in self.trees]),
                    np.concatenate(
                        [t.left + s for t, s in zip(self.trees, starts)]
                    ).astype(np.int32),
                    np.concatenate(
                        [t.right + s for t, s in zip(self.trees, starts)]
                    ).astype(np.int32),
                    np.concatenate([t.value for t in self.trees]),
                    starts.astype(np.int64),
                )
            else:
                self._flat = tuple(np.empty(0, dtype=d) for d in
                                   (np.int32, np.float64, np.bool_, np.int32, np.int32, np.float64, np.int64))
        return self._flat

    def predict_raw(self, X) -> np.ndarray:
        """Sum of base score and scaled leaf values (log-odds for logistic loss)."""
        X = as_float_matrix(X, allow_nan=True)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        out = np.full(X.shape[0], self.base_score, dtype=np.float64)
        if self.trees:
            f, t, ml, l, r, v, starts = self._flatten()
            predict_trees(f, t, ml, l, r, v, starts, np.ascontiguousarray(X), out,
                          self.config.learning_rate)
        return out

    def predict(self, X) -> np.ndarray:
        """Predicted target: probabilities for logistic loss, values for squared."""
        raw = self.predict_raw(X)
        if self.config.loss == LOGISTIC:
            return _sigmoid(raw)
        return raw

    # importances ----------------------------------------------------------

    def split_gain_totals(self) -> np.ndarray:
        totals = np.zeros(self.n_features, dtype=np.float64)
        for tree in self.trees:
            internal = tree.feature >= 0
            np.add.at(totals, tree.feature[internal], tree.gain[internal])
        return totals

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "base_score": self.base_score,
            "n_features": self.n_features,
            "train_loss_curve": self.train_loss_curve.tolist(),
            "trees": [t.to_json() for t in self.trees],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict) -> "GbtModel":
        return cls(
            GbtConfig.from_json(obj["config"]),
            obj["base_score"],
            [_Tree.from_json(t) for t in obj["trees"]],
            obj["n_features"],
            np.asarray(obj["train_loss_curve"]),
        )

    @classmethod
    def loads(cls, text: str) -> "GbtModel":
        return cls.from_json(json.loads(text))


# --- fitting -------------------------------------------------------------


def _canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row order that is invariant to permutations of the input rows."""
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def _bin_columns(X: np.ndarray):
    """Per-feature sorted unique values and bin codes; the last bin holds NaN."""
    n, p = X.shape
    codes = np.empty((n, p), dtype=np.int32)
    uniques: list[np.ndarray] = []
    offsets = np.zeros(p + 1, dtype=np.int64)
    for j in range(p):
        col = X[:, j]
        finite = ~np.isnan(col)
        uniq = np.unique(col[finite])
        cj = np.empty(n, dtype=np.int32)
        cj[finite] = np.searchsorted(uniq, col[finite]).astype(np.int32)
        cj[~finite] = uniq.size  # missing bin
        codes[:, j] = cj
        uniques.append(uniq)
        offsets[j + 1] = offsets[j] + uniq.size + 1
    return codes, uniques, offsets


def _grow_tree(codes, uniques, offsets, grad, hess, rows, config, feature_ok,
               hist_g, hist_h, hist_c, f_update):
    """Grow one depth-limited tree; returns the tree and updates raw scores."""
    feature: list[int] = []
    threshold: list[float] = []
    missing_left: list[bool] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    gain: list[float] = []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        missing_left.append(True)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        gain.append(0.0)
        return len(feature) - 1

    lr = config.learning_rate
    queue = [(new_node(), rows, 0)]
    while queue:
        node, node_rows, depth = queue.pop(0)
        g = float(grad[node_rows].sum())
        h = float(hess[node_rows].sum())
        make_leaf = depth >= config.max_depth or node_rows.size < 2 * config.min_samples_leaf
        j = t = -1
        if not make_leaf:
            hist_g[:] = 0.0
            hist_h[:] = 0.0
            hist_c[:] = 0
            build_histograms(codes, grad, hess, node_rows, offsets, hist_g, hist_h, hist_c)
            j, t, miss_left, best_gain = best_split(
                hist_g, hist_h, hist_c, offsets, feature_ok, config.min_samples_leaf
            )
            make_leaf = j < 0
        if make_leaf:
            leaf_value = -g / (h + 1e-12)
            value[node] = leaf_value
            f_update[node_rows] += lr * leaf_value
            continue
        feature[node] = j
        threshold[node] = float(uniques[j][t])
        missing_left[node] = bool(miss_left)
        gain[node] = float(best_gain)
        cj = codes[node_rows, j]
        miss_code = offsets[j + 1] - offsets[j] - 1
        go_left = cj <= t
        if miss_left:
            go_left |= cj == miss_code
        left_id = new_node()
        right_id = new_node()
        left[node] = left_id
        right[node] = right_id
        queue.append((left_id, node_rows[go_left], depth + 1))
        queue.append((right_id, node_rows[~go_left], depth + 1))

    return _Tree(feature, threshold, missing_left, left, right, value, gain)


def fit(config: GbtConfig, X, y) -> GbtModel:
    """Fit gradient-boosted trees with squared or logistic loss.

    Deterministic under (config, X, y) up to any permutation of rows:
    rows are re-ordered canonically before training. Missing feature
    values (NaN) are routed per split in whichever direction scored
    better during training.
    """
    X = as_float_matrix(X, allow_nan=True)
    y = as_float_vector(y)
    n, p = X.shape
    if y.shape[0] != n:
        raise ValueError("X and y row counts differ")
    if n < 2 * config.min_samples_leaf:
        raise ValueError(
            f"need at least {2 * config.min_samples_leaf} rows, got {n}"
        )
    if config.loss == LOGISTIC and not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("logistic loss requires y in {0, 1}")

    order = _canonical_order(X, y)
    X = np.ascontiguousarray(X[order])
    y = y[order]

    codes, uniques, offsets = _bin_columns(X)
    total_bins = int(offsets[-1])
    hist_g = np.zeros(total_bins, dtype=np.float64)
    hist_h = np.zeros(total_bins, dtype=np.float64)
    hist_c = np.zeros(total_bins, dtype=np.int64)

    if config.loss == LOGISTIC:
        p_hat = min(max(float(y.mean()), 1e-12), 1.0 - 1e-12)
        base = float(np.log(p_hat / (1.0 - p_hat)))
    else:
        base = float(y.mean())

    rng = np.random.default_rng(config.seed)
    rows = np.arange(n, dtype=np.int64)
    F = np.full(n, base, dtype=np.float64)
    trees: list[_Tree] = []
    losses = [_train_loss(config.loss, y, F)]

    n_sub = max(1, int(round(config.feature_subsample * p))) if p else 0
    for _ in range(config.n_trees):
        if config.loss == LOGISTIC:
            prob = _sigmoid(F)
            grad = prob - y
            hess = prob * (1.0 - prob)
        else:
            grad = F - y
            hess = np.ones(n, dtype=np.float64)
        feature_ok = np.ones(p, dtype=np.bool_)
        if p and n_sub < p:
            feature_ok[:] = False
            feature_ok[rng.choice(p, size=n_sub, replace=False)] = True
        tree = _grow_tree(
            codes, uniques, offsets, grad, hess, rows, config, feature_ok,
            hist_g, hist_h, hist_c, F,
        )
        trees.append(tree)
        losses.append(_train_loss(config.loss, y, F))
        # non-increasing train loss, checked on every fit in debug runs
        assert losses[-1] <= losses[-2] + 1e-9 * max(1.0, abs(losses[-2])), (
            f"train loss increased on round {len(trees)}: {losses[-2]} -> {losses[-1]}"
        )

    return GbtModel(config, base, trees, p, np.asarray(losses))


def _train_loss(loss: str, y: np.ndarray, F: np.ndarray) -> float:
    if loss == LOGISTIC:
        sign = 2.0 * y - 1.0
        return float(np.mean(np.logaddexp(0.0, -sign * F)))
    return float(0.5 * np.mean((y - F) ** 2))


# --- sklearn-style front ends ---------------------------------------------


class _BoostedTreesBase(BaseEstimator):
    _loss = SQUARED

    def __init__(self, n_trees=100, max_depth=3, learning_rate=0.1,
                 min_samples_leaf=20, seed=0, feature_subsample=1.0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.seed = seed
        self.feature_subsample = feature_subsample

    def _config(self) -> GbtConfig:
        return GbtConfig(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            learning_rate=self.learning_rate,
            min_samples_leaf=self.min_samples_leaf,
            loss=self._loss,
            seed=self.seed,
            feature_subsample=self.feature_subsample,
        )

    def fit(self, X, y):
        self.model_ = fit(self._config(), X, y)
        self.n_features_in_ = self.model_.n_features
        return self

    def feature_importances_gain(self) -> np.ndarray:
        totals = self.model_.split_gain_totals()
        s = totals.sum()
        return totals / s if s > 0 else totals


class BoostedTreesRegressor(_BoostedTreesBase):
    """Squared-loss boosted trees with a scikit-learn estimator surface."""

    _loss = SQUARED

    def predict(self, X):
        return self.model_.predict(X)


class BoostedTreesClassifier(_BoostedTreesBase):
    """Binary logistic boosted trees with a scikit-learn estimator surface."""

    _loss = LOGISTIC

    def predict_proba(self, X):
        p1 = self.model_.predict(X)
        return np.column_stack([1.0 - p1, p1])

    def decision_function(self, X):
        return self.model_.predict_raw(X)

    def predict(self, X):
        return (self.model_.predict(X) > 0.5).astype(np.float64)
