"""Gradient-boosted trees with binary logistic loss.

This is a from-scratch histogram booster in the style of LightGBM's core
loop: quantile-binned features, leaf-wise tree growth on (gradient, hessian)
pairs, Newton leaf values, shrinkage, and optional early stopping on a
validation set. Prediction is sigmoid(prior + shrinkage * sum of tree
outputs).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..errors import WoundflowError
from ..nn.ops import sigmoid
from .binning import BinnedDataset, FeatureBinner, FeatureBins, is_missing
from .grower import TreeNode, apply_tree, grow_tree
from .splitting import SplitConfig

FORMAT_VERSION = 1
PRIOR_CLAMP = 10.0


def gradients_logistic(labels: np.ndarray, probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and hessian of the logistic loss: g = p - y, h = p(1-p)."""
    y = np.asarray(labels, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    return p - y, p * (1.0 - p)


def logloss(labels: np.ndarray, probs: np.ndarray) -> float:
    y = np.asarray(labels, dtype=np.float64)
    p = np.clip(np.asarray(probs, dtype=np.float64), 1e-15, 1.0 - 1e-15)
    return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).mean())


class GradientBoostedTreesClassifier(BaseEstimator, ClassifierMixin):
    """Binary classifier over mixed numeric/categorical feature rows.

    Parameters mirror the usual histogram-GBDT knobs. ``X`` may be an object
    array: ``None``/NaN mean missing, strings are categorical values for the
    columns named in ``categorical_features``.

    Parameters
    ----------
    num_trees : int
        Boosting rounds (trees) to fit.
    learning_rate : float
        Shrinkage in (0, 1] applied to every tree's output.
    max_leaves, max_depth : int
        Leaf-wise growth limits per tree.
    l2_regularization : float
        L2 penalty on leaf values (lambda in the gain formula).
    min_split_gain : float
        Minimum gain (gamma) a split must clear.
    min_child_weight : float
        Minimum hessian sum on each side of a split.
    max_bins : int
        Non-missing bins per feature, at most 255.
    categorical_features : sequence of int, optional
        Column indices holding categorical values.
    one_hot_categoricals : bool
        Cross-checking fallback: expand categoricals to 0/1 indicator
        columns instead of category-subset splits.
    early_stopping_rounds : int, optional
        Stop when validation logloss has not improved for this many rounds
        (requires ``eval_set``); the ensemble is truncated to its best round.
    """

    def __init__(
        self,
        num_trees: int = 100,
        learning_rate: float = 0.1,
        max_leaves: int = 31,
        max_depth: int = 6,
        l2_regularization: float = 1.0,
        min_split_gain: float = 0.0,
        min_child_weight: float = 1e-3,
        max_bins: int = 255,
        categorical_features: tuple[int, ...] | None = None,
        one_hot_categoricals: bool = False,
        early_stopping_rounds: int | None = None,
    ):
        self.num_trees = num_trees
        self.learning_rate = learning_rate
        self.max_leaves = max_leaves
        self.max_depth = max_depth
        self.l2_regularization = l2_regularization
        self.min_split_gain = min_split_gain
        self.min_child_weight = min_child_weight
        self.max_bins = max_bins
        self.categorical_features = categorical_features
        self.one_hot_categoricals = one_hot_categoricals
        self.early_stopping_rounds = early_stopping_rounds

    # -- fitting -----------------------------------------------------------

    def fit(self, X, y, eval_set: tuple | None = None):
        if not 0 < self.learning_rate <= 1:
            raise WoundflowError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        y = np.asarray(y, dtype=np.int64)
        if y.ndim != 1 or X is None or len(X) != y.shape[0]:
            raise WoundflowError("X and y must have matching first dimensions")
        if not np.isin(y, (0, 1)).all():
            raise WoundflowError("labels must be binary {0, 1}")
        self.classes_ = np.array([0, 1], dtype=np.int64)

        X = self._expand(np.asarray(X, dtype=object))
        cats = () if self.one_hot_categoricals else tuple(self.categorical_features or ())
        self.binner_ = FeatureBinner(max_bins=self.max_bins, categorical_features=cats)
        bins = self.binner_.fit(X).transform(X)
        self._feature_kinds = [f.kind for f in self.binner_.features_]
        self._n_bins = max(f.n_bins for f in self.binner_.features_)

        base_rate = float(y.sum()) / y.shape[0]
        self.prior_ = _clamped_logit(base_rate)
        self.single_class_ = bool(y.min() == y.max())
        self.trees_: list[TreeNode] = []
        self.train_logloss_: list[float] = []
        self.valid_logloss_: list[float] = []
        if self.single_class_:
            warnings.warn(
                "training labels contain a single class; returning a "
                "prior-only ensemble",
                RuntimeWarning,
                stacklevel=2,
            )
            return self

        config = SplitConfig(
            l2=self.l2_regularization,
            min_gain=self.min_split_gain,
            min_child_weight=self.min_child_weight,
            max_leaves=self.max_leaves,
            max_depth=self.max_depth,
        )
        raw = np.full(y.shape[0], self.prior_, dtype=np.float64)
        val_bins = val_y = None
        raw_val = None
        if eval_set is not None:
            X_val, y_val = eval_set
            val_y = np.asarray(y_val, dtype=np.int64)
            val_bins = self.binner_.transform(self._expand(np.asarray(X_val, dtype=object)))
            raw_val = np.full(val_y.shape[0], self.prior_, dtype=np.float64)

        best_round, best_loss = 0, np.inf
        for _ in range(self.num_trees):
            p = sigmoid(raw)
            g, h = gradients_logistic(y, p)
            tree = grow_tree(bins, g, h, config, self._feature_kinds, self._n_bins)
            self.trees_.append(tree)
            raw += self.learning_rate * apply_tree(tree, bins)
            self.train_logloss_.append(logloss(y, sigmoid(raw)))
            if val_bins is not None:
                raw_val += self.learning_rate * apply_tree(tree, val_bins)
                loss = logloss(val_y, sigmoid(raw_val))
                self.valid_logloss_.append(loss)
                if loss < best_loss:
                    best_loss, best_round = loss, len(self.trees_)
                elif (
                    self.early_stopping_rounds is not None
                    and len(self.trees_) - best_round >= self.early_stopping_rounds
                ):
                    break
        if val_bins is not None and self.early_stopping_rounds is not None:
            self.trees_ = self.trees_[:best_round]
            self.best_round_ = best_round
        return self

    # -- prediction --------------------------------------------------------

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        bins = self.binner_.transform(self._expand(np.asarray(X, dtype=object)))
        raw = np.full(bins.shape[0], self.prior_, dtype=np.float64)
        for tree in self.trees_:
            raw += self.learning_rate * apply_tree(tree, bins)
        return raw

    def predict_proba(self, X) -> np.ndarray:
        p1 = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    def _check_fitted(self) -> None:
        if not hasattr(self, "trees_"):
            raise NotFittedError("classifier has not been fitted")

    # -- categorical one-hot fallback ---------------------------------------

    def _expand(self, X: np.ndarray) -> np.ndarray:
        if not self.one_hot_categoricals or not self.categorical_features:
            return X
        if not hasattr(self, "_onehot_values"):
            self._onehot_values = {
                j: sorted({str(v) for v in X[:, j] if not is_missing(v)})
                for j in self.categorical_features
            }
        cols = []
        for j in range(X.shape[1]):
            if j in self._onehot_values:
                for v in self._onehot_values[j]:
                    cols.append(
                        [None if is_missing(x) else float(str(x) == v) for x in X[:, j]]
                    )
            else:
                cols.append(list(X[:, j]))
        return np.array(cols, dtype=object).T

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-compatible form; floats hex-encoded for bit-exact round trips."""
        self._check_fitted()
        features = []
        for fb in self.binner_.features_:
            if fb.kind == "numeric":
                features.append(
                    {"kind": "numeric", "edges": [float(e).hex() for e in fb.edges]}
                )
            else:
                features.append({"kind": "categorical", "categories": fb.categories})
        return {
            "format_version": FORMAT_VERSION,
            "objective": "binary_logistic",
            "prior": float(self.prior_).hex(),
            "shrinkage": float(self.learning_rate).hex(),
            "single_class": self.single_class_,
            "config": {
                "num_trees": self.num_trees,
                "max_leaves": self.max_leaves,
                "max_depth": self.max_depth,
                "l2_regularization": self.l2_regularization,
                "min_split_gain": self.min_split_gain,
                "min_child_weight": self.min_child_weight,
                "max_bins": self.max_bins,
                "categorical_features": list(self.categorical_features or ()),
                "one_hot_categoricals": self.one_hot_categoricals,
                "onehot_values": {
                    str(k): v for k, v in getattr(self, "_onehot_values", {}).items()
                },
            },
            "features": features,
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GradientBoostedTreesClassifier":
        if data.get("format_version") != FORMAT_VERSION:
            raise WoundflowError(
                f"unsupported ensemble format version {data.get('format_version')}"
            )
        cfg = data["config"]
        est = cls(
            num_trees=cfg["num_trees"],
            learning_rate=float.fromhex(data["shrinkage"]),
            max_leaves=cfg["max_leaves"],
            max_depth=cfg["max_depth"],
            l2_regularization=cfg["l2_regularization"],
            min_split_gain=cfg["min_split_gain"],
            min_child_weight=cfg["min_child_weight"],
            max_bins=cfg["max_bins"],
            categorical_features=tuple(cfg["categorical_features"]) or None,
            one_hot_categoricals=cfg["one_hot_categoricals"],
        )
        est.classes_ = np.array([0, 1], dtype=np.int64)
        est.prior_ = float.fromhex(data["prior"])
        est.single_class_ = data["single_class"]
        if cfg.get("onehot_values"):
            est._onehot_values = {int(k): v for k, v in cfg["onehot_values"].items()}
        binner = FeatureBinner(
            max_bins=cfg["max_bins"],
            categorical_features=tuple(cfg["categorical_features"]),
        )
        binner.features_ = []
        for f in data["features"]:
            if f["kind"] == "numeric":
                binner.features_.append(
                    FeatureBins(
                        kind="numeric",
                        edges=np.array([float.fromhex(e) for e in f["edges"]]),
                    )
                )
            else:
                binner.features_.append(
                    FeatureBins(kind="categorical", categories=dict(f["categories"]))
                )
        binner.n_features_in_ = len(binner.features_)
        est.binner_ = binner
        est._feature_kinds = [f.kind for f in binner.features_]
        est._n_bins = max(f.n_bins for f in binner.features_)
        est.trees_ = [TreeNode.from_dict(t) for t in data["trees"]]
        return est

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "GradientBoostedTreesClassifier":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _clamped_logit(rate: float) -> float:
    if rate <= 0.0:
        return -PRIOR_CLAMP
    if rate >= 1.0:
        return PRIOR_CLAMP
    return float(np.clip(np.log(rate / (1.0 - rate)), -PRIOR_CLAMP, PRIOR_CLAMP))
