"""Quantile feature binning for the histogram-based tree booster.

Numeric features are cut at training-set quantiles (duplicate edges
collapsed); categorical features get a closed dictionary learned from the
training rows. Bin 0 is reserved for missing values in every feature, so
observed values occupy bins 1..n_bins-1. Unseen categories at transform time
fall into the missing bin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ..errors import WoundflowError

MISSING_BIN = 0


def is_missing(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and np.isnan(value):
        return True
    return False


@dataclass
class FeatureBins:
    """Frozen binning of one feature."""

    kind: str  # "numeric" | "categorical"
    edges: np.ndarray | None = None  # ascending interior cut points
    categories: dict[str, int] = field(default_factory=dict)  # value -> bin (>= 1)

    @property
    def n_bins(self) -> int:
        if self.kind == "numeric":
            return len(self.edges) + 2  # missing + len(edges)+1 intervals
        return len(self.categories) + 1


@dataclass
class BinnedDataset:
    """Bin indices per sample per feature, plus the frozen binning tables."""

    bins: np.ndarray  # uint8 [n_samples, n_features]
    features: list[FeatureBins]
    labels: np.ndarray | None = None  # {0, 1} when supplied

    @property
    def n_bins_per_feature(self) -> list[int]:
        return [f.n_bins for f in self.features]


class FeatureBinner(BaseEstimator, TransformerMixin):
    """Learns per-feature bins on training rows and applies them anywhere.

    Parameters
    ----------
    max_bins : int
        Upper bound on non-missing bins per feature (at most 255 so indices
        fit in uint8 alongside the reserved missing bin).
    categorical_features : sequence of int, optional
        Column indices treated as categorical; all others are numeric.
    """

    def __init__(self, max_bins: int = 255, categorical_features: tuple[int, ...] = ()):
        self.max_bins = max_bins
        self.categorical_features = categorical_features

    def fit(self, X, y=None):
        rows = _as_object_matrix(X)
        n, d = rows.shape
        if n < 1:
            raise WoundflowError("cannot fit binner on an empty dataset")
        if not 2 <= self.max_bins <= 255:
            raise WoundflowError(f"max_bins must be in [2, 255], got {self.max_bins}")
        cat = set(self.categorical_features or ())
        self.features_: list[FeatureBins] = []
        for j in range(d):
            col = rows[:, j]
            observed = [v for v in col if not is_missing(v)]
            if not observed:
                raise WoundflowError(f"feature {j} has zero observed values")
            if j in cat:
                values = sorted({str(v) for v in observed})
                if len(values) > self.max_bins:
                    raise WoundflowError(
                        f"feature {j} has {len(values)} categories, more than "
                        f"max_bins={self.max_bins}"
                    )
                self.features_.append(
                    FeatureBins(
                        kind="categorical",
                        categories={v: i + 1 for i, v in enumerate(values)},
                    )
                )
            else:
                vals = np.asarray(observed, dtype=np.float64)
                self.features_.append(
                    FeatureBins(kind="numeric", edges=_quantile_edges(vals, self.max_bins))
                )
        self.n_features_in_ = d
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "features_"):
            raise NotFittedError("FeatureBinner must be fitted before transform")
        rows = _as_object_matrix(X)
        if rows.shape[1] != self.n_features_in_:
            raise WoundflowError(
                f"expected {self.n_features_in_} features, got {rows.shape[1]}"
            )
        out = np.zeros(rows.shape, dtype=np.uint8)
        for j, fb in enumerate(self.features_):
            col = rows[:, j]
            if fb.kind == "categorical":
                out[:, j] = [
                    MISSING_BIN if is_missing(v) else fb.categories.get(str(v), MISSING_BIN)
                    for v in col
                ]
            else:
                missing = np.array([is_missing(v) for v in col])
                vals = np.array(
                    [0.0 if m else float(v) for v, m in zip(col, missing)], dtype=np.float64
                )
                # values <= edges[i] land in bin i+1; above the last edge in
                # the final bin
                idx = np.searchsorted(fb.edges, vals, side="left") + 1
                idx[missing] = MISSING_BIN
                out[:, j] = idx
        return out


def _quantile_edges(values: np.ndarray, max_bins: int) -> np.ndarray:
    """Interior cut points at quantiles, with tied edges collapsed."""
    uniq = np.unique(values)
    n_bins = min(max_bins, len(uniq))
    if n_bins <= 1:
        return np.empty(0, dtype=np.float64)
    qs = np.arange(1, n_bins) / n_bins
    edges = np.unique(np.quantile(values, qs))
    return edges.astype(np.float64)


def bin_features(
    rows,
    max_bins: int = 255,
    categorical_features: tuple[int, ...] = (),
    labels=None,
) -> tuple[BinnedDataset, FeatureBinner]:
    """Fit a binner on ``rows`` and return the binned view of those rows."""
    binner = FeatureBinner(max_bins=max_bins, categorical_features=tuple(categorical_features))
    bins = binner.fit(rows).transform(rows)
    y = None if labels is None else np.asarray(labels, dtype=np.int64)
    return BinnedDataset(bins=bins, features=list(binner.features_), labels=y), binner


def _as_object_matrix(X) -> np.ndarray:
    arr = np.asarray(X, dtype=object)
    if arr.ndim != 2:
        raise WoundflowError(f"feature matrix must be 2-dimensional, got shape {arr.shape}")
    return arr
