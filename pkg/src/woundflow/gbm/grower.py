"""Leaf-wise regression-tree growth on binned gradients/hessians.

The grower always splits the current highest-gain leaf (best-first), stopping
at ``max_leaves``, ``max_depth`` or when no leaf has a positive-gain split.
Leaf values are the Newton step -G/(H + l2). Child histograms reuse the
parent through sibling subtraction for the larger child.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from ..validation import canonical_sum
from .histogram import Histograms, build_histograms, subtract_histograms
from .splitting import SplitConfig, SplitInfo, find_best_split, goes_left, leaf_value


@dataclass
class TreeNode:
    """Internal node (feature + threshold or category subset) or leaf."""

    value: float | None = None  # log-odds increment; None for internal nodes
    feature: int | None = None
    threshold_bin: int | None = None
    categories_left: tuple[int, ...] | None = None
    missing_left: bool = True
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": float(self.value).hex()}
        node = {
            "feature": self.feature,
            "missing_left": self.missing_left,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }
        if self.threshold_bin is not None:
            node["threshold_bin"] = self.threshold_bin
        else:
            node["categories_left"] = list(self.categories_left)
        return node

    @classmethod
    def from_dict(cls, data: dict) -> "TreeNode":
        if "leaf" in data:
            return cls(value=float.fromhex(data["leaf"]))
        return cls(
            feature=data["feature"],
            threshold_bin=data.get("threshold_bin"),
            categories_left=(
                tuple(data["categories_left"]) if "categories_left" in data else None
            ),
            missing_left=data["missing_left"],
            left=cls.from_dict(data["left"]),
            right=cls.from_dict(data["right"]),
        )

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.n_leaves() + self.right.n_leaves()


@dataclass
class _GrowingLeaf:
    sample_idx: np.ndarray
    depth: int
    hist: Histograms
    node: TreeNode
    split: SplitInfo | None = None


def grow_tree(
    bins: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    config: SplitConfig,
    feature_kinds: list[str],
    n_bins: int,
) -> TreeNode:
    """Grow one tree over all samples of ``bins``; returns the root."""
    if config.max_leaves < 1 or config.max_depth < 1:
        raise ValueError("max_leaves and max_depth must be >= 1")
    all_idx = np.arange(bins.shape[0], dtype=np.int64)
    root_hist = build_histograms(bins, g, h, all_idx, n_bins)
    root = TreeNode()
    leaf = _GrowingLeaf(sample_idx=all_idx, depth=0, hist=root_hist, node=root)
    _finalize_as_leaf(leaf, g, h, config)

    seq = itertools.count()
    heap: list[tuple[float, int, _GrowingLeaf]] = []
    _push_if_splittable(heap, seq, leaf, config, feature_kinds)
    n_leaves = 1
    while heap and n_leaves < config.max_leaves:
        _, _, grown = heapq.heappop(heap)
        split = grown.split
        node = grown.node
        node.value = None
        node.feature = split.feature
        node.threshold_bin = split.threshold_bin
        node.categories_left = split.categories_left
        node.missing_left = split.missing_left

        col = bins[grown.sample_idx, split.feature]
        mask = _route_left_mask(col, split)
        left_idx = grown.sample_idx[mask]
        right_idx = grown.sample_idx[~mask]
        # Build the smaller child directly; derive the sibling by subtraction.
        if left_idx.size <= right_idx.size:
            left_hist = build_histograms(bins, g, h, left_idx, n_bins)
            right_hist = subtract_histograms(grown.hist, left_hist)
        else:
            right_hist = build_histograms(bins, g, h, right_idx, n_bins)
            left_hist = subtract_histograms(grown.hist, right_hist)

        node.left = TreeNode()
        node.right = TreeNode()
        children = (
            _GrowingLeaf(left_idx, grown.depth + 1, left_hist, node.left),
            _GrowingLeaf(right_idx, grown.depth + 1, right_hist, node.right),
        )
        for child in children:
            _finalize_as_leaf(child, g, h, config)
            if child.depth < config.max_depth:
                _push_if_splittable(heap, seq, child, config, feature_kinds)
        n_leaves += 1
    return root


def _finalize_as_leaf(leaf: _GrowingLeaf, g: np.ndarray, h: np.ndarray, config: SplitConfig) -> None:
    g_sum = canonical_sum(g[leaf.sample_idx])
    h_sum = canonical_sum(h[leaf.sample_idx])
    leaf.node.value = leaf_value(g_sum, h_sum, config.l2)


def _push_if_splittable(heap, seq, leaf: _GrowingLeaf, config: SplitConfig, feature_kinds) -> None:
    split = find_best_split(leaf.hist, feature_kinds, config)
    if split is None:
        return
    leaf.split = split
    heapq.heappush(heap, (-split.gain, next(seq), leaf))


def _route_left_mask(col: np.ndarray, split: SplitInfo) -> np.ndarray:
    if split.threshold_bin is not None:
        mask = col <= split.threshold_bin
        if split.missing_left:
            return mask | (col == 0)
        return mask & (col != 0)
    mask = np.isin(col, split.categories_left)
    if split.missing_left:
        return mask | (col == 0)
    return mask


def apply_tree(root: TreeNode, bins: np.ndarray) -> np.ndarray:
    """Leaf value for every row of ``bins``."""
    out = np.empty(bins.shape[0], dtype=np.float64)
    idx = np.arange(bins.shape[0], dtype=np.int64)

    def _descend(node: TreeNode, rows: np.ndarray) -> None:
        if rows.size == 0:
            return
        if node.is_leaf:
            out[rows] = node.value
            return
        split = SplitInfo(
            gain=0.0,
            feature=node.feature,
            threshold_bin=node.threshold_bin,
            categories_left=node.categories_left,
            missing_left=node.missing_left,
        )
        mask = _route_left_mask(bins[rows, node.feature], split)
        _descend(node.left, rows[mask])
        _descend(node.right, rows[~mask])

    _descend(root, idx)
    return out
