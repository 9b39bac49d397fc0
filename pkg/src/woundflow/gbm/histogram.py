"""Per-feature gradient/hessian histograms over binned features.

Accumulation order is canonicalized (samples sorted by bin, then gradient,
then hessian) so a histogram is a pure function of the multiset of samples in
the node; permuting training-row order cannot change any sum bit. The sibling
of a split can be obtained by subtracting the built child from its parent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Histograms:
    """sum_g/sum_h/count arrays shaped [n_features, max_bins]."""

    sum_g: np.ndarray
    sum_h: np.ndarray
    count: np.ndarray

    def copy(self) -> "Histograms":
        return Histograms(self.sum_g.copy(), self.sum_h.copy(), self.count.copy())


def build_histograms(
    bins: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    sample_idx: np.ndarray,
    n_bins: int,
) -> Histograms:
    """Build per-feature (sum g, sum h, count) per bin for one node."""
    if sample_idx.size == 0:
        raise ValueError("node sample set must be nonempty")
    n_features = bins.shape[1]
    sum_g = np.zeros((n_features, n_bins), dtype=np.float64)
    sum_h = np.zeros((n_features, n_bins), dtype=np.float64)
    count = np.zeros((n_features, n_bins), dtype=np.int64)
    g_node = g[sample_idx]
    h_node = h[sample_idx]
    for f in range(n_features):
        b = bins[sample_idx, f].astype(np.int64)
        order = np.lexsort((h_node, g_node, b))
        np.add.at(sum_g[f], b[order], g_node[order])
        np.add.at(sum_h[f], b[order], h_node[order])
        count[f] = np.bincount(b, minlength=n_bins)
    return Histograms(sum_g, sum_h, count)


def subtract_histograms(parent: Histograms, child: Histograms) -> Histograms:
    """Sibling histogram as parent minus child (counts exact, sums float)."""
    return Histograms(
        parent.sum_g - child.sum_g,
        parent.sum_h - child.sum_h,
        parent.count - child.count,
    )
