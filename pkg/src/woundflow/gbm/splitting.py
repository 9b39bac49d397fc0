"""Split search over bin histograms.

The split gain is the standard second-order objective reduction:

    gain = 1/2 * [ G_L^2/(H_L + l2) + G_R^2/(H_R + l2)
                   - (G_L + G_R)^2/(H_L + H_R + l2) ] - min_gain

Numeric features scan cumulative bin prefixes in bin order; categorical
features sort occupied categories by G/H and scan that ordering, yielding a
category-subset split. Missing values (bin 0) are routed to whichever side
gives the better gain, ties preferring left. Tie-breaking across candidates
is deterministic: highest gain, then lowest feature id, then lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .histogram import Histograms


@dataclass(frozen=True)
class SplitInfo:
    gain: float
    feature: int
    threshold_bin: int | None = None  # numeric: bins <= threshold go left
    categories_left: tuple[int, ...] | None = None  # categorical: bins going left
    missing_left: bool = True
    # Totals of each side, for child bookkeeping.
    g_left: float = 0.0
    h_left: float = 0.0
    n_left: int = 0
    g_right: float = 0.0
    h_right: float = 0.0
    n_right: int = 0


@dataclass(frozen=True)
class SplitConfig:
    l2: float = 1.0
    min_gain: float = 0.0
    min_child_weight: float = 1e-3
    max_leaves: int = 31
    max_depth: int = 6


def leaf_value(g_sum: float, h_sum: float, l2: float) -> float:
    return -g_sum / (h_sum + l2)


def _side_gain(g: float, h: float, l2: float) -> float:
    return g * g / (h + l2)


def split_gain(
    g_left: float, h_left: float, g_right: float, h_right: float, l2: float, min_gain: float
) -> float:
    total = _side_gain(g_left + g_right, h_left + h_right, l2)
    return 0.5 * (_side_gain(g_left, h_left, l2) + _side_gain(g_right, h_right, l2) - total) - min_gain


def find_best_split(
    hists: Histograms,
    feature_kinds: list[str],
    config: SplitConfig,
) -> SplitInfo | None:
    """Best split over all features, or None when nothing clears min_gain."""
    best: SplitInfo | None = None
    n_features = hists.sum_g.shape[0]
    for f in range(n_features):
        candidate = _best_split_for_feature(
            f,
            hists.sum_g[f],
            hists.sum_h[f],
            hists.count[f],
            feature_kinds[f],
            config,
        )
        if candidate is None:
            continue
        # Strict > keeps the first-found candidate on ties, i.e. the lowest
        # feature id and, within a feature, the lowest threshold.
        if best is None or candidate.gain > best.gain:
            best = candidate
    return best


def _best_split_for_feature(
    feature: int,
    sum_g: np.ndarray,
    sum_h: np.ndarray,
    count: np.ndarray,
    kind: str,
    config: SplitConfig,
) -> SplitInfo | None:
    g_miss, h_miss, n_miss = float(sum_g[0]), float(sum_h[0]), int(count[0])
    occupied = [b for b in range(1, len(count)) if count[b] > 0]
    if len(occupied) + (1 if n_miss else 0) < 2:
        return None

    if kind == "categorical":
        # Gradient-ratio ordering: scan categories as if numeric after
        # sorting by G/H (ascending), ties by bin index.
        ratio = np.array([sum_g[b] / (sum_h[b] + 1e-12) for b in occupied])
        order = np.lexsort((np.array(occupied), ratio))
        scan_bins = [occupied[i] for i in order]
    else:
        scan_bins = occupied

    g_tot = float(sum_g[1:].sum()) + g_miss
    h_tot = float(sum_h[1:].sum()) + h_miss
    n_tot = int(count.sum())

    best: SplitInfo | None = None
    for missing_left in (True, False):
        gl = g_miss if missing_left else 0.0
        hl = h_miss if missing_left else 0.0
        nl = n_miss if missing_left else 0
        # The full prefix is allowed: with missing routed right it yields an
        # "observed vs missing" split; empty sides are pruned below.
        for i, b in enumerate(scan_bins):
            gl += float(sum_g[b])
            hl += float(sum_h[b])
            nl += int(count[b])
            gr, hr, nr = g_tot - gl, h_tot - hl, n_tot - nl
            if nl == 0 or nr == 0:
                continue
            if hl < config.min_child_weight or hr < config.min_child_weight:
                continue
            gain = split_gain(gl, hl, gr, hr, config.l2, config.min_gain)
            if gain <= 0:
                continue
            if best is not None and gain <= best.gain:
                continue
            if kind == "categorical":
                info = SplitInfo(
                    gain=gain,
                    feature=feature,
                    categories_left=tuple(sorted(scan_bins[: i + 1])),
                    missing_left=missing_left,
                    g_left=gl, h_left=hl, n_left=nl,
                    g_right=gr, h_right=hr, n_right=nr,
                )
            else:
                info = SplitInfo(
                    gain=gain,
                    feature=feature,
                    threshold_bin=b,
                    missing_left=missing_left,
                    g_left=gl, h_left=hl, n_left=nl,
                    g_right=gr, h_right=hr, n_right=nr,
                )
            best = info
    return best


def goes_left(bin_value: int, split: SplitInfo) -> bool:
    if bin_value == 0:
        return split.missing_left
    if split.threshold_bin is not None:
        return bin_value <= split.threshold_bin
    return bin_value in split.categories_left
