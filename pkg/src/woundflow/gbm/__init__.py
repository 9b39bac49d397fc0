from .binning import BinnedDataset, FeatureBinner, FeatureBins, bin_features
from .boosting import GradientBoostedTreesClassifier, gradients_logistic, logloss
from .grower import TreeNode, apply_tree, grow_tree
from .histogram import Histograms, build_histograms, subtract_histograms
from .splitting import SplitConfig, SplitInfo, find_best_split, leaf_value, split_gain

__all__ = [
    "BinnedDataset",
    "FeatureBinner",
    "FeatureBins",
    "GradientBoostedTreesClassifier",
    "Histograms",
    "SplitConfig",
    "SplitInfo",
    "TreeNode",
    "apply_tree",
    "bin_features",
    "build_histograms",
    "find_best_split",
    "gradients_logistic",
    "grow_tree",
    "leaf_value",
    "logloss",
    "split_gain",
    "subtract_histograms",
]
