"""Classification losses and their gradients w.r.t. logits."""

from __future__ import annotations

import numpy as np

from .ops import sigmoid, softmax


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax_cross_entropy(
    logits: np.ndarray, targets_onehot: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean -log p(true class) over the batch, plus gradient w.r.t. logits.

    The gradient of the fused softmax/cross-entropy is (probs - target) / N.
    """
    _check_onehot(targets_onehot, logits.shape)
    n = logits.shape[0]
    logp = _log_softmax(logits)
    loss = -float((targets_onehot * logp).sum()) / n
    grad = (softmax(logits) - targets_onehot) / n
    return loss, grad


def cross_entropy_from_probs(probs: np.ndarray, targets_onehot: np.ndarray) -> tuple[float, np.ndarray]:
    """Cross-entropy evaluated on already-normalized probabilities.

    Returns the loss and the gradient w.r.t. the logits that would have
    produced ``probs`` through a softmax, i.e. (probs - target) / N.
    """
    _check_onehot(targets_onehot, probs.shape)
    n = probs.shape[0]
    p_true = (probs * targets_onehot).sum(axis=-1)
    with np.errstate(divide="ignore"):
        loss = -float(np.log(p_true).sum()) / n
    grad = (probs - targets_onehot) / n
    return loss, grad


def sigmoid_cross_entropy(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Binary cross-entropy on logits with targets in {0, 1}.

    Uses the softplus form so large-magnitude logits do not overflow; the
    gradient is (sigmoid(logits) - target) / N.
    """
    t = np.asarray(targets, dtype=np.float64)
    if t.shape != logits.shape:
        raise ValueError(f"targets shape {t.shape} != logits shape {logits.shape}")
    if t.size and not np.isin(t, (0.0, 1.0)).all():
        raise ValueError("binary targets must be 0 or 1")
    n = logits.shape[0]
    z = np.asarray(logits, dtype=np.float64)
    # max(z,0) - z*t + log(1 + exp(-|z|))
    loss = float((np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))).sum()) / n
    grad = (sigmoid(z) - t) / n
    return loss, grad


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(
            f"target index out of range: labels must lie in [0, {n_classes})"
        )
    out = np.zeros((labels.shape[0], n_classes), dtype=np.float64)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _check_onehot(targets: np.ndarray, shape: tuple[int, ...]) -> None:
    if targets.shape != shape:
        raise ValueError(f"targets shape {targets.shape} != values shape {shape}")
    rows = targets.sum(axis=-1)
    if targets.size and (
        not np.allclose(rows, 1.0) or not np.isin(targets, (0.0, 1.0)).all()
    ):
        raise ValueError("targets must be valid one-hot rows")
