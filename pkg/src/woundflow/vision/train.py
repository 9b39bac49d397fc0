"""Training loop for stage-1 models.

Multi-task batches optimize a weighted sum of per-head losses; heads with a
zero weight receive no gradient. The loop records a per-epoch loss curve for
both sets and returns the parameter snapshot with the best validation loss.
Given (seed, data order) the run is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import WoundflowError
from ..nn.losses import one_hot, sigmoid_cross_entropy, softmax_cross_entropy
from ..nn.optim import Adadelta, OptimizerConfig
from .model import MultiTaskModel


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    seed: int = 0
    patience: int | None = None  # early stop on validation loss; None = off

    def __post_init__(self):
        if self.epochs < 1:
            raise WoundflowError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise WoundflowError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class VisionDataset:
    """Images (or embeddings) with per-task integer labels and masks."""

    inputs: np.ndarray  # [N,C,H,W] images in [0,1] or [N,D] embeddings
    labels: dict[str, np.ndarray]  # task -> int labels (garbage where masked)
    masks: dict[str, np.ndarray]  # task -> bool, True where labeled
    sample_ids: list[str]

    def __post_init__(self):
        n = self.inputs.shape[0]
        for task, arr in self.labels.items():
            if arr.shape[0] != n or self.masks[task].shape[0] != n:
                raise WoundflowError(f"label/mask length mismatch for task {task!r}")

    def __len__(self) -> int:
        return self.inputs.shape[0]


@dataclass
class TrainResult:
    train_loss: list[float]
    val_loss: list[float]
    best_epoch: int  # 1-based epoch whose snapshot the model now carries

    @property
    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch - 1]


def _check_dataset(model: MultiTaskModel, data: VisionDataset, name: str) -> None:
    if len(data) == 0:
        raise WoundflowError(f"{name} split is empty")
    for task in model.tasks:
        if task not in data.labels:
            raise WoundflowError(f"{name} split lacks labels for task {task!r}")
        labeled = data.labels[task][data.masks[task]]
        k = model.heads[task].n_classes if model.heads[task].kind == "softmax" else 2
        if labeled.size and (labeled.min() < 0 or labeled.max() >= k):
            raise WoundflowError(
                f"{name} labels for task {task!r} outside [0, {k})"
            )


def _batch_loss_and_grads(
    model: MultiTaskModel,
    batch: np.ndarray,
    labels: dict[str, np.ndarray],
    masks: dict[str, np.ndarray],
    weights: dict[str, float],
    update: bool,
) -> float:
    """Weighted multi-head loss; optionally backprop into parameter grads."""
    emb = model.embed(batch)
    total = 0.0
    grad_emb = np.zeros_like(emb) if update else None
    for task in model.tasks:
        weight = weights[task]
        head = model.heads[task]
        mask = masks[task]
        if not mask.any():
            continue
        logits = head.dense.forward(emb)
        if head.kind == "softmax":
            targets = one_hot(labels[task][mask], head.n_classes)
            loss, grad_logits_m = softmax_cross_entropy(logits[mask], targets)
        else:
            targets = labels[task][mask].astype(np.float64)[:, None]
            loss, grad_logits_m = sigmoid_cross_entropy(logits[mask], targets)
        total += weight * loss
        if update and weight != 0.0:
            grad_logits = np.zeros_like(logits)
            grad_logits[mask] = weight * grad_logits_m
            grad_emb += head.dense.backward(grad_logits)
    if update:
        model.backward_backbone(grad_emb)
    return total


def evaluate_loss(
    model: MultiTaskModel,
    data: VisionDataset,
    weights: dict[str, float],
    batch_size: int = 256,
) -> float:
    """Weighted loss over a whole dataset, batched, without gradients."""
    total, n = 0.0, len(data)
    for start in range(0, n, batch_size):
        sl = slice(start, min(start + batch_size, n))
        size = sl.stop - sl.start
        total += size * _batch_loss_and_grads(
            model,
            data.inputs[sl],
            {t: data.labels[t][sl] for t in model.tasks},
            {t: data.masks[t][sl] for t in model.tasks},
            weights,
            update=False,
        )
    return total / n


def train_model(
    model: MultiTaskModel,
    train_data: VisionDataset,
    val_data: VisionDataset,
    config: TrainConfig,
    loss_weights: dict[str, float] | None = None,
) -> TrainResult:
    """Train in place and restore the best-validation-loss snapshot."""
    _check_dataset(model, train_data, "train")
    _check_dataset(model, val_data, "validation")
    train_ids = set(train_data.sample_ids)
    overlap = train_ids.intersection(val_data.sample_ids)
    if overlap:
        raise WoundflowError(
            f"train and validation sets overlap on {len(overlap)} sample ids"
        )
    weights = {t: 1.0 for t in model.tasks}
    if loss_weights:
        weights.update(loss_weights)

    if not model.backbone_config.embedding_input:
        mean = train_data.inputs.mean(axis=(0, 2, 3))
        std = train_data.inputs.std(axis=(0, 2, 3))
    else:
        mean = train_data.inputs.mean(axis=0)
        std = train_data.inputs.std(axis=0)
    model.set_normalization(mean, np.where(std < 1e-8, 1.0, std))

    optimizer = Adadelta(model.parameters(), config.optimizer)
    rng = np.random.default_rng(config.seed)
    n = len(train_data)
    train_curve: list[float] = []
    val_curve: list[float] = []
    best_val = np.inf
    best_epoch = 0
    best_snapshot = None
    stale = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            optimizer.zero_grad()
            loss = _batch_loss_and_grads(
                model,
                train_data.inputs[idx],
                {t: train_data.labels[t][idx] for t in model.tasks},
                {t: train_data.masks[t][idx] for t in model.tasks},
                weights,
                update=True,
            )
            optimizer.step()
            epoch_loss += loss * idx.size
        train_curve.append(epoch_loss / n)
        val_loss = evaluate_loss(model, val_data, weights)
        val_curve.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_snapshot = model.snapshot()
            stale = 0
        else:
            stale += 1
            if config.patience is not None and stale > config.patience:
                break
    model.restore(best_snapshot)
    return TrainResult(train_loss=train_curve, val_loss=val_curve, best_epoch=best_epoch)
