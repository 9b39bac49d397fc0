"""Stage-1 classifier: shared conv backbone with per-task heads.

The backbone is a small configurable conv stack (conv -> relu -> maxpool
blocks, then global average pooling); a single-task model is just a
multi-task model with one head. An alternative "embedding input" mode skips
the conv stack entirely and consumes precomputed feature vectors, preserving
the transfer-learning shape where features come from an external extractor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeMismatchError, UnsupportedModeError, WoundflowError
from ..nn.layers import Conv2d, Dense, GlobalAvgPool, Layer, MaxPool2d, ReLU
from ..nn.ops import sigmoid, softmax
from ..nn.optim import Parameter
from ..pipeline.schema import LabelSchema

DEFAULT_BLOCKS = ((16, 3, 1, True), (32, 3, 1, True), (64, 3, 1, True), (128, 3, 1, True))


@dataclass(frozen=True)
class BackboneConfig:
    """Conv-stack layout: (filters, kernel, stride, pool) per block."""

    input_size: tuple[int, int] = (32, 32)
    channels: int = 3
    blocks: tuple[tuple[int, int, int, bool], ...] = DEFAULT_BLOCKS
    embedding_dim: int = 128
    embedding_input: bool = False

    def __post_init__(self):
        problems = []
        if not self.embedding_input:
            if not self.blocks:
                problems.append("backbone needs at least one block")
            elif self.blocks[-1][0] != self.embedding_dim:
                problems.append(
                    f"embedding_dim ({self.embedding_dim}) must equal the last "
                    f"block's filter count ({self.blocks[-1][0]})"
                )
            h, w = self.input_size
            for filters, kernel, stride, pool in self.blocks:
                h = (h + 2 * (kernel // 2) - kernel) // stride + 1
                w = (w + 2 * (kernel // 2) - kernel) // stride + 1
                if pool:
                    h, w = h // 2, w // 2
                if h < 1 or w < 1:
                    problems.append(
                        f"input size {self.input_size} collapses to zero spatial "
                        f"extent inside the block stack"
                    )
                    break
        if self.embedding_dim < 1:
            problems.append(f"embedding_dim must be positive, got {self.embedding_dim}")
        if problems:
            raise ConfigError(problems)

    def to_dict(self) -> dict:
        return {
            "input_size": list(self.input_size),
            "channels": self.channels,
            "blocks": [list(b) for b in self.blocks],
            "embedding_dim": self.embedding_dim,
            "embedding_input": self.embedding_input,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BackboneConfig":
        return cls(
            input_size=tuple(data["input_size"]),
            channels=data["channels"],
            blocks=tuple(tuple(b) for b in data["blocks"]),
            embedding_dim=data["embedding_dim"],
            embedding_input=data["embedding_input"],
        )


@dataclass
class Head:
    """One task head: a dense layer plus its output kind."""

    dense: Dense
    kind: str  # "softmax" | "sigmoid"
    n_classes: int


class MultiTaskModel:
    """Shared backbone plus named task heads; heads are task-private.

    Training mutates parameters through a single owner; a frozen model only
    runs forward passes and is safe to share across readers.
    """

    def __init__(
        self,
        schema: LabelSchema,
        backbone: BackboneConfig,
        tasks: tuple[str, ...],
        seed: int = 0,
    ):
        if not tasks:
            raise WoundflowError("tasks must be nonempty")
        for task in tasks:
            if task not in schema.tasks:
                raise WoundflowError(f"unknown task {task!r}; schema has {schema.tasks}")
        self.schema = schema
        self.backbone_config = backbone
        self.tasks = tuple(tasks)
        self.seed = seed
        self.norm_mean: np.ndarray | None = None
        self.norm_std: np.ndarray | None = None

        rng = np.random.default_rng(seed)
        self.layers: list[Layer] = []
        if not backbone.embedding_input:
            in_ch = backbone.channels
            for i, (filters, kernel, stride, pool) in enumerate(backbone.blocks):
                self.layers.append(
                    Conv2d(
                        in_ch,
                        filters,
                        kernel,
                        stride=stride,
                        padding=kernel // 2,
                        rng=rng,
                        name=f"block{i}.conv",
                    )
                )
                self.layers.append(ReLU())
                if pool:
                    self.layers.append(MaxPool2d())
                in_ch = filters
            self.layers.append(GlobalAvgPool())

        self.heads: dict[str, Head] = {}
        for task in self.tasks:
            if task in schema.binary_tasks:
                kind, k = "sigmoid", 1
            else:
                kind, k = "softmax", len(schema.classes_for(task))
            self.heads[task] = Head(
                dense=Dense(backbone.embedding_dim, k, rng=rng, name=f"head.{task}"),
                kind=kind,
                n_classes=k,
            )

    # -- parameters ----------------------------------------------------------

    def parameters(self) -> list[Parameter]:
        params: list[Parameter] = []
        for layer in self.layers:
            params.extend(layer.parameters())
        for task in self.tasks:
            params.extend(self.heads[task].dense.parameters())
        return params

    def snapshot(self) -> list[dict]:
        return [p.copy_state() for p in self.parameters()]

    def restore(self, snapshot: list[dict]) -> None:
        for p, state in zip(self.parameters(), snapshot):
            p.restore_state(state)

    # -- normalization ---------------------------------------------------------

    def set_normalization(self, mean: np.ndarray, std: np.ndarray) -> None:
        self.norm_mean = np.asarray(mean, dtype=np.float64)
        self.norm_std = np.asarray(std, dtype=np.float64)

    def normalize(self, batch: np.ndarray) -> np.ndarray:
        if self.norm_mean is None:
            return batch
        if self.backbone_config.embedding_input:
            return (batch - self.norm_mean) / self.norm_std
        return (batch - self.norm_mean[None, :, None, None]) / self.norm_std[None, :, None, None]

    # -- forward ---------------------------------------------------------------

    def _check_batch(self, batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=np.float64)
        if self.backbone_config.embedding_input:
            if batch.ndim != 2 or batch.shape[1] != self.backbone_config.embedding_dim:
                raise ShapeMismatchError(
                    f"expected embeddings [N, {self.backbone_config.embedding_dim}], "
                    f"got {batch.shape}",
                    expected=(None, self.backbone_config.embedding_dim),
                    actual=batch.shape,
                )
            return batch
        expect = (self.backbone_config.channels,) + tuple(self.backbone_config.input_size)
        if batch.ndim != 4 or batch.shape[1:] != expect:
            raise ShapeMismatchError(
                f"expected image batch [N, {expect[0]}, {expect[1]}, {expect[2]}], "
                f"got {batch.shape}",
                expected=expect,
                actual=batch.shape,
            )
        return batch

    def embed(self, batch: np.ndarray) -> np.ndarray:
        """Backbone forward to the shared embedding (caches for backward)."""
        x = self.normalize(self._check_batch(batch))
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward_logits(self, batch: np.ndarray) -> dict[str, np.ndarray]:
        emb = self.embed(batch)
        return {task: self.heads[task].dense.forward(emb) for task in self.tasks}

    def forward(self, batch: np.ndarray) -> dict[str, np.ndarray]:
        """Per-task probabilities; softmax rows sum to 1, sigmoid in (0,1)."""
        logits = self.forward_logits(batch)
        out: dict[str, np.ndarray] = {}
        for task, z in logits.items():
            head = self.heads[task]
            out[task] = softmax(z) if head.kind == "softmax" else sigmoid(z)
        return out

    def backward_backbone(self, grad_embedding: np.ndarray) -> None:
        for layer in reversed(self.layers):
            grad_embedding = layer.backward(grad_embedding)

    # -- activation access for class-activation maps ---------------------------

    def conv_feature_and_gradient(
        self, image: np.ndarray, task: str, class_id: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """Last conv block's activation A and d(class logit)/dA for one image.

        A is the post-ReLU output of the final conv layer (before its pooling
        stage); gradients flow back from the head through global pooling and
        any intervening pool layers. Unsupported in embedding-input mode.
        """
        if self.backbone_config.embedding_input:
            raise UnsupportedModeError(
                "class-activation maps need a conv backbone; this model "
                "consumes precomputed embeddings"
            )
        head = self.heads[task]
        if not 0 <= class_id < head.n_classes:
            raise WoundflowError(
                f"class id {class_id} out of range for task {task!r} "
                f"({head.n_classes} outputs)"
            )
        batch = image[None] if image.ndim == 3 else image
        x = self.normalize(self._check_batch(batch))
        last_relu = max(
            i for i, layer in enumerate(self.layers) if isinstance(layer, ReLU)
        )
        activations: np.ndarray | None = None
        for i, layer in enumerate(self.layers):
            x = layer.forward(x)
            if i == last_relu:
                activations = x
        grad = head.dense.weight.value[:, class_id][None, :]
        for layer in reversed(self.layers[last_relu + 1 :]):
            grad = layer.backward(grad)
        return activations[0], grad[0]

    def pooled_feature(self, image: np.ndarray) -> np.ndarray:
        """Activation entering global average pooling, for pure-CAM mode."""
        if self.backbone_config.embedding_input:
            raise UnsupportedModeError(
                "class-activation maps need a conv backbone; this model "
                "consumes precomputed embeddings"
            )
        batch = image[None] if image.ndim == 3 else image
        x = self.normalize(self._check_batch(batch))
        for layer in self.layers[:-1]:  # stop before GlobalAvgPool
            x = layer.forward(x)
        return x[0]
