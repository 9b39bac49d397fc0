"""Layer objects wrapping the functional ops with parameter storage.

The network architecture here is fixed and small, so backpropagation is
hand-wired: each layer caches what its backward needs during forward and
``backward`` consumes that cache. Layers are single-writer during training;
a frozen model only ever calls ``forward``.
"""

from __future__ import annotations

import numpy as np

from ..errors import WoundflowError
from . import ops
from .optim import Parameter


class MissingForwardCacheError(WoundflowError):
    """backward() was called before forward() populated the cache."""


def he_uniform(shape: tuple[int, ...], fan_in: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    def parameters(self) -> list[Parameter]:
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cache_or_raise(self, cache, what: str):
        if cache is None:
            raise MissingForwardCacheError(
                f"{type(self).__name__}.backward needs a prior forward ({what})"
            )
        return cache


class Conv2d(Layer):
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        stride: int = 1,
        padding: int = 0,
        rng: np.random.Generator | None = None,
        name: str = "conv",
    ):
        self.stride = stride
        self.padding = padding
        fan_in = in_channels * kernel_size * kernel_size
        rng = rng or np.random.default_rng(0)
        w = he_uniform((out_channels, in_channels, kernel_size, kernel_size), fan_in, rng)
        self.weight = Parameter(w, name=f"{name}.weight")
        self.bias = Parameter(np.zeros(out_channels), name=f"{name}.bias")
        self._x: np.ndarray | None = None

    def parameters(self) -> list[Parameter]:
        return [self.weight, self.bias]

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return ops.conv2d(x, self.weight.value, self.bias.value, self.stride, self.padding)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x = self._cache_or_raise(self._x, "input")
        gx, gw, gb = ops.conv2d_backward(grad_out, x, self.weight.value, self.stride, self.padding)
        self.weight.grad = gw if self.weight.grad is None else self.weight.grad + gw
        self.bias.grad = gb if self.bias.grad is None else self.bias.grad + gb
        return gx


class ReLU(Layer):
    def __init__(self):
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return ops.relu(x)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x = self._cache_or_raise(self._x, "input")
        return ops.relu_backward(grad_out, x)


class MaxPool2d(Layer):
    def __init__(self):
        self._idx: np.ndarray | None = None
        self._x_shape: tuple[int, ...] | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        out, idx = ops.max_pool2d(x)
        self._idx = idx
        self._x_shape = x.shape
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        idx = self._cache_or_raise(self._idx, "argmax indices")
        return ops.max_pool2d_backward(grad_out, idx, self._x_shape)


class GlobalAvgPool(Layer):
    def __init__(self):
        self._x_shape: tuple[int, ...] | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x_shape = x.shape
        return ops.global_avg_pool(x)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        shape = self._cache_or_raise(self._x_shape, "input shape")
        return ops.global_avg_pool_backward(grad_out, shape)


class Dense(Layer):
    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: np.random.Generator | None = None,
        name: str = "dense",
    ):
        rng = rng or np.random.default_rng(0)
        w = he_uniform((in_features, out_features), in_features, rng)
        self.weight = Parameter(w, name=f"{name}.weight")
        self.bias = Parameter(np.zeros(out_features), name=f"{name}.bias")
        self._x: np.ndarray | None = None

    def parameters(self) -> list[Parameter]:
        return [self.weight, self.bias]

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return ops.dense(x, self.weight.value, self.bias.value)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x = self._cache_or_raise(self._x, "input")
        gx, gw, gb = ops.dense_backward(grad_out, x, self.weight.value)
        self.weight.grad = gw if self.weight.grad is None else self.weight.grad + gw
        self.bias.grad = gb if self.bias.grad is None else self.bias.grad + gb
        return gx
