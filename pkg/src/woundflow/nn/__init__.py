from .layers import Conv2d, Dense, GlobalAvgPool, Layer, MaxPool2d, ReLU
from .losses import (
    cross_entropy_from_probs,
    one_hot,
    sigmoid_cross_entropy,
    softmax_cross_entropy,
)
from .ops import (
    conv2d,
    conv2d_backward,
    dense,
    dense_backward,
    global_avg_pool,
    global_avg_pool_backward,
    max_pool2d,
    max_pool2d_backward,
    relu,
    relu_backward,
    sigmoid,
    softmax,
)
from .optim import Adadelta, OptimizerConfig, Parameter, adadelta_step

__all__ = [
    "Adadelta",
    "Conv2d",
    "Dense",
    "GlobalAvgPool",
    "Layer",
    "MaxPool2d",
    "OptimizerConfig",
    "Parameter",
    "ReLU",
    "adadelta_step",
    "conv2d",
    "conv2d_backward",
    "cross_entropy_from_probs",
    "dense",
    "dense_backward",
    "global_avg_pool",
    "global_avg_pool_backward",
    "max_pool2d",
    "max_pool2d_backward",
    "one_hot",
    "relu",
    "relu_backward",
    "sigmoid",
    "sigmoid_cross_entropy",
    "softmax",
    "softmax_cross_entropy",
]
