"""Dense-tensor operations with hand-written backward passes.

Every backward here returns the exact gradient of its forward map; the test
suite checks each one against central finite differences in float64. All
functions are pure and deterministic for identical inputs.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteError, ShapeMismatchError


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int, oh: int, ow: int) -> np.ndarray:
    """Unfold padded input [N,C,H,W] into [N, C*kh*kw, oh*ow] patch columns."""
    n, c = xp.shape[:2]
    cols = np.empty((n, c, kh, kw, oh, ow), dtype=xp.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride]
    return cols.reshape(n, c * kh * kw, oh * ow)


def _col2im(
    gcols: np.ndarray,
    x_shape: tuple[int, ...],
    kh: int,
    kw: int,
    stride: int,
    padding: int,
    oh: int,
    ow: int,
) -> np.ndarray:
    """Fold patch-column gradients back onto the (unpadded) input."""
    n, c, h, w = x_shape
    gview = gcols.reshape(n, c, kh, kw, oh, ow)
    gxp = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=gcols.dtype)
    for i in range(kh):
        for j in range(kw):
            gxp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += gview[:, :, i, j]
    if padding:
        return gxp[:, :, padding : padding + h, padding : padding + w]
    return gxp


def conv2d(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray,
    stride: int = 1,
    padding: int = 0,
) -> np.ndarray:
    """Cross-correlation of ``x`` [N,C,H,W] with ``weight`` [F,C,kH,kW].

    Zero padding, no kernel flip. Output is [N,F,H',W'] with
    H' = floor((H + 2*padding - kH)/stride) + 1 and likewise W'.
    """
    n, c, h, w = x.shape
    f, ck, kh, kw = weight.shape
    if ck != c:
        raise ShapeMismatchError(
            f"input has {c} channels (shape {x.shape}) but kernel expects "
            f"{ck} (shape {weight.shape})",
            expected=weight.shape,
            actual=x.shape,
        )
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if kh > h + 2 * padding or kw > w + 2 * padding:
        raise ShapeMismatchError(
            f"kernel {kh}x{kw} larger than padded input "
            f"{h + 2 * padding}x{w + 2 * padding}",
            expected=(kh, kw),
            actual=(h + 2 * padding, w + 2 * padding),
        )
    oh = conv_output_size(h, kh, stride, padding)
    ow = conv_output_size(w, kw, stride, padding)
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x
    cols = _im2col(xp, kh, kw, stride, oh, ow)
    w2 = weight.reshape(f, c * kh * kw)
    out = np.matmul(w2, cols)  # [N, F, oh*ow]
    out = out.reshape(n, f, oh, ow)
    out += bias[None, :, None, None]
    return out


def conv2d_backward(
    grad_out: np.ndarray,
    x: np.ndarray,
    weight: np.ndarray,
    stride: int = 1,
    padding: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of :func:`conv2d` w.r.t. input, weight and bias."""
    n, c, h, w = x.shape
    f, _, kh, kw = weight.shape
    oh = conv_output_size(h, kh, stride, padding)
    ow = conv_output_size(w, kw, stride, padding)
    if grad_out.shape != (n, f, oh, ow):
        raise ShapeMismatchError(
            f"grad_out shape {grad_out.shape} does not match forward output "
            f"{(n, f, oh, ow)}",
            expected=(n, f, oh, ow),
            actual=grad_out.shape,
        )
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x
    cols = _im2col(xp, kh, kw, stride, oh, ow)
    g2 = grad_out.reshape(n, f, oh * ow)
    grad_bias = grad_out.sum(axis=(0, 2, 3))
    grad_weight = np.tensordot(g2, cols, axes=([0, 2], [0, 2])).reshape(weight.shape)
    w2 = weight.reshape(f, c * kh * kw)
    gcols = np.matmul(w2.T, g2)  # [N, C*kh*kw, oh*ow]
    grad_x = _col2im(gcols, x.shape, kh, kw, stride, padding, oh, ow)
    return grad_x, grad_weight, grad_bias


def max_pool2d(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x2/stride-2 max pooling. Returns (output, argmax) for the backward.

    Odd trailing rows/columns are dropped. Ties go to the first position in
    row-major window order, which keeps the op deterministic.
    """
    n, c, h, w = x.shape
    oh, ow = h // 2, w // 2
    xv = x[:, :, : 2 * oh, : 2 * ow]
    windows = (
        xv.reshape(n, c, oh, 2, ow, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, oh, ow, 4)
    )
    idx = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
    return out, idx


def max_pool2d_backward(grad_out: np.ndarray, idx: np.ndarray, x_shape: tuple[int, ...]) -> np.ndarray:
    n, c, h, w = x_shape
    oh, ow = h // 2, w // 2
    gwin = np.zeros((n, c, oh, ow, 4), dtype=grad_out.dtype)
    np.put_along_axis(gwin, idx[..., None], grad_out[..., None], axis=-1)
    gx = np.zeros(x_shape, dtype=grad_out.dtype)
    gx[:, :, : 2 * oh, : 2 * ow] = (
        gwin.reshape(n, c, oh, ow, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * oh, 2 * ow)
    )
    return gx


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    return grad_out * (x > 0)


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    """Mean over the spatial axes: [N,C,H,W] -> [N,C]."""
    if x.ndim != 4:
        raise ShapeMismatchError(
            f"expected [N,C,H,W], got shape {x.shape}", actual=x.shape
        )
    return x.mean(axis=(2, 3))


def global_avg_pool_backward(grad_out: np.ndarray, x_shape: tuple[int, ...]) -> np.ndarray:
    n, c, h, w = x_shape
    scale = 1.0 / (h * w)
    return np.broadcast_to(grad_out[:, :, None, None], x_shape) * scale


def dense(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map x @ W + b for x [N,D], W [D,K], b [K]."""
    if x.shape[1] != weight.shape[0]:
        raise ShapeMismatchError(
            f"inner dimensions differ: input {x.shape} vs weight {weight.shape}",
            expected=weight.shape,
            actual=x.shape,
        )
    return x @ weight + bias


def dense_backward(
    grad_out: np.ndarray, x: np.ndarray, weight: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    grad_x = grad_out @ weight.T
    grad_weight = x.T @ grad_out
    grad_bias = grad_out.sum(axis=0)
    return grad_x, grad_weight, grad_bias


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction for stability.

    Rows sum to 1 within 1e-12 and the result is shift-invariant.
    """
    if np.isnan(logits).any():
        raise NonFiniteError("softmax received NaN logits", tensor_name="logits")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    if np.isnan(x).any():
        raise NonFiniteError("sigmoid received NaN input", tensor_name="logits")
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
