"""Input validation helpers used by the estimator-facing APIs."""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import NonFiniteError, ShapeMismatchError


def check_finite(arr: np.ndarray, name: str = "array") -> np.ndarray:
    """Raise :class:`NonFiniteError` if ``arr`` contains NaN or inf."""
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite values", tensor_name=name)
    return arr


def check_ndim(arr: np.ndarray, ndim: int, name: str = "array") -> np.ndarray:
    if arr.ndim != ndim:
        raise ShapeMismatchError(
            f"{name} must be {ndim}-dimensional, got shape {arr.shape}",
            expected=f"{ndim}d",
            actual=arr.shape,
        )
    return arr


def as_float_array(x, ndim: int | None = None, name: str = "array") -> np.ndarray:
    """Convert to a float64 ndarray, optionally enforcing dimensionality."""
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None:
        check_ndim(arr, ndim, name=name)
    return arr


def check_image_batch(x, name: str = "images") -> np.ndarray:
    """Validate a batch of images shaped [N, C, H, W] with float values."""
    arr = as_float_array(x, ndim=4, name=name)
    if min(arr.shape) < 1:
        raise ShapeMismatchError(
            f"{name} has an empty axis: shape {arr.shape}", actual=arr.shape
        )
    return arr


def check_labels(y, n_classes: int, name: str = "labels") -> np.ndarray:
    """Validate integer class labels in ``[0, n_classes)``."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ShapeMismatchError(
            f"{name} must be 1-dimensional, got shape {arr.shape}", actual=arr.shape
        )
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
        raise ValueError(
            f"{name} must lie in [0, {n_classes}), got range "
            f"[{arr.min()}, {arr.max()}]"
        )
    return arr


def stable_hash64(*parts) -> int:
    """Deterministic 64-bit hash of the given parts.

    Used to derive per-sample RNG streams; unlike builtin ``hash`` it does not
    depend on ``PYTHONHASHSEED``.
    """
    h = hashlib.sha256()
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "little")


def canonical_sum(values: np.ndarray) -> float:
    """Sum that depends only on the multiset of values, not their order."""
    return float(np.sort(np.asarray(values, dtype=np.float64), kind="stable").sum())
