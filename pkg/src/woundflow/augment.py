"""Seeded image augmentation and minority-class rebalancing.

Rotations are restricted to 90-degree multiples and flips to axis mirrors so
they are exact pixel permutations; only the random-scale path interpolates.
Everything is deterministic under the policy seed, with per-sample RNG streams
derived from (seed, sample_id) so processing order cannot change results.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .validation import stable_hash64

_ROTATIONS = (90, 180, 270)
_FLIPS = ("horizontal", "vertical")


@dataclass(frozen=True)
class AugmentPolicy:
    rotations: tuple[int, ...] = _ROTATIONS
    flips: tuple[str, ...] = _FLIPS
    scale_range: tuple[float, float] = (0.9, 1.1)
    target_size: tuple[int, int] = (32, 32)
    rebalance: bool = True
    seed: int = 0

    def __post_init__(self):
        problems = []
        if any(r not in _ROTATIONS for r in self.rotations):
            problems.append(f"rotations must be from {_ROTATIONS}, got {self.rotations}")
        if any(f not in _FLIPS for f in self.flips):
            problems.append(f"flips must be from {_FLIPS}, got {self.flips}")
        lo, hi = self.scale_range
        if not (0 < lo <= 1 <= hi):
            problems.append(f"scale_range must satisfy 0 < lo <= 1 <= hi, got {self.scale_range}")
        if min(self.target_size) < 1:
            problems.append(f"target_size must be positive, got {self.target_size}")
        if problems:
            raise ConfigError(problems)


def rotate90k(image: np.ndarray, k: int) -> np.ndarray:
    """Rotate by k*90 degrees counterclockwise; exact pixel permutation.

    ``image`` is [C,H,W] or [H,W]; the spatial axes transpose for odd k.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"k must be 1, 2 or 3, got {k}")
    return np.ascontiguousarray(np.rot90(image, k=k, axes=(-2, -1)))


def flip(image: np.ndarray, axis: str) -> np.ndarray:
    """Mirror along the given axis; an exact, involutive permutation."""
    if axis == "horizontal":
        return np.ascontiguousarray(np.flip(image, axis=-1))
    if axis == "vertical":
        return np.ascontiguousarray(np.flip(image, axis=-2))
    raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")


def resize_bilinear(image: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Bilinear resize with half-pixel centers.

    Source coordinates are (dst + 0.5) * (src/dst) - 0.5, clamped to the
    image; constant images stay constant to within float rounding.
    """
    th, tw = target
    if th < 1 or tw < 1:
        raise ValueError(f"target dims must be positive, got {target}")
    arr = np.asarray(image, dtype=np.float64)
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[None]
    c, h, w = arr.shape

    def _axis_weights(dst: int, src: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pos = (np.arange(dst) + 0.5) * (src / dst) - 0.5
        pos = np.clip(pos, 0.0, src - 1.0)
        lo = np.floor(pos).astype(np.int64)
        hi = np.minimum(lo + 1, src - 1)
        frac = pos - lo
        return lo, hi, frac

    ylo, yhi, yf = _axis_weights(th, h)
    xlo, xhi, xf = _axis_weights(tw, w)
    top = arr[:, ylo][:, :, xlo] * (1 - xf) + arr[:, ylo][:, :, xhi] * xf
    bot = arr[:, yhi][:, :, xlo] * (1 - xf) + arr[:, yhi][:, :, xhi] * xf
    out = top * (1 - yf[None, :, None]) + bot * yf[None, :, None]
    return out[0] if squeeze else out


def scale_jitter(image: np.ndarray, scale: float, target: tuple[int, int]) -> np.ndarray:
    """Resize by ``scale`` then center-crop (scale > 1) or edge-pad back to target."""
    th, tw = target
    sh = max(1, int(round(th * scale)))
    sw = max(1, int(round(tw * scale)))
    scaled = resize_bilinear(image, (sh, sw))
    if sh >= th:
        y0 = (sh - th) // 2
        x0 = (sw - tw) // 2
        return np.ascontiguousarray(scaled[..., y0 : y0 + th, x0 : x0 + tw])
    pad_y = th - sh
    pad_x = tw - sw
    pads = [(0, 0)] * (scaled.ndim - 2) + [
        (pad_y // 2, pad_y - pad_y // 2),
        (pad_x // 2, pad_x - pad_x // 2),
    ]
    return np.pad(scaled, pads, mode="edge")


@dataclass(frozen=True)
class Transform:
    """One grid element: rotation (degrees, 0 = none) then optional flip."""

    rotation: int = 0
    flip_axis: str | None = None
    scale: float | None = None

    def apply(self, image: np.ndarray, target: tuple[int, int]) -> np.ndarray:
        out = image
        if self.rotation:
            out = rotate90k(out, self.rotation // 90)
        if self.flip_axis:
            out = flip(out, self.flip_axis)
        if self.scale is not None:
            out = scale_jitter(out, self.scale, target)
        if out.shape[-2:] != tuple(target):
            out = resize_bilinear(out, target)
        return out

    def tag(self) -> str:
        parts = [f"r{self.rotation}"]
        if self.flip_axis:
            parts.append(self.flip_axis[0])
        if self.scale is not None:
            parts.append(f"s{self.scale:.4f}")
        return "".join(parts)


def transform_grid(policy: AugmentPolicy) -> list[Transform]:
    """All non-identity rotation x flip combinations, in a fixed order."""
    grid = []
    for rot in (0,) + tuple(policy.rotations):
        for fl in (None,) + tuple(policy.flips):
            if rot == 0 and fl is None:
                continue
            grid.append(Transform(rotation=rot, flip_axis=fl))
    return grid


@dataclass
class AugmentedSample:
    """An image plus everything rebalancing must carry through unchanged."""

    sample_id: str
    image: np.ndarray
    label: str | int
    payload: object = None
    source_id: str | None = None  # set on augmented copies

    def origin(self) -> str:
        return self.source_id if self.source_id is not None else self.sample_id


def rebalance(samples: list[AugmentedSample], policy: AugmentPolicy) -> list[AugmentedSample]:
    """Augment minority classes up to the majority class count.

    For each minority class, (sample, transform) pairs are consumed in a fixed
    order: the rotation/flip grid first for every sample, then random-scale
    variants drawn from the sample's own seeded stream. No identical
    (sample, transform) pair is emitted twice. Labels and payloads are copied
    verbatim; only the image changes.
    """
    by_class: dict[object, list[AugmentedSample]] = {}
    for s in samples:
        by_class.setdefault(s.label, []).append(s)
    for label, members in by_class.items():
        if not members:
            raise ValueError(f"class {label!r} has no samples")
    if not by_class:
        return []
    target = max(len(m) for m in by_class.values())
    grid = transform_grid(policy)
    out = list(samples)
    for label in sorted(by_class, key=str):
        members = sorted(by_class[label], key=lambda s: s.sample_id)
        needed = target - len(members)
        if needed <= 0:
            continue
        emitted = 0
        round_idx = 0
        scale_draws: dict[str, int] = {}
        while emitted < needed:
            for src in members:
                if emitted >= needed:
                    break
                if round_idx < len(grid):
                    tf = grid[round_idx]
                else:
                    draw = scale_draws.get(src.sample_id, 0)
                    scale_draws[src.sample_id] = draw + 1
                    rng = np.random.default_rng(
                        stable_hash64(policy.seed, src.sample_id, draw)
                    )
                    lo, hi = policy.scale_range
                    base = grid[int(rng.integers(len(grid)))] if grid else Transform()
                    tf = replace(base, scale=float(rng.uniform(lo, hi)))
                image = tf.apply(src.image, policy.target_size)
                out.append(
                    AugmentedSample(
                        sample_id=f"{src.sample_id}#a{round_idx}-{tf.tag()}",
                        image=image,
                        label=src.label,
                        payload=src.payload,
                        source_id=src.origin(),
                    )
                )
                emitted += 1
            round_idx += 1
    return out


def class_counts(samples: list[AugmentedSample]) -> dict[object, int]:
    counts: dict[object, int] = {}
    for s in samples:
        counts[s.label] = counts.get(s.label, 0) + 1
    return counts
