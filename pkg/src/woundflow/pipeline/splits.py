"""Stratified splitting and k-fold cross-validation partitions.

Per-stratum counts come from largest-remainder apportionment, which is
deterministic and exactly testable; sample assignment shuffles each stratum
with the split seed. Strata are processed in sorted label order so results
do not depend on input ordering beyond membership.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .schema import WoundRecord

MIN_STRATUM = 3


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple[float, float, float] = (0.70, 0.10, 0.20)
    stratify_on: str = "ulcer_type"
    seed: int = 0

    def __post_init__(self):
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ConfigError(
                [f"split fractions must sum to 1, got {self.fractions}"]
            )
        if any(f < 0 for f in self.fractions):
            raise ConfigError([f"split fractions must be non-negative: {self.fractions}"])


@dataclass(frozen=True)
class CVSpec:
    folds: int = 5
    stratify_on: str = "ulcer_type"
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigError([f"folds must be >= 2, got {self.folds}"])


def largest_remainder(total: int, fractions: tuple[float, ...]) -> list[int]:
    """Apportion ``total`` into integer counts proportional to ``fractions``.

    Floors the quotas then hands leftover units to the largest remainders;
    remainder ties go to the earlier part.
    """
    quotas = [total * f for f in fractions]
    counts = [int(np.floor(q)) for q in quotas]
    leftover = total - sum(counts)
    remainders = sorted(
        range(len(fractions)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in remainders[:leftover]:
        counts[i] += 1
    return counts


def _strata(records: list[WoundRecord], label_key: str) -> dict[str, list[WoundRecord]]:
    groups: dict[str, list[WoundRecord]] = {}
    for rec in records:
        label = rec.labels.get(label_key)
        groups.setdefault(label if label is not None else "__missing__", []).append(rec)
    return groups


def stratified_split(
    records: list[WoundRecord], spec: SplitSpec
) -> tuple[list[WoundRecord], list[WoundRecord], list[WoundRecord]]:
    """Disjoint, exhaustive (train, val, test) partition preserving strata.

    Falls back to a single unstratified split with a warning when any stratum
    has fewer than three samples.
    """
    groups = _strata(records, spec.stratify_on)
    if any(len(g) < MIN_STRATUM for g in groups.values()):
        small = sorted(k for k, g in groups.items() if len(g) < MIN_STRATUM)
        warnings.warn(
            f"strata {small} have fewer than {MIN_STRATUM} samples; "
            "splitting without stratification",
            RuntimeWarning,
            stacklevel=2,
        )
        groups = {"__all__": list(records)}
    rng = np.random.default_rng(spec.seed)
    parts: tuple[list[WoundRecord], ...] = ([], [], [])
    for label in sorted(groups, key=str):
        members = sorted(groups[label], key=lambda r: r.sample_id)
        order = rng.permutation(len(members))
        shuffled = [members[i] for i in order]
        counts = largest_remainder(len(shuffled), spec.fractions)
        start = 0
        for part, count in zip(parts, counts):
            part.extend(shuffled[start : start + count])
            start += count
    return parts


def kfold(records: list[WoundRecord], spec: CVSpec) -> list[tuple[list[WoundRecord], list[WoundRecord]]]:
    """Stratified k-fold (train, test) pairs; test folds partition the data.

    Within each stratum the fold test-sizes differ by at most one.
    """
    n = len(records)
    if n < spec.folds:
        raise ConfigError([f"need at least {spec.folds} records for {spec.folds}-fold CV, got {n}"])
    groups = _strata(records, spec.stratify_on)
    rng = np.random.default_rng(spec.seed)
    fold_members: list[list[WoundRecord]] = [[] for _ in range(spec.folds)]
    for label in sorted(groups, key=str):
        members = sorted(groups[label], key=lambda r: r.sample_id)
        order = rng.permutation(len(members))
        shuffled = [members[i] for i in order]
        base, extra = divmod(len(shuffled), spec.folds)
        start = 0
        for i in range(spec.folds):
            size = base + (1 if i < extra else 0)
            fold_members[i].extend(shuffled[start : start + size])
            start += size
    out = []
    for i in range(spec.folds):
        test = fold_members[i]
        train = [r for j in range(spec.folds) if j != i for r in fold_members[j]]
        out.append((train, test))
    return out
