"""Per-class precision/recall/F1 reports and cross-fold aggregation."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import WoundflowError


@dataclass
class EvaluationReport:
    """Confusion matrix plus one-vs-rest metrics for one evaluation run.

    ``confusion[i][j]`` counts samples of true class i predicted as class j,
    so row sums equal class supports. Metrics with a zero denominator are
    reported as 0 and the (class, metric) pair is flagged.
    """

    classes: list[str]
    confusion: list[list[int]]
    precision: list[float]
    recall: list[float]
    f1: list[float]
    support: list[int]
    zero_division_flags: list[str] = field(default_factory=list)

    @property
    def macro_precision(self) -> float:
        return float(np.mean(self.precision)) if self.precision else 0.0

    @property
    def macro_recall(self) -> float:
        return float(np.mean(self.recall)) if self.recall else 0.0

    @property
    def macro_f1(self) -> float:
        return float(np.mean(self.f1)) if self.f1 else 0.0

    def accuracy(self) -> float:
        cm = np.asarray(self.confusion)
        total = cm.sum()
        return float(np.trace(cm) / total) if total else 0.0

    def to_dict(self) -> dict:
        return {
            "classes": self.classes,
            "confusion": self.confusion,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "zero_division_flags": self.zero_division_flags,
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "accuracy": self.accuracy(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        return cls(
            classes=list(data["classes"]),
            confusion=[list(map(int, row)) for row in data["confusion"]],
            precision=list(data["precision"]),
            recall=list(data["recall"]),
            f1=list(data["f1"]),
            support=list(map(int, data["support"])),
            zero_division_flags=list(data.get("zero_division_flags", [])),
        )

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    def write_csv(self, path) -> None:
        """Flat per-class table in Prec/Rec/F1 column order."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["class", "precision", "recall", "f1", "support"])
            for i, name in enumerate(self.classes):
                writer.writerow(
                    [
                        name,
                        f"{self.precision[i]:.6f}",
                        f"{self.recall[i]:.6f}",
                        f"{self.f1[i]:.6f}",
                        self.support[i],
                    ]
                )
            writer.writerow(
                [
                    "macro",
                    f"{self.macro_precision:.6f}",
                    f"{self.macro_recall:.6f}",
                    f"{self.macro_f1:.6f}",
                    sum(self.support),
                ]
            )


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def compute_metrics(y_true, y_pred, classes: list[str]) -> EvaluationReport:
    """One-vs-rest precision/recall/F1 per class, from label sequences."""
    if len(y_true) != len(y_pred):
        raise WoundflowError(
            f"label vectors differ in length: {len(y_true)} vs {len(y_pred)}"
        )
    index = {c: i for i, c in enumerate(classes)}
    k = len(classes)
    cm = np.zeros((k, k), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise WoundflowError(f"true label {t!r} outside class list {classes}")
        if p not in index:
            raise WoundflowError(f"predicted label {p!r} outside class list {classes}")
        cm[index[t], index[p]] += 1
    precision, recall, f1, support = [], [], [], []
    flags: list[str] = []
    for i in range(k):
        tp = int(cm[i, i])
        fp = int(cm[:, i].sum() - tp)
        fn = int(cm[i, :].sum() - tp)
        if tp + fp == 0:
            precision.append(0.0)
            flags.append(f"{classes[i]}:precision")
        else:
            precision.append(tp / (tp + fp))
        if tp + fn == 0:
            recall.append(0.0)
            flags.append(f"{classes[i]}:recall")
        else:
            recall.append(tp / (tp + fn))
        f1.append(f1_score(precision[-1], recall[-1]))
        support.append(tp + fn)
    return EvaluationReport(
        classes=list(classes),
        confusion=cm.tolist(),
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        zero_division_flags=flags,
    )


def aggregate_reports(reports: list[EvaluationReport]) -> dict:
    """Mean and standard deviation of per-class metrics across folds."""
    if not reports:
        raise WoundflowError("no reports to aggregate")
    classes = reports[0].classes
    for r in reports:
        if r.classes != classes:
            raise WoundflowError("cannot aggregate reports with different class lists")
    out: dict = {"classes": classes, "n_folds": len(reports), "per_fold": [], "mean": {}, "std": {}}
    for metric in ("precision", "recall", "f1"):
        values = np.array([getattr(r, metric) for r in reports], dtype=np.float64)
        out["mean"][metric] = values.mean(axis=0).tolist()
        out["std"][metric] = values.std(axis=0).tolist()
    macro = np.array([[r.macro_precision, r.macro_recall, r.macro_f1] for r in reports])
    out["mean"]["macro"] = dict(zip(("precision", "recall", "f1"), macro.mean(axis=0).tolist()))
    out["std"]["macro"] = dict(zip(("precision", "recall", "f1"), macro.std(axis=0).tolist()))
    out["per_fold"] = [r.to_dict() for r in reports]
    return out
