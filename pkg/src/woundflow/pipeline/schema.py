"""Label and clinician-variable schemas plus the per-sample record type."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ManifestError

SCHEMA_VERSION = 1

ULCER_TYPES = (
    "Diabetic Ulcer",
    "Pressure Ulcer",
    "Surgical Wound",
    "Trauma Wound",
    "Venous Ulcer",
)
LOCATIONS = ("Lower Leg", "Sacral", "Foot", "Heel", "Ankle", "GreatToe")
STAGES = ("Full Thickness", "Grade 2", "Stage-3", "Stage-4", "Unstageable")
BINARY_TASKS = ("joint_necrosis_exposed", "ligament_bone_necrosis_exposed")
TASKS = ("ulcer_type", "location", "stage") + BINARY_TASKS

OUTCOME_CLASSES = ("Treatment Complete", "Hospitalization-Wound Related")  # 0, 1


@dataclass(frozen=True)
class LabelSchema:
    """Vocabularies of the five image-derived wound variables."""

    ulcer_types: tuple[str, ...] = ULCER_TYPES
    locations: tuple[str, ...] = LOCATIONS
    stages: tuple[str, ...] = STAGES
    binary_tasks: tuple[str, ...] = BINARY_TASKS

    def __post_init__(self):
        for name, values in (
            ("ulcer_types", self.ulcer_types),
            ("locations", self.locations),
            ("stages", self.stages),
            ("binary_tasks", self.binary_tasks),
        ):
            if len(set(values)) != len(values):
                raise ManifestError(f"{name} contains duplicates: {values}")

    @property
    def tasks(self) -> tuple[str, ...]:
        return ("ulcer_type", "location", "stage") + self.binary_tasks

    def classes_for(self, task: str) -> tuple[str, ...]:
        if task == "ulcer_type":
            return self.ulcer_types
        if task == "location":
            return self.locations
        if task == "stage":
            return self.stages
        if task in self.binary_tasks:
            return ("0", "1")
        raise KeyError(f"unknown task {task!r}")

    def label_index(self, task: str, label: str) -> int:
        classes = self.classes_for(task)
        try:
            return classes.index(label)
        except ValueError:
            raise ManifestError(
                f"label {label!r} not in schema for task {task!r}: {classes}"
            ) from None

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "ulcer_types": list(self.ulcer_types),
            "locations": list(self.locations),
            "stages": list(self.stages),
            "binary_tasks": list(self.binary_tasks),
        }

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


# The paper-visible clinician variables plus typed placeholders filling the
# 16-variable panel; order here is the manifest column order.
CLINICIAN_FIELDS: tuple[tuple[str, str], ...] = (
    ("bmi", "numeric"),
    ("tunneling", "bool"),
    ("age", "numeric"),
    ("gender", "categorical"),
    ("wound_area", "numeric"),
    ("wound_volume", "numeric"),
    ("wound_duration_days", "numeric"),
    ("exudate_level", "categorical"),
    ("diabetic_flag", "bool"),
    ("smoking_flag", "bool"),
    ("mobility_score", "numeric"),
    ("albumin_level", "numeric"),
    ("infection_flag", "bool"),
    ("prior_hospitalizations", "numeric"),
    ("medication_count", "numeric"),
    ("dressing_type", "categorical"),
)


@dataclass(frozen=True)
class ClinicianSchema:
    """The 16 clinician-filled tabular variables, name -> kind."""

    fields: tuple[tuple[str, str], ...] = CLINICIAN_FIELDS

    def __post_init__(self):
        names = [n for n, _ in self.fields]
        if len(self.fields) != 16:
            raise ManifestError(f"clinician schema must have 16 fields, got {len(self.fields)}")
        if len(set(names)) != len(names):
            raise ManifestError("clinician field names must be unique")
        kinds = {k for _, k in self.fields}
        if not kinds <= {"numeric", "categorical", "bool"}:
            raise ManifestError(f"invalid clinician field kinds: {kinds}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.fields)

    def kind_of(self, name: str) -> str:
        for n, k in self.fields:
            if n == name:
                return k
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"version": SCHEMA_VERSION, "fields": [list(f) for f in self.fields]}

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class WoundRecord:
    """One sample: image reference, wound-variable labels, clinician panel, outcome.

    Any label may be None (masked) for partially labeled data; clinician
    values may be None for missing entries; ``outcome`` is 0 (treatment
    complete), 1 (wound-related hospitalization) or None.
    """

    sample_id: str
    image_path: str | None = None
    image: np.ndarray | None = None  # [C,H,W] floats in [0,1] once loaded
    labels: dict[str, str | None] = field(default_factory=dict)
    clinician: dict[str, object] = field(default_factory=dict)
    outcome: int | None = None

    def label_or_none(self, task: str) -> str | None:
        return self.labels.get(task)


def manifest_columns(clinician: ClinicianSchema) -> list[str]:
    return (
        ["sample_id", "image_path"]
        + list(TASKS)
        + list(clinician.names)
        + ["outcome"]
    )
