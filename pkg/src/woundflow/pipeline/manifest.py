"""Manifest CSV ingestion and writing, plus image loading.

The manifest is UTF-8 CSV whose header must match the schema column order
exactly; empty fields mean missing. Images are referenced by path relative to
an image root; ``.npy`` paths hold precomputed embedding vectors for the
embedding-input backbone mode.
"""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import ManifestError
from .schema import (
    BINARY_TASKS,
    OUTCOME_CLASSES,
    TASKS,
    ClinicianSchema,
    LabelSchema,
    WoundRecord,
    manifest_columns,
)

MAX_BAD_ROW_FRACTION = 0.01


def load_manifest(
    csv_path,
    image_root=None,
    schema: LabelSchema | None = None,
    clinician: ClinicianSchema | None = None,
    check_images: bool = True,
) -> list[WoundRecord]:
    """Parse and validate a manifest CSV into records.

    Rows with unreadable images are collected and dropped; the load aborts if
    they exceed 1% of the data rows.
    """
    schema = schema or LabelSchema()
    clinician = clinician or ClinicianSchema()
    csv_path = Path(csv_path)
    image_root = Path(image_root) if image_root is not None else csv_path.parent
    expected = manifest_columns(clinician)
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{csv_path} is empty; expected a header row") from None
        if header != expected:
            missing = [c for c in expected if c not in header]
            extra = [c for c in header if c not in expected]
            raise ManifestError(
                f"manifest header mismatch: missing columns {missing}, "
                f"extra columns {extra}, expected order {expected}"
            )
        rows = list(reader)

    records: list[WoundRecord] = []
    seen: set[str] = set()
    bad: list[str] = []
    for line_no, row in enumerate(rows, start=2):
        if len(row) != len(expected):
            raise ManifestError(
                f"{csv_path}:{line_no}: expected {len(expected)} fields, got {len(row)}"
            )
        values = dict(zip(expected, row))
        sid = values["sample_id"]
        if not sid:
            raise ManifestError(f"{csv_path}:{line_no}: empty sample_id")
        if sid in seen:
            raise ManifestError(f"duplicate sample_id {sid!r} at line {line_no}")
        seen.add(sid)

        labels: dict[str, str | None] = {}
        for task in TASKS:
            raw = values[task]
            if raw == "":
                labels[task] = None
            else:
                if task in BINARY_TASKS and raw not in ("0", "1"):
                    raise ManifestError(
                        f"{csv_path}:{line_no}: {task} must be 0/1 or empty, got {raw!r}"
                    )
                if task not in BINARY_TASKS:
                    schema.label_index(task, raw)  # raises on unknown label
                labels[task] = raw

        clin: dict[str, object] = {}
        for name in clinician.names:
            raw = values[name]
            if raw == "":
                clin[name] = None
                continue
            kind = clinician.kind_of(name)
            if kind == "numeric":
                try:
                    val = float(raw)
                except ValueError:
                    raise ManifestError(
                        f"{csv_path}:{line_no}: {name} must be numeric, got {raw!r}"
                    ) from None
                if not np.isfinite(val):
                    raise ManifestError(f"{csv_path}:{line_no}: {name} is not finite")
                clin[name] = val
            elif kind == "bool":
                if raw not in ("0", "1"):
                    raise ManifestError(
                        f"{csv_path}:{line_no}: {name} must be 0/1 or empty, got {raw!r}"
                    )
                clin[name] = bool(int(raw))
            else:
                clin[name] = raw

        outcome_raw = values["outcome"]
        if outcome_raw == "":
            outcome = None
        elif outcome_raw in OUTCOME_CLASSES:
            outcome = OUTCOME_CLASSES.index(outcome_raw)
        else:
            raise ManifestError(
                f"{csv_path}:{line_no}: outcome must be one of {OUTCOME_CLASSES} "
                f"or empty, got {outcome_raw!r}"
            )

        image_path = values["image_path"] or None
        if image_path is not None and check_images:
            full = image_root / image_path
            if not _image_readable(full):
                bad.append(sid)
                continue
        records.append(
            WoundRecord(
                sample_id=sid,
                image_path=image_path,
                labels=labels,
                clinician=clin,
                outcome=outcome,
            )
        )

    if rows and len(bad) / len(rows) > MAX_BAD_ROW_FRACTION:
        raise ManifestError(
            f"{len(bad)} of {len(rows)} rows have unreadable images "
            f"(> {MAX_BAD_ROW_FRACTION:.0%}); first failures: {bad[:5]}"
        )
    if bad:
        warnings.warn(
            f"dropped {len(bad)} rows with unreadable images: {bad[:5]}",
            RuntimeWarning,
            stacklevel=2,
        )
    return records


def write_manifest(records: list[WoundRecord], csv_path, clinician: ClinicianSchema | None = None) -> None:
    clinician = clinician or ClinicianSchema()
    columns = manifest_columns(clinician)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in records:
            row = [rec.sample_id, rec.image_path or ""]
            for task in TASKS:
                row.append(rec.labels.get(task) or "")
            for name in clinician.names:
                val = rec.clinician.get(name)
                if val is None:
                    row.append("")
                elif clinician.kind_of(name) == "bool":
                    row.append(str(int(val)))
                elif clinician.kind_of(name) == "numeric":
                    row.append(repr(float(val)))
                else:
                    row.append(str(val))
            row.append("" if rec.outcome is None else OUTCOME_CLASSES[rec.outcome])
            writer.writerow(row)


def _image_readable(path: Path) -> bool:
    if not path.exists():
        return False
    if path.suffix == ".npy":
        try:
            np.load(path, mmap_mode="r")
            return True
        except Exception:
            return False
    try:
        with Image.open(path) as img:
            img.verify()
        return True
    except Exception:
        return False


def load_image(path, image_root=None) -> np.ndarray:
    """Load an image file (or .npy embedding) as float64 in [0, 1].

    Images come back channel-first [C,H,W]; embeddings come back 1-d.
    """
    full = Path(image_root) / path if image_root is not None else Path(path)
    if full.suffix == ".npy":
        return np.asarray(np.load(full), dtype=np.float64)
    with Image.open(full) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return arr.transpose(2, 0, 1)


def attach_images(records: list[WoundRecord], image_root) -> list[WoundRecord]:
    """Populate ``record.image`` in place for records that reference files."""
    for rec in records:
        if rec.image is None and rec.image_path is not None:
            rec.image = load_image(rec.image_path, image_root)
    return records
