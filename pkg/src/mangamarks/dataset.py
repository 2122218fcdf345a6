"""Face record ingestion, selection filtering, cropping and splitting.

The manifest is line-delimited JSON, one record per line:

    {"id": "...", "image": "relative/path.png", "bbox": [x, y, w, h],
     "flags": ["profile", ...],
     "annotations": [{"labeler": "a", "points": [[x, y] | null] * 60}],
     "merged": [[x, y] | null] * 60 | null,
     "completed": [[x, y] | null] * 60 | null}

A null coordinate entry encodes an absent landmark.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ManifestError
from .geometry import DEFAULT_CANVAS, SimilarityTransform, warp_image
from .schema import NUM_LANDMARKS, LandmarkSet

MIN_BOX_SIDE = 80

MANUAL_EXCLUSION_FLAGS = ("profile", "too-small", "inhuman-features", "occluded-eyes")


def landmarks_to_json(landmarks: LandmarkSet | None):
    if landmarks is None:
        return None
    return [
        [float(x), float(y)] if present else None
        for (x, y), present in zip(landmarks.points, landmarks.present)
    ]


def landmarks_from_json(entries) -> LandmarkSet:
    if len(entries) != NUM_LANDMARKS:
        raise ManifestError(f"expected 60 landmark entries, got {len(entries)}")
    points = np.zeros((NUM_LANDMARKS, 2))
    present = np.zeros(NUM_LANDMARKS, dtype=bool)
    for i, entry in enumerate(entries):
        if entry is not None:
            points[i] = entry
            present[i] = True
    return LandmarkSet(points, present)


@dataclass
class FaceRecord:
    record_id: str
    image_path: Path
    bbox: tuple[float, float, float, float]  # x, y, w, h
    flags: list[str] = field(default_factory=list)
    annotations: dict[str, LandmarkSet] = field(default_factory=dict)
    merged: LandmarkSet | None = None
    completed: LandmarkSet | None = None

    @property
    def trainable(self) -> bool:
        return self.completed is not None and self.completed.complete and not any(
            f in MANUAL_EXCLUSION_FLAGS for f in self.flags
        )

    def to_json(self) -> dict:
        return {
            "id": self.record_id,
            "image": str(self.image_path),
            "bbox": list(self.bbox),
            "flags": list(self.flags),
            "annotations": [
                {"labeler": labeler, "points": landmarks_to_json(lm)}
                for labeler, lm in self.annotations.items()
            ],
            "merged": landmarks_to_json(self.merged),
            "completed": landmarks_to_json(self.completed),
        }

    @staticmethod
    def from_json(obj: dict) -> "FaceRecord":
        annotations = {}
        for entry in obj.get("annotations", []):
            annotations[entry["labeler"]] = landmarks_from_json(entry["points"])
        merged = obj.get("merged")
        completed = obj.get("completed")
        return FaceRecord(
            record_id=str(obj["id"]),
            image_path=Path(obj["image"]),
            bbox=tuple(float(v) for v in obj["bbox"]),
            flags=list(obj.get("flags", [])),
            annotations=annotations,
            merged=landmarks_from_json(merged) if merged is not None else None,
            completed=landmarks_from_json(completed) if completed is not None else None,
        )


@dataclass
class IngestReport:
    records: list[FaceRecord]
    errors: list[str]


def ingest_manifest(path, image_root=None) -> IngestReport:
    """Load a manifest; per-record problems are collected, not fatal.

    A malformed line raises (with its line number); a line referencing a
    missing image file only errors that record.
    """
    path = Path(path)
    root = Path(image_root) if image_root is not None else path.parent
    records: list[FaceRecord] = []
    errors: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = FaceRecord.from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError, ManifestError) as exc:
                raise ManifestError(f"{path}:{lineno}: malformed record: {exc}") from exc
            if not (root / record.image_path).exists():
                errors.append(f"{record.record_id}: image not found: {record.image_path}")
                continue
            records.append(record)
    return IngestReport(records, errors)


def write_manifest(records, path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")
    tmp.replace(path)


def apply_selection_filters(records):
    """Split records into (kept, excluded) per the selection rules.

    A bounding box with width or height strictly smaller than 80 px is
    excluded; manual judgment flags (profile, inhuman features, occluded
    eyes) stored in the manifest are passed through as exclusion reasons.
    """
    kept: list[FaceRecord] = []
    excluded: list[tuple[FaceRecord, str]] = []
    for record in records:
        _, _, w, h = record.bbox
        manual = [f for f in record.flags if f in MANUAL_EXCLUSION_FLAGS]
        if w < MIN_BOX_SIDE or h < MIN_BOX_SIDE:
            excluded.append((record, "too-small"))
        elif manual:
            excluded.append((record, manual[0]))
        else:
            kept.append(record)
    return kept, excluded


@dataclass
class SplitAssignment:
    assignment: dict[str, str]  # record id -> train | validation | test
    seed: int

    def ids(self, label: str) -> list[str]:
        return [rid for rid, lab in self.assignment.items() if lab == label]

    def to_json(self) -> dict:
        return {"seed": self.seed, "assignment": self.assignment}

    @staticmethod
    def from_json(obj) -> "SplitAssignment":
        return SplitAssignment(dict(obj["assignment"]), int(obj["seed"]))


def split(records, ratios=(0.8, 0.1, 0.1), seed: int = 0) -> SplitAssignment:
    """Random 80/10/10 partition: floor(test), floor(validation), rest to train."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios}")
    n = len(records)
    if n < 3:
        raise ValueError("need at least 3 records to split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_test = int(n * ratios[2])
    n_val = int(n * ratios[1])
    assignment: dict[str, str] = {}
    for rank, idx in enumerate(order):
        if rank < n_test:
            label = "test"
        elif rank < n_test + n_val:
            label = "validation"
        else:
            label = "train"
        assignment[records[idx].record_id] = label
    return SplitAssignment(assignment, seed)


@dataclass
class TrainingSample:
    image: np.ndarray  # (canvas, canvas) grayscale in [0, 1]
    landmarks: LandmarkSet  # crop coordinates, all present
    record_id: str
    augmentation_id: int = 0
    crop_transform: SimilarityTransform | None = None  # image frame -> crop frame


def load_grayscale(path) -> np.ndarray:
    """Load an image as a float64 grayscale array in [0, 1]."""
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.float64) / 255.0


def crop_transform_for_bbox(bbox, canvas: int) -> SimilarityTransform:
    """Similarity mapping image coordinates into the square-crop canvas frame.

    The bounding box is expanded to a square about its center so landmark
    geometry is never anisotropically distorted.
    """
    x, y, w, h = bbox
    side = max(w, h)
    cx = x + w / 2.0
    cy = y + h / 2.0
    origin_x = cx - side / 2.0
    origin_y = cy - side / 2.0
    scale = canvas / side
    return SimilarityTransform(scale, 0.0, -origin_x * scale, -origin_y * scale)


def crop_and_normalize(
    record: FaceRecord, image_root=None, canvas: int = DEFAULT_CANVAS
) -> TrainingSample:
    """Produce a canvas-sized grayscale training sample with mapped landmarks."""
    if record.completed is None or not record.completed.complete:
        raise ValueError(f"record {record.record_id} has no completed landmarks")
    root = Path(image_root) if image_root is not None else Path(".")
    image = load_grayscale(root / record.image_path)
    transform = crop_transform_for_bbox(record.bbox, canvas)
    crop = warp_image(image, transform, out_shape=(canvas, canvas), fill=1.0)
    landmarks = LandmarkSet(
        transform.apply(record.completed.points), record.completed.present
    )
    return TrainingSample(
        image=crop,
        landmarks=landmarks,
        record_id=record.record_id,
        crop_transform=transform,
    )
