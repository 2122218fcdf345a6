"""Procedural manga-like face generator with exact ground-truth landmarks.

Faces are drawn in black strokes on a white sheet: an elliptical chin arc,
two elliptical eyes with pupils, eyebrow arcs, a nose dot and a curved mouth.
Every landmark coordinate is the analytic position used for drawing, so the
generated data has zero annotation noise.  Used by tests, the desk-scale
experiments and the `synth` CLI command.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .dataset import FaceRecord, TrainingSample, crop_transform_for_bbox, write_manifest
from .geometry import warp_image
from .schema import GROUP_BY_KIND, GroupKind, LandmarkSet

SHEET = 256


def _face_landmarks(rng: np.random.Generator) -> np.ndarray:
    """Sample one face's 60 landmark coordinates on the sheet."""
    cx = SHEET / 2 + rng.uniform(-10, 10)
    cy = SHEET / 2 + rng.uniform(-8, 8)
    half_w = rng.uniform(62, 85)
    half_h = rng.uniform(70, 95)

    pts = np.zeros((60, 2))

    # Chin: half ellipse from left temple through the jaw to the right temple.
    for k in range(17):
        phi = math.pi + k * math.pi / 16
        pts[k] = (cx + half_w * math.cos(phi), cy - half_h * math.sin(phi))

    # Eyes: 10 contour points clockwise from the leftmost, first five on top.
    eye_dx = half_w * rng.uniform(0.40, 0.52)
    eye_y = cy - half_h * rng.uniform(0.05, 0.20)
    eye_a = half_w * rng.uniform(0.16, 0.24)
    eye_b = eye_a * rng.uniform(0.55, 0.90)
    for side, start in ((-1, 28), (+1, 39)):
        ecx = cx + side * eye_dx
        for k in range(10):
            phi = math.pi + 2 * math.pi * k / 10
            pts[start + k] = (ecx + eye_a * math.cos(phi), eye_y + eye_b * math.sin(phi))
        pupil = 38 if side < 0 else 49
        pts[pupil] = (ecx, eye_y)

    # Eyebrows: 5-point arcs above each eye.
    brow_lift = eye_b + rng.uniform(6, 12)
    brow_curve = rng.uniform(2, 6)
    for side, start in ((-1, 17), (+1, 22)):
        ecx = cx + side * eye_dx
        for k in range(5):
            u = k / 4.0 - 0.5
            pts[start + k] = (
                ecx + u * 2.2 * eye_a,
                eye_y - brow_lift - brow_curve * (1 - (2 * u) ** 2),
            )

    # Nose: single dot between the eyes and the mouth.
    pts[27] = (cx + rng.uniform(-2, 2), cy + half_h * rng.uniform(0.10, 0.22))

    # Mouth: 10 points left to right on a gentle curve.
    mouth_y = cy + half_h * rng.uniform(0.45, 0.60)
    mouth_w = half_w * rng.uniform(0.35, 0.55)
    mouth_curve = rng.uniform(-5, 8)
    for k in range(10):
        u = k / 9.0 - 0.5
        pts[50 + k] = (cx + u * 2 * mouth_w, mouth_y + mouth_curve * (1 - (2 * u) ** 2))

    return pts


def _draw_face(pts: np.ndarray) -> np.ndarray:
    """Render the strokes for a landmark array; returns grayscale [0, 1]."""
    img = Image.new("L", (SHEET, SHEET), 255)
    draw = ImageDraw.Draw(img)

    def polyline(indices, closed=False, width=2):
        seq = [tuple(pts[i]) for i in indices]
        if closed:
            seq.append(seq[0])
        draw.line(seq, fill=0, width=width)

    polyline(range(0, 17))  # chin
    polyline(range(17, 22))  # left eyebrow
    polyline(range(22, 27))  # right eyebrow
    polyline(range(28, 38), closed=True)  # left eye
    polyline(range(39, 49), closed=True)  # right eye
    polyline(range(50, 60))  # mouth
    for pupil in (38, 49):
        x, y = pts[pupil]
        draw.ellipse([x - 3, y - 3, x + 3, y + 3], fill=0)
    nx, ny = pts[27]
    draw.ellipse([nx - 2, ny - 2, nx + 2, ny + 2], fill=0)
    return np.asarray(img, dtype=np.float64) / 255.0


def generate_face(rng: np.random.Generator):
    """One synthetic face: (sheet image, complete LandmarkSet, bbox)."""
    pts = _face_landmarks(rng)
    image = _draw_face(pts)
    lo = pts.min(axis=0) - 8
    hi = pts.max(axis=0) + 8
    lo = np.maximum(lo, 0)
    hi = np.minimum(hi, SHEET)
    bbox = (float(lo[0]), float(lo[1]), float(hi[0] - lo[0]), float(hi[1] - lo[1]))
    return image, LandmarkSet(pts), bbox


def make_samples(n: int, seed: int = 0, canvas: int = 112) -> list[TrainingSample]:
    """Generate n canvas-sized training samples with exact landmarks."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        image, landmarks, bbox = generate_face(rng)
        transform = crop_transform_for_bbox(bbox, canvas)
        crop = warp_image(image, transform, out_shape=(canvas, canvas), fill=1.0)
        samples.append(
            TrainingSample(
                image=crop,
                landmarks=LandmarkSet(transform.apply(landmarks.points)),
                record_id=f"synth-{i:04d}",
                crop_transform=transform,
            )
        )
    return samples


def _mask_groups(landmarks: LandmarkSet, kinds) -> LandmarkSet:
    present = landmarks.present.copy()
    for kind in kinds:
        g = GROUP_BY_KIND[kind]
        present[g.start : g.stop] = False
    return LandmarkSet(landmarks.points, present)


def write_synthetic_dataset(
    out_dir, n: int, seed: int = 0, double_label_fraction: float = 0.5
) -> Path:
    """Write n synthetic faces as PNGs plus a manifest; returns the manifest path.

    A fraction of records carries two jittered labelings (for the QC
    workflow); completion targets (nose, pupils, eyebrows) are left absent in
    the raw annotations so the completion commands have work to do, while
    `completed` holds the exact ground truth.
    """
    out_dir = Path(out_dir)
    images_dir = out_dir / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        image, landmarks, bbox = generate_face(rng)
        name = f"face-{i:04d}.png"
        Image.fromarray((image * 255).round().astype(np.uint8)).save(images_dir / name)
        partial = _mask_groups(
            landmarks,
            (
                GroupKind.NOSE,
                GroupKind.LEFT_PUPIL,
                GroupKind.RIGHT_PUPIL,
                GroupKind.LEFT_EYEBROW,
                GroupKind.RIGHT_EYEBROW,
            ),
        )
        annotations = {"labeler-a": partial}
        if rng.random() < double_label_fraction:
            jitter = rng.normal(0.0, 0.5, size=partial.points.shape)
            annotations["labeler-b"] = LandmarkSet(
                partial.points + jitter, partial.present
            )
        records.append(
            FaceRecord(
                record_id=f"face-{i:04d}",
                image_path=Path("images") / name,
                bbox=bbox,
                annotations=annotations,
                completed=landmarks,
            )
        )
    manifest = out_dir / "manifest.jsonl"
    write_manifest(records, manifest)
    return manifest
