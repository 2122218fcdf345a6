"""Double-label comparison, merging, and geometric completion of landmarks.

Completion fills absent slots only; a present landmark is never moved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CompletionError
from .geometry import estimate_affine
from .schema import (
    EYE_UPPER_ARC,
    GROUP_BY_KIND,
    GroupKind,
    LandmarkSet,
    group_centroid,
)

DEFAULT_TOLERANCE = 2.0

EYEBROW_SCALE = 1.25
EYEBROW_LIFT = 0.6  # fraction of the eye bounding-box height

_SIDES = {
    "left": (GroupKind.LEFT_EYE, GroupKind.LEFT_EYEBROW),
    "right": (GroupKind.RIGHT_EYE, GroupKind.RIGHT_EYEBROW),
}


@dataclass
class DisagreementReport:
    distances: dict[int, float]
    flagged: list[int]
    presence_mismatches: list[int]
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def clean(self) -> bool:
        return not self.flagged and not self.presence_mismatches


def compare_labels(
    a: LandmarkSet, b: LandmarkSet, tolerance: float = DEFAULT_TOLERANCE
) -> DisagreementReport:
    """Flag landmarks whose two labelings sit strictly more than `tolerance` apart.

    A distance exactly equal to the tolerance is not flagged.  Slots present
    in only one labeling are reported as presence mismatches, never as
    distance flags.
    """
    distances: dict[int, float] = {}
    flagged: list[int] = []
    mismatches: list[int] = []
    for i in range(len(a.present)):
        if a.present[i] and b.present[i]:
            d = float(np.linalg.norm(a.points[i] - b.points[i]))
            distances[i] = d
            if d > tolerance:
                flagged.append(i)
        elif a.present[i] != b.present[i]:
            mismatches.append(i)
    return DisagreementReport(distances, flagged, mismatches, tolerance)


def merge_labels(a: LandmarkSet, b: LandmarkSet) -> LandmarkSet:
    """Per-landmark spatial average; a slot present in only one labeling is kept."""
    both = a.present & b.present
    only_a = a.present & ~b.present
    only_b = b.present & ~a.present
    points = np.zeros_like(a.points)
    points[both] = (a.points[both] + b.points[both]) / 2.0
    points[only_a] = a.points[only_a]
    points[only_b] = b.points[only_b]
    return LandmarkSet(points, both | only_a | only_b)


def _require_groups(landmarks: LandmarkSet, kinds, operation: str):
    missing = [k.value for k in kinds if not landmarks.group_complete(GROUP_BY_KIND[k])]
    if missing:
        raise CompletionError(f"{operation} requires complete groups: missing {missing}")


def complete_nose(landmarks: LandmarkSet) -> LandmarkSet:
    """Nose tip = mean of the left-eye, right-eye and mouth centroids.

    No-op when the nose is already present.
    """
    nose = GROUP_BY_KIND[GroupKind.NOSE]
    if landmarks.present[nose.start]:
        return landmarks
    _require_groups(
        landmarks,
        (GroupKind.LEFT_EYE, GroupKind.RIGHT_EYE, GroupKind.MOUTH),
        "nose completion",
    )
    centroids = [
        group_centroid(landmarks, GROUP_BY_KIND[k])
        for k in (GroupKind.LEFT_EYE, GroupKind.RIGHT_EYE, GroupKind.MOUTH)
    ]
    return landmarks.with_points([nose.start], np.mean(centroids, axis=0))


def complete_pupils(landmarks: LandmarkSet) -> LandmarkSet:
    """Each absent pupil = centroid of its eye's 10 contour landmarks."""
    out = landmarks
    for eye_kind, pupil_kind in (
        (GroupKind.LEFT_EYE, GroupKind.LEFT_PUPIL),
        (GroupKind.RIGHT_EYE, GroupKind.RIGHT_PUPIL),
    ):
        pupil = GROUP_BY_KIND[pupil_kind]
        if out.present[pupil.start]:
            continue
        _require_groups(out, (eye_kind,), "pupil completion")
        out = out.with_points(
            [pupil.start], group_centroid(out, GROUP_BY_KIND[eye_kind])
        )
    return out


def complete_eyebrow_from_other(landmarks: LandmarkSet, missing_side: str) -> LandmarkSet:
    """Synthesize one absent eyebrow by mapping the other through the eye-to-eye affine.

    The mapping matrix is a full 6-dof affine fitted from the present side's
    eye contour to the missing side's eye contour (similarities cannot express
    the left/right reflection between eyes).
    """
    if missing_side not in _SIDES:
        raise CompletionError(f"unknown side {missing_side!r}; expected 'left' or 'right'")
    other_side = "right" if missing_side == "left" else "left"
    missing_eye, missing_brow = _SIDES[missing_side]
    source_eye, source_brow = _SIDES[other_side]
    _require_groups(landmarks, (missing_eye, source_eye), "eyebrow mapping")
    brow_group = GROUP_BY_KIND[missing_brow]
    src_brow_group = GROUP_BY_KIND[source_brow]
    if landmarks.group_complete(brow_group):
        raise CompletionError(f"{missing_side} eyebrow is already present")
    if not landmarks.group_complete(src_brow_group):
        raise CompletionError(f"{other_side} eyebrow must be present to map from")
    mapping = estimate_affine(
        landmarks.group_points(GROUP_BY_KIND[source_eye]),
        landmarks.group_points(GROUP_BY_KIND[missing_eye]),
    )
    synthesized = mapping.apply(landmarks.group_points(src_brow_group))
    return landmarks.with_points(list(brow_group.indices), synthesized)


def complete_eyebrows_from_eyelids(landmarks: LandmarkSet) -> LandmarkSet:
    """Synthesize both eyebrows from the upper eyelids when both are absent.

    Each eye's 5 upper-arc landmarks are scaled by 1.25 about the eye centroid
    and shifted upward (negative y) by 0.6 times the eye bounding-box height.
    """
    _require_groups(
        landmarks, (GroupKind.LEFT_EYE, GroupKind.RIGHT_EYE), "eyelid-based eyebrows"
    )
    out = landmarks
    for eye_kind, brow_kind in (
        (GroupKind.LEFT_EYE, GroupKind.LEFT_EYEBROW),
        (GroupKind.RIGHT_EYE, GroupKind.RIGHT_EYEBROW),
    ):
        eye = GROUP_BY_KIND[eye_kind]
        brow = GROUP_BY_KIND[brow_kind]
        if out.group_complete(brow):
            raise CompletionError(f"{brow_kind.value} is already present")
        eye_pts = out.group_points(eye)
        centroid = eye_pts.mean(axis=0)
        height = eye_pts[:, 1].max() - eye_pts[:, 1].min()
        arc = eye_pts[list(EYE_UPPER_ARC)]
        synthesized = (arc - centroid) * EYEBROW_SCALE + centroid
        synthesized = synthesized + np.array([0.0, -EYEBROW_LIFT * height])
        out = out.with_points(list(brow.indices), synthesized)
    return out


def complete_all(landmarks: LandmarkSet) -> LandmarkSet:
    """Run every applicable completion rule; output has all 60 slots present.

    Prerequisite: chin, mouth and both eye contours are labeled.  Order is
    eyebrows, then nose, then pupils; the rules are independent so this is
    fixed only for determinism.
    """
    _require_groups(
        landmarks,
        (GroupKind.CHIN_CONTOUR, GroupKind.MOUTH, GroupKind.LEFT_EYE, GroupKind.RIGHT_EYE),
        "completion",
    )
    out = landmarks
    for kind in (GroupKind.LEFT_EYEBROW, GroupKind.RIGHT_EYEBROW):
        g = GROUP_BY_KIND[kind]
        if out.present[g.start : g.stop].any() and not out.group_complete(g):
            raise CompletionError(f"{kind.value} is partially labeled; fix it manually")
    left_brow = out.group_complete(GROUP_BY_KIND[GroupKind.LEFT_EYEBROW])
    right_brow = out.group_complete(GROUP_BY_KIND[GroupKind.RIGHT_EYEBROW])
    if not left_brow and not right_brow:
        out = complete_eyebrows_from_eyelids(out)
    elif not left_brow:
        out = complete_eyebrow_from_other(out, "left")
    elif not right_brow:
        out = complete_eyebrow_from_other(out, "right")
    out = complete_nose(out)
    out = complete_pupils(out)
    return out
