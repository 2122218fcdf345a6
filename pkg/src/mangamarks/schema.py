"""The 60-point manga face landmark model.

Canonical index layout:

    0-16   chin contour (left temple to right temple, image coordinates)
    17-21  left eyebrow
    22-26  right eyebrow
    27     nose tip
    28-37  left eye contour (clockwise from the leftmost point; 28-32 upper arc)
    38     left pupil
    39-48  right eye contour (same ordering)
    49     right pupil
    50-59  mouth line (left to right)

Coordinates are double-precision pixels, y increasing downward.  A slot whose
presence flag is False carries no meaning and must never enter a metric or a
transform fit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import IncompleteGroupError, SchemaError

NUM_LANDMARKS = 60

CHIN_LEFT = 0
CHIN_RIGHT = 16


class GroupKind(enum.Enum):
    CHIN_CONTOUR = "chin_contour"
    LEFT_EYEBROW = "left_eyebrow"
    RIGHT_EYEBROW = "right_eyebrow"
    NOSE = "nose"
    LEFT_EYE = "left_eye"
    LEFT_PUPIL = "left_pupil"
    RIGHT_EYE = "right_eye"
    RIGHT_PUPIL = "right_pupil"
    MOUTH = "mouth"


@dataclass(frozen=True)
class LandmarkGroup:
    kind: GroupKind
    start: int
    stop: int  # exclusive

    @property
    def indices(self) -> range:
        return range(self.start, self.stop)

    def __len__(self) -> int:
        return self.stop - self.start


GROUPS: tuple[LandmarkGroup, ...] = (
    LandmarkGroup(GroupKind.CHIN_CONTOUR, 0, 17),
    LandmarkGroup(GroupKind.LEFT_EYEBROW, 17, 22),
    LandmarkGroup(GroupKind.RIGHT_EYEBROW, 22, 27),
    LandmarkGroup(GroupKind.NOSE, 27, 28),
    LandmarkGroup(GroupKind.LEFT_EYE, 28, 38),
    LandmarkGroup(GroupKind.LEFT_PUPIL, 38, 39),
    LandmarkGroup(GroupKind.RIGHT_EYE, 39, 49),
    LandmarkGroup(GroupKind.RIGHT_PUPIL, 49, 50),
    LandmarkGroup(GroupKind.MOUTH, 50, 60),
)

GROUP_BY_KIND: dict[GroupKind, LandmarkGroup] = {g.kind: g for g in GROUPS}

# Relative eye-contour positions 0-4 lie on the upper arc (eyelid).
EYE_UPPER_ARC = range(0, 5)


def group_of(index: int) -> LandmarkGroup:
    """Return the unique group containing a canonical landmark index."""
    if not 0 <= index < NUM_LANDMARKS:
        raise SchemaError(f"landmark index {index} out of range 0..59")
    for group in GROUPS:
        if index < group.stop:
            return group
    raise AssertionError("unreachable: groups partition 0..59")


class LandmarkSet:
    """An immutable 60-slot set of 2-D landmarks with presence flags."""

    __slots__ = ("points", "present")

    def __init__(self, points, present=None):
        points = np.asarray(points, dtype=np.float64)
        if points.shape != (NUM_LANDMARKS, 2):
            raise SchemaError(f"expected (60, 2) points, got {points.shape}")
        if present is None:
            present = np.ones(NUM_LANDMARKS, dtype=bool)
        else:
            present = np.asarray(present, dtype=bool)
            if present.shape != (NUM_LANDMARKS,):
                raise SchemaError(f"expected 60 presence flags, got {present.shape}")
        points = points.copy()
        present = present.copy()
        points.setflags(write=False)
        present.setflags(write=False)
        super().__setattr__("points", points)
        super().__setattr__("present", present)

    def __setattr__(self, name, value):
        raise AttributeError("LandmarkSet is immutable")

    @property
    def complete(self) -> bool:
        return bool(self.present.all())

    def group_complete(self, group: LandmarkGroup) -> bool:
        return bool(self.present[group.start : group.stop].all())

    def group_points(self, group: LandmarkGroup) -> np.ndarray:
        return self.points[group.start : group.stop]

    def with_points(self, indices, new_points) -> "LandmarkSet":
        """Return a copy with the given slots written and marked present."""
        points = self.points.copy()
        present = self.present.copy()
        points[indices] = new_points
        present[indices] = True
        return LandmarkSet(points, present)

    def __eq__(self, other):
        if not isinstance(other, LandmarkSet):
            return NotImplemented
        if not np.array_equal(self.present, other.present):
            return False
        mask = self.present
        return np.array_equal(self.points[mask], other.points[mask])

    def __repr__(self):
        return f"LandmarkSet(present={int(self.present.sum())}/60)"


def group_centroid(landmarks: LandmarkSet, group: LandmarkGroup) -> np.ndarray:
    """Arithmetic mean of a group's points; every slot must be present."""
    if not landmarks.group_complete(group):
        missing = [i for i in group.indices if not landmarks.present[i]]
        raise IncompleteGroupError(
            f"group {group.kind.value} has absent landmarks at {missing}"
        )
    return landmarks.group_points(group).mean(axis=0)


@dataclass
class ValidationReport:
    out_of_bounds: list[int] = field(default_factory=list)
    incomplete_groups: list[GroupKind] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.out_of_bounds

    @property
    def complete(self) -> bool:
        return not self.incomplete_groups


def validate(landmarks: LandmarkSet, width: float, height: float) -> ValidationReport:
    """Report present points outside [0, width) x [0, height) and group completeness."""
    report = ValidationReport()
    for i in range(NUM_LANDMARKS):
        if not landmarks.present[i]:
            continue
        x, y = landmarks.points[i]
        if not (0 <= x < width and 0 <= y < height):
            report.out_of_bounds.append(i)
    for group in GROUPS:
        if not landmarks.group_complete(group):
            report.incomplete_groups.append(group.kind)
    return report
