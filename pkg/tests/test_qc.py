import numpy as np
import pytest

from mangamarks.errors import CompletionError
from mangamarks.geometry import SimilarityTransform, apply_transform
from mangamarks.qc import (
    compare_labels,
    complete_all,
    complete_eyebrow_from_other,
    complete_eyebrows_from_eyelids,
    complete_nose,
    complete_pupils,
    merge_labels,
)
from mangamarks.schema import GROUP_BY_KIND, GroupKind, LandmarkSet

from conftest import make_face_points


def mask(landmarks, kinds):
    present = landmarks.present.copy()
    for kind in kinds:
        g = GROUP_BY_KIND[kind]
        present[g.start : g.stop] = False
    return LandmarkSet(landmarks.points, present)


class TestCompare:
    def test_identical_sets_have_no_flags(self, face):
        report = compare_labels(face, face)
        assert report.flagged == [] and report.presence_mismatches == []

    def test_distance_exactly_tolerance_not_flagged(self, face):
        pts = face.points.copy()
        pts[10] += (0.0, 2.0)
        report = compare_labels(face, LandmarkSet(pts), tolerance=2.0)
        assert 10 not in report.flagged
        assert report.distances[10] == pytest.approx(2.0)

    def test_three_four_five_distance_flagged(self, face):
        pts = face.points.copy()
        pts[10] += (1.5, 2.0)
        report = compare_labels(face, LandmarkSet(pts))
        assert report.flagged == [10]
        assert report.distances[10] == pytest.approx(2.5)

    def test_presence_mismatch_separate_from_flags(self, face):
        present = face.present.copy()
        present[7] = False
        report = compare_labels(face, LandmarkSet(face.points, present))
        assert report.presence_mismatches == [7]
        assert report.flagged == []

    def test_flags_symmetric(self, face, rng):
        pts = face.points + rng.normal(size=(60, 2)) * 2
        other = LandmarkSet(pts)
        assert compare_labels(face, other).flagged == compare_labels(other, face).flagged


class TestMerge:
    def test_midpoint(self, face):
        pts = face.points.copy()
        pts[0] = (10, 10)
        a = LandmarkSet(pts)
        pts2 = pts.copy()
        pts2[0] = (12, 10)
        merged = merge_labels(a, LandmarkSet(pts2))
        assert tuple(merged.points[0]) == (11, 10)

    def test_idempotent_and_commutative(self, face, rng):
        other = LandmarkSet(face.points + rng.normal(size=(60, 2)))
        assert merge_labels(face, face) == face
        assert merge_labels(face, other) == merge_labels(other, face)

    def test_single_source_slot_kept(self, face):
        present = face.present.copy()
        present[27] = False
        b = LandmarkSet(face.points, present)
        merged = merge_labels(face, b)
        assert merged.present[27]
        assert np.array_equal(merged.points[27], face.points[27])

    def test_absent_in_both_stays_absent(self, face):
        present = face.present.copy()
        present[27] = False
        a = LandmarkSet(face.points, present)
        merged = merge_labels(a, a)
        assert not merged.present[27]


class TestCompleteNose:
    def test_centroid_of_centroids(self):
        pts = make_face_points()
        # position eyes and mouth so their centroids are known exactly
        for start, c in ((28, (10.0, 20.0)), (39, (30.0, 20.0))):
            for k in range(10):
                phi = np.pi + 2 * np.pi * k / 10
                pts[start + k] = (c[0] + 3 * np.cos(phi), c[1] + 2 * np.sin(phi))
        for k in range(10):
            pts[50 + k] = (20 - 4.5 + k, 44.0)
        lm = mask(LandmarkSet(pts), (GroupKind.NOSE,))
        completed = complete_nose(lm)
        assert np.allclose(completed.points[27], (20, 28))

    def test_noop_when_present(self, face):
        assert complete_nose(face) == face

    def test_requires_prerequisites(self, face):
        lm = mask(face, (GroupKind.NOSE, GroupKind.MOUTH))
        with pytest.raises(CompletionError):
            complete_nose(lm)


class TestCompletePupils:
    def test_symmetric_eye_gives_center(self, face):
        lm = mask(face, (GroupKind.LEFT_PUPIL, GroupKind.RIGHT_PUPIL))
        completed = complete_pupils(lm)
        eye = GROUP_BY_KIND[GroupKind.LEFT_EYE]
        assert np.allclose(
            completed.points[38], face.group_points(eye).mean(axis=0)
        )

    def test_noop_when_present(self, face):
        assert complete_pupils(face) == face

    def test_requires_eye(self, face):
        lm = mask(face, (GroupKind.LEFT_PUPIL, GroupKind.LEFT_EYE))
        with pytest.raises(CompletionError):
            complete_pupils(lm)


class TestEyebrowFromOther:
    def test_translation_only_mapping(self):
        pts = make_face_points()
        # make the right eye an exact translate of the left eye
        pts[39:49] = pts[28:38] + (20.0, 0.0)
        lm = mask(LandmarkSet(pts), (GroupKind.RIGHT_EYEBROW,))
        completed = complete_eyebrow_from_other(lm, "right")
        assert np.allclose(completed.points[22:27], pts[17:22] + (20.0, 0.0), atol=1e-9)

    def test_mirror_mapping(self):
        pts = make_face_points()
        axis = 15.0
        pts[39:49] = pts[28:38] * [-1, 1] + [2 * axis, 0]
        # break the mirror symmetry of the source eye so the fit is well-posed
        pts[28:38, 1] += np.linspace(0, 1.5, 10)
        pts[39:49, 1] += np.linspace(0, 1.5, 10)
        lm = mask(LandmarkSet(pts), (GroupKind.RIGHT_EYEBROW,))
        completed = complete_eyebrow_from_other(lm, "right")
        expected = pts[17:22] * [-1, 1] + [2 * axis, 0]
        assert np.allclose(completed.points[22:27], expected, atol=1e-6)

    def test_identity_mapping(self):
        pts = make_face_points()
        pts[39:49] = pts[28:38]
        lm = mask(LandmarkSet(pts), (GroupKind.RIGHT_EYEBROW,))
        completed = complete_eyebrow_from_other(lm, "right")
        assert np.allclose(completed.points[22:27], pts[17:22], atol=1e-9)

    def test_wrong_arity(self, face):
        with pytest.raises(CompletionError):
            complete_eyebrow_from_other(face, "right")  # already present
        both_missing = mask(face, (GroupKind.LEFT_EYEBROW, GroupKind.RIGHT_EYEBROW))
        with pytest.raises(CompletionError):
            complete_eyebrow_from_other(both_missing, "right")


class TestEyebrowsFromEyelids:
    def test_arithmetic_of_stated_rule(self):
        pts = make_face_points()
        # left eye centered at origin with height 4; upper-arc point at (2, -2)
        eye = np.array(
            [(-3, 0), (-2, -2), (0, -2), (2, -2), (3, -1), (3, 1), (2, 2), (0, 2), (-2, 2), (-3, 1)],
            dtype=float,
        )
        eye = eye - eye.mean(axis=0)  # exact centroid at origin
        pts[28:38] = eye
        lm = mask(LandmarkSet(pts), (GroupKind.LEFT_EYEBROW, GroupKind.RIGHT_EYEBROW))
        completed = complete_eyebrows_from_eyelids(lm)
        expected = eye[:5] * 1.25 + [0.0, -0.6 * 4.0]
        assert np.allclose(completed.points[17:22], expected)

    def test_synthesized_brows_above_eye(self, rng):
        for _ in range(50):
            pts = make_face_points()
            jitter = rng.normal(scale=0.25, size=(10, 2))
            pts[28:38] += jitter
            pts[39:49] += jitter[::-1]
            lm = mask(LandmarkSet(pts), (GroupKind.LEFT_EYEBROW, GroupKind.RIGHT_EYEBROW))
            completed = complete_eyebrows_from_eyelids(lm)
            assert completed.points[17:22, 1].max() < pts[28:38, 1].min()
            assert completed.points[22:27, 1].max() < pts[39:49, 1].min()

    def test_symmetric_face_gives_mirror_brows(self):
        pts = make_face_points(cx=50.0)
        pts[39:49] = pts[28:38] * [-1, 1] + [100.0, 0]
        lm = mask(LandmarkSet(pts), (GroupKind.LEFT_EYEBROW, GroupKind.RIGHT_EYEBROW))
        completed = complete_eyebrows_from_eyelids(lm)
        mirrored = completed.points[17:22] * [-1, 1] + [100.0, 0]
        assert np.allclose(np.sort(mirrored, axis=0), np.sort(completed.points[22:27], axis=0), atol=1e-9)


class TestCompleteAll:
    def test_idempotent_on_complete_set(self, face):
        assert complete_all(face) == face
        once = complete_all(mask(face, (GroupKind.NOSE,)))
        assert complete_all(once) == once

    def test_missing_nose_only_adds_index_27(self, face):
        lm = mask(face, (GroupKind.NOSE,))
        completed = complete_all(lm)
        assert completed.complete
        assert np.array_equal(completed.points[:27], face.points[:27])
        assert np.array_equal(completed.points[28:], face.points[28:])

    def test_thirteen_synthesized_points(self, face):
        lm = mask(
            face,
            (
                GroupKind.NOSE,
                GroupKind.LEFT_PUPIL,
                GroupKind.RIGHT_PUPIL,
                GroupKind.LEFT_EYEBROW,
                GroupKind.RIGHT_EYEBROW,
            ),
        )
        assert int(lm.present.sum()) == 47
        completed = complete_all(lm)
        assert completed.complete
        # present landmarks never move
        assert np.array_equal(completed.points[lm.present], face.points[lm.present])

    def test_missing_prerequisites_rejected(self, face):
        lm = mask(face, (GroupKind.MOUTH,))
        with pytest.raises(CompletionError):
            complete_all(lm)

    def test_similarity_equivariance(self, rng):
        # nose + pupils + one eyebrow exercise the centroid and affine rules,
        # which commute with similarities
        for _ in range(100):
            pts = make_face_points()
            pts[28:38, 1] += np.linspace(0, 1.2, 10)  # well-posed affine fit
            lm = mask(
                LandmarkSet(pts),
                (GroupKind.NOSE, GroupKind.LEFT_PUPIL, GroupKind.RIGHT_PUPIL, GroupKind.RIGHT_EYEBROW),
            )
            t = SimilarityTransform(
                rng.uniform(0.5, 2.0),
                rng.uniform(-np.pi, np.pi),
                rng.uniform(-20, 20),
                rng.uniform(-20, 20),
            )
            completed_then_mapped = apply_transform(t, complete_all(lm))
            mapped_then_completed = complete_all(apply_transform(t, lm))
            assert np.allclose(
                completed_then_mapped.points, mapped_then_completed.points, atol=1e-6
            )

    def test_eyelid_rule_equivariant_under_scale_translation(self, rng):
        # the eyelid-derived eyebrow rule is axis-aligned by construction, so
        # its equivariance holds for rotation-free similarities
        for _ in range(100):
            lm = mask(
                LandmarkSet(make_face_points()),
                (GroupKind.LEFT_EYEBROW, GroupKind.RIGHT_EYEBROW),
            )
            t = SimilarityTransform(
                rng.uniform(0.5, 2.0), 0.0, rng.uniform(-20, 20), rng.uniform(-20, 20)
            )
            a = apply_transform(t, complete_eyebrows_from_eyelids(lm))
            b = complete_eyebrows_from_eyelids(apply_transform(t, lm))
            assert np.allclose(a.points, b.points, atol=1e-6)
