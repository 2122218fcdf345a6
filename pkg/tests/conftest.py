import numpy as np
import pytest

from mangamarks.schema import LandmarkSet


def make_face_points(cx=50.0, cy=60.0, scale=1.0):
    """A deterministic, plausibly face-shaped 60-point layout."""
    pts = np.zeros((60, 2))
    # chin half-ellipse
    for k in range(17):
        phi = np.pi + k * np.pi / 16
        pts[k] = (cx + 40 * np.cos(phi), cy - 45 * np.sin(phi))
    # eyes (clockwise from leftmost, upper arc first)
    for side, start, pupil in ((-1, 28, 38), (+1, 39, 49)):
        ecx = cx + side * 18
        for k in range(10):
            phi = np.pi + 2 * np.pi * k / 10
            pts[start + k] = (ecx + 8 * np.cos(phi), cy - 10 + 5 * np.sin(phi))
        pts[pupil] = (ecx, cy - 10)
    # eyebrows
    for side, start in ((-1, 17), (+1, 22)):
        ecx = cx + side * 18
        for k in range(5):
            pts[start + k] = (ecx - 9 + 4.5 * k, cy - 22 - 2 * np.sin(k))
    pts[27] = (cx, cy + 5)
    for k in range(10):
        pts[50 + k] = (cx - 13 + 26 * k / 9.0, cy + 22 + 2 * np.cos(k))
    return (pts - [cx, cy]) * scale + [cx, cy]


@pytest.fixture
def face():
    return LandmarkSet(make_face_points())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
