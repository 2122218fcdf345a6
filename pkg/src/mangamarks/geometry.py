"""Shape-space math: similarity/affine fits, mean shape, heatmaps, warps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, SchemaError
from .schema import NUM_LANDMARKS, LandmarkSet

DEFAULT_CANVAS = 112
DEFAULT_HEATMAP_RADIUS = 16.0
DEFAULT_MARGIN = 0.1


@dataclass(frozen=True)
class SimilarityTransform:
    """p -> s * R(theta) @ p + (tx, ty)."""

    scale: float
    rotation: float
    tx: float
    ty: float

    @property
    def matrix(self) -> np.ndarray:
        c = self.scale * math.cos(self.rotation)
        s = self.scale * math.sin(self.rotation)
        return np.array([[c, -s], [s, c]])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.tx, self.ty])

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return points @ self.matrix.T + self.translation

    def inverse(self) -> "SimilarityTransform":
        inv_scale = 1.0 / self.scale
        inv_rot = -self.rotation
        c = inv_scale * math.cos(inv_rot)
        s = inv_scale * math.sin(inv_rot)
        tx = -(c * self.tx - s * self.ty)
        ty = -(s * self.tx + c * self.ty)
        return SimilarityTransform(inv_scale, inv_rot, tx, ty)

    @staticmethod
    def identity() -> "SimilarityTransform":
        return SimilarityTransform(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class AffineTransform:
    """p -> A @ p + t; reflections (det(A) < 0) are representable."""

    A: np.ndarray  # (2, 2)
    t: np.ndarray  # (2,)

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return points @ np.asarray(self.A).T + np.asarray(self.t)

    def inverse(self) -> "AffineTransform":
        A_inv = np.linalg.inv(self.A)
        return AffineTransform(A_inv, -A_inv @ self.t)

    @staticmethod
    def identity() -> "AffineTransform":
        return AffineTransform(np.eye(2), np.zeros(2))


def estimate_similarity(src, dst) -> SimilarityTransform:
    """Least-squares similarity transform mapping src onto dst.

    Closed-form solution of min_T sum ||T(src_i) - dst_i||^2 over scale,
    rotation and translation.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise FitError("src and dst must be equally sized (N, 2) arrays")
    if len(src) < 2:
        raise FitError("similarity fit needs at least 2 point pairs")
    src_mean = src.mean(axis=0)
    dst_mean = dst.mean(axis=0)
    src_c = src - src_mean
    dst_c = dst - dst_mean
    norm = float((src_c**2).sum())
    if norm == 0.0:
        raise FitError("all source points coincide; similarity fit is degenerate")
    a = float((src_c * dst_c).sum()) / norm
    b = float((src_c[:, 0] * dst_c[:, 1] - src_c[:, 1] * dst_c[:, 0]).sum()) / norm
    scale = math.hypot(a, b)
    if scale == 0.0:
        raise FitError("destination collapses to a point; similarity fit is degenerate")
    rotation = math.atan2(b, a)
    # t = dst_mean - sR @ src_mean, with sR = [[a, -b], [b, a]]
    tx = dst_mean[0] - (a * src_mean[0] - b * src_mean[1])
    ty = dst_mean[1] - (b * src_mean[0] + a * src_mean[1])
    return SimilarityTransform(scale, rotation, tx, ty)


def estimate_affine(src, dst) -> AffineTransform:
    """Least-squares 6-parameter affine fit; exact on affine-generated data."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise FitError("src and dst must be equally sized (N, 2) arrays")
    if len(src) < 3:
        raise FitError("affine fit needs at least 3 point pairs")
    design = np.hstack([src, np.ones((len(src), 1))])
    if np.linalg.matrix_rank(design, tol=1e-10 * max(1.0, np.abs(src).max())) < 3:
        raise FitError("source points are collinear; affine fit is degenerate")
    coef, *_ = np.linalg.lstsq(design, dst, rcond=None)
    A = coef[:2].T
    t = coef[2]
    return AffineTransform(A, t)


def apply_transform(transform, landmarks: LandmarkSet) -> LandmarkSet:
    """Transform all point slots of a landmark set; presence flags pass through."""
    return LandmarkSet(transform.apply(landmarks.points), landmarks.present)


@dataclass(frozen=True)
class MeanShape:
    """Average training shape scaled into a margin sub-rectangle of the canvas."""

    points: np.ndarray  # (60, 2) canonical-frame coordinates
    canvas: int
    margin: float

    @property
    def width(self) -> float:
        return float(self.points[:, 0].max() - self.points[:, 0].min())

    @property
    def height(self) -> float:
        return float(self.points[:, 1].max() - self.points[:, 1].min())


def compute_mean_shape(
    shapes: list[LandmarkSet],
    canvas: int = DEFAULT_CANVAS,
    margin: float = DEFAULT_MARGIN,
) -> MeanShape:
    """Pointwise average of complete shapes, fitted into the canvas margins.

    The fitted transform is uniform scale plus translation (no rotation); the
    result's bounding box sits centered in the sub-rectangle inset by
    margin * canvas on every side.
    """
    if not shapes:
        raise FitError("cannot average an empty list of shapes")
    for s in shapes:
        if not s.complete:
            raise SchemaError("mean shape requires complete landmark sets")
    mean = np.mean([s.points for s in shapes], axis=0)
    lo = mean.min(axis=0)
    hi = mean.max(axis=0)
    extent = hi - lo
    if extent[0] <= 0.0 or extent[1] <= 0.0:
        raise FitError("mean shape bounding box is degenerate")
    inner = canvas * (1.0 - 2.0 * margin)
    scale = min(inner / extent[0], inner / extent[1])
    scaled = (mean - (lo + hi) / 2.0) * scale + canvas / 2.0
    return MeanShape(points=scaled, canvas=canvas, margin=margin)


def render_heatmap(
    landmarks: LandmarkSet,
    canvas: int = DEFAULT_CANVAS,
    radius: float = DEFAULT_HEATMAP_RADIUS,
) -> np.ndarray:
    """Landmark heatmap H(p) = 1 / (1 + d(p)) truncated at distance `radius`.

    d(p) is the distance from pixel p to the nearest landmark.  The pixel
    nearest to each in-canvas landmark is pinned to 1.0 so the map always
    peaks at exactly 1 when any landmark lies inside the canvas.
    """
    if not landmarks.complete:
        raise SchemaError("heatmap rendering requires a complete landmark set")
    pts = landmarks.points
    ys, xs = np.mgrid[0:canvas, 0:canvas]
    grid = np.stack([xs, ys], axis=-1).astype(np.float64)  # (H, W, 2) as (x, y)
    diff = grid[:, :, None, :] - pts[None, None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1)).min(axis=-1)
    heat = np.where(dist <= radius, 1.0 / (1.0 + dist), 0.0)
    for x, y in pts:
        if 0 <= x < canvas and 0 <= y < canvas:
            px = min(int(round(x)), canvas - 1)
            py = min(int(round(y)), canvas - 1)
            heat[py, px] = 1.0
    return heat


def warp_image(
    image: np.ndarray,
    transform,
    out_shape: tuple[int, int] | None = None,
    fill: float = 1.0,
) -> np.ndarray:
    """Resample an image under a point transform using bilinear interpolation.

    `transform` maps input-frame points to output-frame points (the same
    convention as landmark mapping); sampling uses its inverse.  Pixels that
    map outside the source image are set to `fill`.  An exact identity
    transform reproduces the image bit-exactly.
    """
    if out_shape is None:
        out_shape = image.shape[:2]
    H, W = out_shape
    inv = transform.inverse()
    ys, xs = np.mgrid[0:H, 0:W]
    coords = np.stack([xs.ravel(), ys.ravel()], axis=-1).astype(np.float64)
    src = inv.apply(coords)
    sx, sy = src[:, 0], src[:, 1]

    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    h, w = image.shape[:2]
    valid = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)
    x0c = np.clip(x0, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)

    v00 = image[y0c, x0c]
    v10 = image[y0c, x1c]
    v01 = image[y1c, x0c]
    v11 = image[y1c, x1c]
    top = v00 * (1.0 - fx) + v10 * fx
    bot = v01 * (1.0 - fx) + v11 * fx
    out = top * (1.0 - fy) + bot * fy
    out = np.where(valid, out, fill)
    return out.reshape(H, W)
