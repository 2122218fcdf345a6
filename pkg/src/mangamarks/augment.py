"""Training-set augmentation by Gaussian-sampled similarity transforms.

Rotation, scale and translation factors are each drawn from an independent
Gaussian; translation factors are converted to pixels by multiplying with the
scaled mean shape's width and height.  Defaults: rotation N(0, 20 deg),
scale N(1, 0.1), translation factors N(0, 0.1), five copies per image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import TrainingSample
from .geometry import MeanShape, SimilarityTransform, warp_image
from .schema import LandmarkSet


@dataclass(frozen=True)
class AugmentationSpec:
    rotation_mean_deg: float = 0.0
    rotation_sigma_deg: float = 20.0
    scale_mean: float = 1.0
    scale_sigma: float = 0.1
    translation_mean: float = 0.0
    translation_sigma: float = 0.1
    copies_per_image: int = 5

    def __post_init__(self):
        if min(self.rotation_sigma_deg, self.scale_sigma, self.translation_sigma) < 0:
            raise ValueError("sigma values must be nonnegative")
        if self.copies_per_image < 0:
            raise ValueError("copies_per_image must be nonnegative")


@dataclass(frozen=True)
class AugmentationParams:
    rotation_deg: float
    scale: float
    tx: float  # pixels
    ty: float  # pixels

    @staticmethod
    def identity() -> "AugmentationParams":
        return AugmentationParams(0.0, 1.0, 0.0, 0.0)


def sample_params(
    spec: AugmentationSpec, mean_shape: MeanShape, rng: np.random.Generator
) -> AugmentationParams:
    """Draw one parameter set; translation factors become pixels via the mean shape."""
    rotation = rng.normal(spec.rotation_mean_deg, spec.rotation_sigma_deg)
    scale = rng.normal(spec.scale_mean, spec.scale_sigma)
    fx = rng.normal(spec.translation_mean, spec.translation_sigma)
    fy = rng.normal(spec.translation_mean, spec.translation_sigma)
    return AugmentationParams(
        rotation_deg=rotation,
        scale=scale,
        tx=fx * mean_shape.width,
        ty=fy * mean_shape.height,
    )


def params_to_transform(params: AugmentationParams, canvas: int) -> SimilarityTransform:
    """Rotate about the canvas center, scale about it, then translate."""
    theta = math.radians(params.rotation_deg)
    s = params.scale
    c = canvas / 2.0
    # Fixed point at the center: t = center - sR @ center, plus the translation.
    cos_t = s * math.cos(theta)
    sin_t = s * math.sin(theta)
    tx = c - (cos_t * c - sin_t * c) + params.tx
    ty = c - (sin_t * c + cos_t * c) + params.ty
    return SimilarityTransform(s, theta, tx, ty)


def augment_sample(
    sample: TrainingSample, params: AugmentationParams, fill: float = 1.0
) -> TrainingSample:
    """Apply one sampled similarity transform to a sample's image and landmarks.

    Out-of-canvas pixels are filled with white (1.0) to match manga page
    backgrounds.
    """
    canvas = sample.image.shape[0]
    transform = params_to_transform(params, canvas)
    image = warp_image(sample.image, transform, out_shape=sample.image.shape, fill=fill)
    landmarks = LandmarkSet(
        transform.apply(sample.landmarks.points), sample.landmarks.present
    )
    return TrainingSample(
        image=image,
        landmarks=landmarks,
        record_id=sample.record_id,
        augmentation_id=sample.augmentation_id,
        crop_transform=sample.crop_transform,
    )


def augment_dataset(
    samples: list[TrainingSample],
    spec: AugmentationSpec,
    mean_shape: MeanShape,
    seed: int = 0,
    include_originals: bool = False,
) -> list[TrainingSample]:
    """Emit the transformed copies of every sample, deterministically per seed.

    With k copies per image the output has k * n samples (the stated factor of
    five); originals are kept only when `include_originals` is set or k = 0.
    Each copy gets its own RNG stream derived from (seed, sample index, copy
    index) so parallel and serial generation agree.
    """
    out: list[TrainingSample] = []
    if include_originals or spec.copies_per_image == 0:
        out.extend(samples)
    for i, sample in enumerate(samples):
        for copy in range(spec.copies_per_image):
            rng = np.random.default_rng([seed, i, copy])
            params = sample_params(spec, mean_shape, rng)
            augmented = augment_sample(sample, params)
            out.append(
                TrainingSample(
                    image=augmented.image,
                    landmarks=augmented.landmarks,
                    record_id=sample.record_id,
                    augmentation_id=copy + 1,
                    crop_transform=sample.crop_transform,
                )
            )
    return out
