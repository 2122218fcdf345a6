"""Facial landmark tooling for manga-style face images.

Annotation quality control and completion, dataset preparation, augmentation,
a cascaded shape-regression detector, and chin-normalized evaluation.
"""

from .estimator import CascadeLandmarkDetector
from .schema import LandmarkSet

__all__ = ["CascadeLandmarkDetector", "LandmarkSet"]

__version__ = "0.1.0"
