"""Scikit-learn style estimator facade over the cascade detector.

X is an array of grayscale face crops (n, canvas, canvas) with values in
[0, 1]; y is an array of landmark coordinates (n, 60, 2) in crop frame.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .cascade import (
    CascadeConfig,
    TrainingSchedule,
    init_model,
    train,
)
from .geometry import compute_mean_shape
from .metrics import evaluate_predictions
from .schema import NUM_LANDMARKS, LandmarkSet


def _check_inputs(X, y, canvas):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 3 or X.shape[1:] != (canvas, canvas):
        raise ValueError(f"X must have shape (n, {canvas}, {canvas}), got {X.shape}")
    if y.shape != (len(X), NUM_LANDMARKS, 2):
        raise ValueError(f"y must have shape (n, 60, 2), got {y.shape}")
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise ValueError("X and y must be finite")
    return X, y


class CascadeLandmarkDetector(BaseEstimator):
    """Cascaded landmark regressor with fit/predict/score semantics.

    Parameters mirror the network and training configuration; `fit` computes
    the mean shape from the training targets, initializes the cascade and
    trains the stages sequentially.
    """

    def __init__(
        self,
        n_stages=2,
        canvas=112,
        heatmap_radius=16.0,
        conv_widths=(8, 16, 32, 64),
        dense_units=64,
        feature_grid=28,
        max_epochs=150,
        patience=15,
        learning_rate=1e-3,
        batch_size=64,
        margin=0.1,
        random_state=0,
    ):
        self.n_stages = n_stages
        self.canvas = canvas
        self.heatmap_radius = heatmap_radius
        self.conv_widths = conv_widths
        self.dense_units = dense_units
        self.feature_grid = feature_grid
        self.max_epochs = max_epochs
        self.patience = patience
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.margin = margin
        self.random_state = random_state

    def _config(self) -> CascadeConfig:
        return CascadeConfig(
            canvas=self.canvas,
            n_stages=self.n_stages,
            heatmap_radius=self.heatmap_radius,
            conv_widths=tuple(self.conv_widths),
            dense_units=self.dense_units,
            feature_grid=self.feature_grid,
        )

    def fit(self, X, y, X_val=None, y_val=None):
        """Train on crops X and landmark targets y.

        Without an explicit validation set the last 10% of the samples are
        held out for early stopping.
        """
        X, y = _check_inputs(X, y, self.canvas)
        if X_val is None:
            n_val = max(1, len(X) // 10)
            if len(X) < 2:
                X_val, y_val = X, y
            else:
                X, X_val = X[:-n_val], X[-n_val:]
                y, y_val = y[:-n_val], y[-n_val:]
        else:
            X_val, y_val = _check_inputs(X_val, y_val, self.canvas)

        from .dataset import TrainingSample  # local import avoids a cycle at load time

        def to_samples(images, targets, prefix):
            return [
                TrainingSample(img, LandmarkSet(pts), f"{prefix}{i}")
                for i, (img, pts) in enumerate(zip(images, targets))
            ]

        shapes = [LandmarkSet(pts) for pts in y]
        mean_shape = compute_mean_shape(shapes, canvas=self.canvas, margin=self.margin)
        model = init_model(self._config(), mean_shape, seed=self.random_state)
        schedule = TrainingSchedule(
            max_epochs=self.max_epochs,
            patience=self.patience,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            seed=self.random_state,
        )
        self.loss_curve_ = train(
            model,
            to_samples(X, y, "train-"),
            to_samples(X_val, y_val, "val-"),
            schedule,
        )
        self.model_ = model
        self.mean_shape_ = mean_shape
        return self

    def predict(self, X):
        """Predict (n, 60, 2) landmark coordinates for crops X."""
        check_is_fitted(self, "model_")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        return np.stack([self.model_.forward(img).points for img in X])

    def score(self, X, y):
        """Negative mean chin-normalized error (higher is better)."""
        check_is_fitted(self, "model_")
        X, y = _check_inputs(X, y, self.canvas)
        preds = self.predict(X)
        report = evaluate_predictions(
            (str(i), LandmarkSet(p), LandmarkSet(t))
            for i, (p, t) in enumerate(zip(preds, y))
        )
        return -report.mean_error
