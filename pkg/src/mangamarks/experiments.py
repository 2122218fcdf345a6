"""Desk-scale experiment grid: stage count x augmentation on/off.

Mirrors the published four-experiment layout; each cell trains a model with
the same split and seed and reports (mean error, A_alpha, failure rate) on
the held-out test set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .augment import AugmentationSpec, augment_dataset
from .cascade import CascadeConfig, TrainingSchedule, init_model, train
from .geometry import compute_mean_shape
from .metrics import FAILURE_THRESHOLD, evaluate

GRID = ((1, False), (1, True), (2, False), (2, True))


@dataclass
class GridRow:
    stages: int
    augmented: bool
    mean_error: float
    auc: float
    failure_rate: float


def run_cell(
    stages: int,
    augmented: bool,
    train_samples,
    val_samples,
    test_samples,
    base_config: CascadeConfig,
    schedule: TrainingSchedule,
    aug_spec: AugmentationSpec | None = None,
    threshold: float = FAILURE_THRESHOLD,
):
    """Train one grid cell and evaluate it; returns (GridRow, model, curves)."""
    config = CascadeConfig(
        canvas=base_config.canvas,
        n_stages=stages,
        heatmap_radius=base_config.heatmap_radius,
        conv_widths=base_config.conv_widths,
        dense_units=base_config.dense_units,
        feature_grid=base_config.feature_grid,
    )
    mean_shape = compute_mean_shape(
        [s.landmarks for s in train_samples], canvas=config.canvas
    )
    fit_samples = train_samples
    if augmented:
        spec = aug_spec or AugmentationSpec()
        fit_samples = augment_dataset(
            train_samples, spec, mean_shape, seed=schedule.seed
        )
    model = init_model(config, mean_shape, seed=schedule.seed)
    curves = train(model, fit_samples, val_samples, schedule)
    report = evaluate(model, test_samples, threshold)
    row = GridRow(
        stages=stages,
        augmented=augmented,
        mean_error=report.mean_error,
        auc=report.auc,
        failure_rate=report.failure_rate,
    )
    return row, model, curves


def run_grid(train_samples, val_samples, test_samples, base_config, schedule, aug_spec=None):
    rows = []
    for stages, augmented in GRID:
        row, _, _ = run_cell(
            stages, augmented, train_samples, val_samples, test_samples,
            base_config, schedule, aug_spec,
        )
        rows.append(row)
    return rows


def format_grid(rows) -> str:
    lines = ["stages\taugmentation\tmean_error\tauc_0.0333\tfailure_rate_pct"]
    for r in rows:
        lines.append(
            f"{r.stages}\t{'yes' if r.augmented else 'no'}\t"
            f"{r.mean_error:.5f}\t{r.auc:.5f}\t{100 * r.failure_rate:.2f}"
        )
    return "\n".join(lines) + "\n"
