"""Multi-stage cascaded shape regression detector.

Stage 1 consumes the input image and regresses a correction to the mean shape
S0.  Connection layers then normalize the image into the canonical frame of
the current shape estimate, render a landmark heatmap, and project the stage's
dense activation into a coarse feature image; those three planes feed the next
stage.  Stages are trained sequentially with earlier stages frozen.

All tensors are double precision; checkpoints serialize to 32-bit floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .errors import ConfigError, TrainingError
from .geometry import (
    DEFAULT_CANVAS,
    DEFAULT_HEATMAP_RADIUS,
    MeanShape,
    SimilarityTransform,
    estimate_similarity,
    render_heatmap,
    warp_image,
)
from .metrics import chin_distance as _chin_distance
from .metrics import normalized_error
from .schema import CHIN_LEFT, CHIN_RIGHT, NUM_LANDMARKS, LandmarkSet

torch.set_default_dtype(torch.float64)


@dataclass(frozen=True)
class CascadeConfig:
    canvas: int = DEFAULT_CANVAS
    n_stages: int = 2
    heatmap_radius: float = DEFAULT_HEATMAP_RADIUS
    conv_widths: tuple[int, ...] = (32, 64, 128, 256)  # one entry per conv block
    dense_units: int = 256
    feature_grid: int = 56

    def __post_init__(self):
        if not 1 <= self.n_stages <= 3:
            raise ConfigError(f"stage count must be 1..3, got {self.n_stages}")
        if self.canvas % (2 ** len(self.conv_widths)) != 0:
            raise ConfigError(
                f"canvas {self.canvas} not divisible by 2^{len(self.conv_widths)} pooling"
            )

    def to_json(self) -> dict:
        return {
            "canvas": self.canvas,
            "n_stages": self.n_stages,
            "heatmap_radius": self.heatmap_radius,
            "conv_widths": list(self.conv_widths),
            "dense_units": self.dense_units,
            "feature_grid": self.feature_grid,
        }

    @staticmethod
    def from_json(obj) -> "CascadeConfig":
        return CascadeConfig(
            canvas=int(obj["canvas"]),
            n_stages=int(obj["n_stages"]),
            heatmap_radius=float(obj["heatmap_radius"]),
            conv_widths=tuple(obj["conv_widths"]),
            dense_units=int(obj["dense_units"]),
            feature_grid=int(obj["feature_grid"]),
        )


# Reduced widths for tests and desk-scale experiments.
def desk_config(n_stages: int = 1, canvas: int = DEFAULT_CANVAS) -> CascadeConfig:
    return CascadeConfig(
        canvas=canvas,
        n_stages=n_stages,
        conv_widths=(8, 16, 32, 64),
        dense_units=64,
        feature_grid=28,
    )


def tiny_config(n_stages: int = 1, canvas: int = 16) -> CascadeConfig:
    """Gradient-check scale: one block of 2 conv filters, 8 dense units."""
    return CascadeConfig(
        canvas=canvas,
        n_stages=n_stages,
        heatmap_radius=4.0,
        conv_widths=(2,),
        dense_units=8,
        feature_grid=4,
    )


@dataclass
class TrainingSchedule:
    max_epochs: int = 150
    patience: int = 15
    learning_rate: float = 1e-3
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.patience >= self.max_epochs:
            raise ConfigError("patience must be smaller than max_epochs")


class StageNet(nn.Module):
    """Per-stage feature extractor, landmark regressor and connection projection."""

    def __init__(self, in_channels: int, config: CascadeConfig):
        super().__init__()
        layers: list[nn.Module] = []
        channels = in_channels
        for width in config.conv_widths:
            layers += [
                nn.Conv2d(channels, width, kernel_size=3, padding=1),
                nn.ReLU(),
                nn.Conv2d(width, width, kernel_size=3, padding=1),
                nn.ReLU(),
                nn.MaxPool2d(2),
            ]
            channels = width
        self.features = nn.Sequential(*layers)
        spatial = config.canvas // (2 ** len(config.conv_widths))
        self.dense = nn.Linear(channels * spatial * spatial, config.dense_units)
        self.regress = nn.Linear(config.dense_units, 2 * NUM_LANDMARKS)
        self.feature_proj = nn.Linear(config.dense_units, config.feature_grid**2)
        self.canvas = config.canvas
        self.feature_grid = config.feature_grid
        # Zero-initialized regression head: an untrained stage predicts delta = 0.
        nn.init.zeros_(self.regress.weight)
        nn.init.zeros_(self.regress.bias)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Return (delta, dense activation); delta has shape (N, 60, 2)."""
        h = self.features(x)
        act = torch.relu(self.dense(h.flatten(1)))
        delta = self.regress(act).view(-1, NUM_LANDMARKS, 2)
        return delta, act

    def feature_image(self, act: torch.Tensor) -> torch.Tensor:
        """Project the dense activation to a coarse grid, upsampled to the canvas."""
        g = self.feature_grid
        coarse = torch.relu(self.feature_proj(act)).view(-1, 1, g, g)
        return nn.functional.interpolate(
            coarse, size=(self.canvas, self.canvas), mode="bilinear", align_corners=False
        )


class CascadeModel:
    """Mean shape plus an ordered list of stage networks."""

    def __init__(self, config: CascadeConfig, mean_shape: MeanShape, stages):
        if len(stages) != config.n_stages:
            raise ConfigError("stage list length does not match config")
        self.config = config
        self.mean_shape = mean_shape
        self.stages = list(stages)

    @property
    def s0(self) -> np.ndarray:
        return self.mean_shape.points

    def _stage_input(self, image: np.ndarray, shape: np.ndarray, prev_act, stage_index):
        """Connection layers: canonical warp, heatmap and feature image planes."""
        canvas = self.config.canvas
        if stage_index == 0:
            return SimilarityTransform.identity(), image[None, :, :], None
        spread = shape.std(axis=0)
        if float(spread.max()) == 0.0:
            raise TrainingError("degenerate shape: all landmarks coincide")
        transform = estimate_similarity(shape, self.s0)
        warped = warp_image(image, transform, out_shape=(canvas, canvas), fill=1.0)
        normalized = transform.apply(shape)
        heat = render_heatmap(
            LandmarkSet(normalized), canvas, self.config.heatmap_radius
        )
        feat = (
            self.stages[stage_index - 1]
            .feature_image(prev_act)
            .detach()
            .numpy()[0, 0]
        )
        return transform, np.stack([warped, heat, feat]), None

    def forward_upto(self, image: np.ndarray, n_stages: int) -> LandmarkSet:
        """Run the first `n_stages` stages on one canvas-sized image."""
        canvas = self.config.canvas
        if image.shape != (canvas, canvas):
            raise ConfigError(f"expected {(canvas, canvas)} image, got {image.shape}")
        shape = self.s0.copy()
        prev_act = None
        with torch.no_grad():
            for t in range(n_stages):
                transform, planes, _ = self._stage_input(image, shape, prev_act, t)
                x = torch.from_numpy(np.ascontiguousarray(planes))[None]
                delta, act = self.stages[t](x)
                canonical = transform.apply(shape) + delta.numpy()[0]
                shape = transform.inverse().apply(canonical)
                prev_act = act
        return LandmarkSet(shape)

    def forward(self, image: np.ndarray) -> LandmarkSet:
        """Full-cascade landmark prediction; returns all 60 points present."""
        return self.forward_upto(image, self.config.n_stages)

    def predict_batch(self, images) -> list[LandmarkSet]:
        return [self.forward(img) for img in images]


def init_model(config: CascadeConfig, mean_shape: MeanShape, seed: int = 0) -> CascadeModel:
    """Build a cascade with seeded weights and zero-initialized regression heads."""
    if mean_shape.canvas != config.canvas:
        raise ConfigError("mean shape canvas does not match network canvas")
    torch.manual_seed(seed)
    stages = [
        StageNet(1 if t == 0 else 3, config) for t in range(config.n_stages)
    ]
    return CascadeModel(config, mean_shape, stages)


def loss(pred: LandmarkSet, truth: LandmarkSet) -> float:
    """Chin-normalized mean landmark distance (the training loss)."""
    return normalized_error(pred, truth).normalized


def _loss_batch(pred_pts: torch.Tensor, truth_pts: torch.Tensor, chin: torch.Tensor):
    """Mean over the batch of (mean landmark distance / truth chin distance)."""
    dist = torch.linalg.norm(pred_pts - truth_pts, dim=2).mean(dim=1)
    return (dist / chin).mean()


@dataclass
class EpochRecord:
    stage: int
    epoch: int
    train_loss: float
    val_loss: float


def _prepare_stage_data(model: CascadeModel, samples, stage_index: int):
    """Precompute the frozen-prefix stage inputs for one dataset.

    Returns tensors: inputs (N, C, H, W), canonical base shapes (N, 60, 2),
    inverse-transform matrices (N, 2, 2) and offsets (N, 2), targets
    (N, 60, 2) in the image frame, and chin distances (N,).
    """
    inputs, bases, inv_mats, inv_offs, targets, chins = [], [], [], [], [], []
    for sample in samples:
        shape = model.s0.copy()
        prev_act = None
        with torch.no_grad():
            for t in range(stage_index):
                transform, planes, _ = model._stage_input(sample.image, shape, prev_act, t)
                x = torch.from_numpy(np.ascontiguousarray(planes))[None]
                delta, act = model.stages[t](x)
                canonical = transform.apply(shape) + delta.numpy()[0]
                shape = transform.inverse().apply(canonical)
                prev_act = act
            transform, planes, _ = model._stage_input(
                sample.image, shape, prev_act, stage_index
            )
        inv = transform.inverse()
        inputs.append(planes)
        bases.append(transform.apply(shape))
        inv_mats.append(inv.matrix)
        inv_offs.append(inv.translation)
        truth = sample.landmarks
        targets.append(truth.points)
        chins.append(_chin_distance(truth))
    return (
        torch.from_numpy(np.stack(inputs)),
        torch.from_numpy(np.stack(bases)),
        torch.from_numpy(np.stack(inv_mats)),
        torch.from_numpy(np.stack(inv_offs)),
        torch.from_numpy(np.stack(targets)),
        torch.tensor(chins),
    )


def _image_frame(pred_canonical, inv_mats, inv_offs):
    return torch.einsum("nij,nkj->nki", inv_mats, pred_canonical) + inv_offs[:, None, :]


def train(
    model: CascadeModel,
    train_samples,
    val_samples,
    schedule: TrainingSchedule,
) -> list[EpochRecord]:
    """Train stages sequentially; earlier stages stay frozen.

    Each stage trains until the validation loss has not improved for
    `patience` epochs or `max_epochs` is reached; its best-validation weights
    are restored before the next stage starts.  Returns one record per
    completed epoch per stage.
    """
    if not train_samples or not val_samples:
        raise TrainingError("train and validation sets must be nonempty")
    curves: list[EpochRecord] = []
    rng = np.random.default_rng(schedule.seed)
    torch.manual_seed(schedule.seed)
    n = len(train_samples)
    for stage_index, stage in enumerate(model.stages):
        tr = _prepare_stage_data(model, train_samples, stage_index)
        va = _prepare_stage_data(model, val_samples, stage_index)
        optimizer = torch.optim.Adam(stage.parameters(), lr=schedule.learning_rate)
        best_val = float("inf")
        best_state = {k: v.clone() for k, v in stage.state_dict().items()}
        since_best = 0
        for epoch in range(1, schedule.max_epochs + 1):
            stage.train()
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, schedule.batch_size):
                idx = torch.from_numpy(order[start : start + schedule.batch_size])
                optimizer.zero_grad()
                delta, _ = stage(tr[0][idx])
                pred_img = _image_frame(tr[1][idx] + delta, tr[2][idx], tr[3][idx])
                batch_loss = _loss_batch(pred_img, tr[4][idx], tr[5][idx])
                if not torch.isfinite(batch_loss):
                    raise TrainingError(
                        f"stage {stage_index + 1} loss diverged at epoch {epoch}"
                    )
                batch_loss.backward()
                optimizer.step()
                epoch_loss += float(batch_loss.detach()) * len(idx)
            epoch_loss /= n
            stage.eval()
            with torch.no_grad():
                delta, _ = stage(va[0])
                pred_img = _image_frame(va[1] + delta, va[2], va[3])
                val_loss = float(_loss_batch(pred_img, va[4], va[5]))
            curves.append(EpochRecord(stage_index + 1, epoch, epoch_loss, val_loss))
            if val_loss < best_val:
                best_val = val_loss
                best_state = {k: v.clone() for k, v in stage.state_dict().items()}
                since_best = 0
            else:
                since_best += 1
                if since_best >= schedule.patience:
                    break
        stage.load_state_dict(best_state)
        stage.eval()
    return curves


def write_loss_curves(curves: list[EpochRecord], path) -> None:
    """Tabular text: one row per epoch, columns stage/epoch/train_loss/val_loss."""
    lines = ["stage\tepoch\ttrain_loss\tval_loss"]
    for rec in curves:
        lines.append(
            f"{rec.stage}\t{rec.epoch}\t{rec.train_loss:.10f}\t{rec.val_loss:.10f}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
