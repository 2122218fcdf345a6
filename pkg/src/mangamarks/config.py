"""Pipeline configuration: a strict, human-editable YAML schema.

Unknown keys are rejected so a typo cannot silently fall back to a default.
A run is reproducible from (config, seed, manifest).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .augment import AugmentationSpec
from .cascade import CascadeConfig, TrainingSchedule
from .errors import ConfigError


@dataclass
class PathsConfig:
    manifest: str = "manifest.jsonl"
    image_root: str = "."
    workdir: str = "work"
    checkpoint: str = "work/model.ckpt"
    report_dir: str = "work/reports"


@dataclass
class DatasetConfig:
    train_ratio: float = 0.8
    validation_ratio: float = 0.1
    test_ratio: float = 0.1

    @property
    def ratios(self):
        return (self.train_ratio, self.validation_ratio, self.test_ratio)


@dataclass
class AugmentConfig:
    enabled: bool = True
    rotation_sigma_deg: float = 20.0
    scale_sigma: float = 0.1
    translation_sigma: float = 0.1
    copies_per_image: int = 5

    def spec(self) -> AugmentationSpec:
        return AugmentationSpec(
            rotation_sigma_deg=self.rotation_sigma_deg,
            scale_sigma=self.scale_sigma,
            translation_sigma=self.translation_sigma,
            copies_per_image=self.copies_per_image,
        )


@dataclass
class NetworkConfig:
    canvas: int = 112
    stages: int = 2
    heatmap_radius: float = 16.0
    conv_widths: list[int] = field(default_factory=lambda: [8, 16, 32, 64])
    dense_units: int = 64
    feature_grid: int = 28
    margin: float = 0.1

    def cascade_config(self) -> CascadeConfig:
        return CascadeConfig(
            canvas=self.canvas,
            n_stages=self.stages,
            heatmap_radius=self.heatmap_radius,
            conv_widths=tuple(self.conv_widths),
            dense_units=self.dense_units,
            feature_grid=self.feature_grid,
        )


@dataclass
class TrainingConfig:
    max_epochs: int = 150
    patience: int = 15
    learning_rate: float = 1e-3
    batch_size: int = 64

    def schedule(self, seed: int) -> TrainingSchedule:
        return TrainingSchedule(
            max_epochs=self.max_epochs,
            patience=self.patience,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            seed=seed,
        )


@dataclass
class EvaluationConfig:
    threshold: float = 0.0333


_SECTIONS = {
    "paths": PathsConfig,
    "dataset": DatasetConfig,
    "augmentation": AugmentConfig,
    "network": NetworkConfig,
    "training": TrainingConfig,
    "evaluation": EvaluationConfig,
}


@dataclass
class PipelineConfig:
    seed: int = 0
    paths: PathsConfig = field(default_factory=PathsConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    augmentation: AugmentConfig = field(default_factory=AugmentConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)

    @staticmethod
    def from_dict(obj: dict) -> "PipelineConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config root must be a mapping")
        known = set(_SECTIONS) | {"seed"}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {"seed": int(obj.get("seed", 0))}
        for name, cls in _SECTIONS.items():
            section = obj.get(name, {})
            if not isinstance(section, dict):
                raise ConfigError(f"config section {name!r} must be a mapping")
            allowed = {f.name for f in fields(cls)}
            bad = set(section) - allowed
            if bad:
                raise ConfigError(f"unknown keys in section {name!r}: {sorted(bad)}")
            kwargs[name] = cls(**section)
        return PipelineConfig(**kwargs)

    @staticmethod
    def load(path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return PipelineConfig.from_dict(yaml.safe_load(fh) or {})

    def save(self, path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            yaml.safe_dump(asdict(self), fh, sort_keys=True)
        tmp.replace(path)
