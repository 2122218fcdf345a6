import pytest
import yaml

from mangamarks.config import PipelineConfig
from mangamarks.errors import ConfigError


def test_default_config_round_trips(tmp_path):
    config = PipelineConfig()
    path = tmp_path / "config.yaml"
    config.save(path)
    loaded = PipelineConfig.load(path)
    assert loaded == config


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("")
    assert PipelineConfig.load(path) == PipelineConfig()


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknown config keys"):
        PipelineConfig.from_dict({"trainig": {}})


def test_unknown_section_key_rejected():
    with pytest.raises(ConfigError, match="network"):
        PipelineConfig.from_dict({"network": {"canvs": 112}})


def test_section_must_be_mapping():
    with pytest.raises(ConfigError, match="must be a mapping"):
        PipelineConfig.from_dict({"training": 3})


def test_partial_overrides(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({"seed": 7, "network": {"stages": 1}}))
    config = PipelineConfig.load(path)
    assert config.seed == 7
    assert config.network.stages == 1
    assert config.network.canvas == 112  # untouched default


def test_derived_objects():
    config = PipelineConfig.from_dict(
        {"network": {"canvas": 32, "conv_widths": [4, 8], "feature_grid": 8}}
    )
    cc = config.network.cascade_config()
    assert cc.canvas == 32 and cc.conv_widths == (4, 8)
    schedule = config.training.schedule(5)
    assert schedule.seed == 5
    assert config.dataset.ratios == (0.8, 0.1, 0.1)
