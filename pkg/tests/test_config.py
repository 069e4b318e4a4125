"""Configuration loading: precedence, validation, file formats."""

import json
import sys

import pytest

from samic.config import ConfigurationError, NetConfig, TrainConfig, load_configs


def test_defaults():
    net, train = load_configs(None)
    assert net == NetConfig()
    assert train == TrainConfig()


def test_file_overrides_defaults(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"net": {"num_4dconv_layers": 1},
                                "train": {"lr": 0.01, "seed": 5}}))
    net, train = load_configs(path)
    assert net.num_4dconv_layers == 1
    assert train.lr == 0.01 and train.seed == 5
    assert train.batch_size == TrainConfig().batch_size


def test_flags_override_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"train": {"seed": 5, "max_epochs": 50}}))
    _, train = load_configs(path, seed=9)
    assert train.seed == 9
    assert train.max_epochs == 50


def test_none_overrides_are_ignored(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"train": {"seed": 5}}))
    _, train = load_configs(path, seed=None)
    assert train.seed == 5


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"net": {"learning_rate": 0.1}}))
    with pytest.raises(ConfigurationError):
        load_configs(path)


def test_toml_support_tracks_python_version(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text('[train]\nseed = 5\n')
    if sys.version_info >= (3, 11):
        _, train = load_configs(path)
        assert train.seed == 5
    else:
        with pytest.raises(ConfigurationError, match="JSON"):
            load_configs(path)


def test_invalid_values_rejected():
    with pytest.raises(ConfigurationError):
        NetConfig(num_4dconv_layers=0)
    with pytest.raises(ConfigurationError):
        NetConfig(conv4d_mode="sparse")
    with pytest.raises(ConfigurationError):
        TrainConfig(subsample_fraction=0.0)
    with pytest.raises(ConfigurationError):
        TrainConfig(lr=-1)
