'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
import os

import pytest

from ctnn.config import DEFAULT_CONFIG, Config, merge
from ctnn.exceptions import ConfigError


def test_defaults(monkeypatch):
    monkeypatch.delenv('CTNN_CONFIG', raising=False)
    config = Config()
    assert config.seed == 42
    assert config.dataset.per_class == 30
    assert config.model.topology == [1568, 512, 256, 100, 256, 512, 1568]
    assert config.optimizer.batch_size == 30
    assert config.training.epochs == 200
    assert config.threshold == 100
    assert len(config.sweep.similar_fractions) == 11
    assert config.missing_section == {}


def test_dict_is_deep_merged():
    config = Config({'dataset': {'per_class': 5}})
    assert config.dataset.per_class == 5
    assert config.dataset.test_per_class == 10
    assert DEFAULT_CONFIG['dataset']['per_class'] == 30


def test_yaml_file():
    config = Config(os.path.join(os.path.dirname(__file__), '..', 'config_test.yaml'))
    assert config.seed == 7
    assert config.log.disabled is True
    assert config.model.topology[3] == 100
    assert config.optimizer.lr == 1e-3


def test_json_file(tmp_path):
    path = tmp_path / 'c.json'
    path.write_text('{"seed": 3, "sweep": {"workers": 4}}')
    config = Config(str(path))
    assert config.seed == 3
    assert config.sweep.workers == 4


def test_env_var(tmp_path, monkeypatch):
    path = tmp_path / 'c.yaml'
    path.write_text('seed: 11\n')
    monkeypatch.setenv('CTNN_CONFIG', str(path))
    assert Config().seed == 11


def test_errors(tmp_path):
    with pytest.raises(ConfigError):
        Config(str(tmp_path / 'missing.yaml'))
    bad = tmp_path / 'bad.yaml'
    bad.write_text('seed: [1\n')
    with pytest.raises(ConfigError):
        Config(str(bad))
    scalar = tmp_path / 'scalar.yaml'
    scalar.write_text('3\n')
    with pytest.raises(ConfigError):
        Config(str(scalar))
    with pytest.raises(ConfigError):
        Config(3)


def test_override_skips_unset_flags():
    config = Config({'seed': 5, 'training': {'epochs': 9}})
    ret = config.override({'seed': None, 'training': {'epochs': 2}, 'threshold': None, 'sequence': {'length': None}})
    assert ret.seed == 5
    assert ret.training.epochs == 2
    assert ret.threshold == 100
    assert ret.sequence.length == 10
    assert config.training.epochs == 9


def test_to_dict_round_trip():
    config = Config({'seed': 8})
    assert Config(config.to_dict()).to_dict() == config.to_dict()
    assert isinstance(config.to_dict()['dataset'], dict)


def test_merge():
    assert merge({'a': {'b': 1, 'c': 2}}, {'a': {'c': 3}, 'd': 4}) == {'a': {'b': 1, 'c': 3}, 'd': 4}
