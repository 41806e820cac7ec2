'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
import copy
import os

import yaml

from ctnn.defines import DEFAULT_THRESHOLD, DEFAULT_TOPOLOGY
from ctnn.exceptions import ConfigError


DEFAULT_CONFIG = {
    'seed': 42,
    'out': 'runs',
    'log': {'filename': 'ctnn.log', 'level': 'WARNING', 'disabled': False},
    'dataset': {
        'per_class': 30,
        'test_per_class': 10,
        'noise_sigma': 3.0,
        'translation': 0,
        'tone_jitter': 0.03,
    },
    'model': {'topology': list(DEFAULT_TOPOLOGY)},
    'optimizer': {'name': 'adam', 'lr': 1e-3, 'beta1': 0.9, 'beta2': 0.999, 'epsilon': 1e-8, 'batch_size': 30},
    'training': {'epochs': 200, 'occlusion': {'probability': 0.3, 'max_fraction': 0.6}},
    'threshold': DEFAULT_THRESHOLD,
    'sequence': {'length': 10, 'similar_fraction': 0.0},
    'sweep': {
        'thresholds': [20.0, 50.0, 100.0, 200.0],
        'similar_fractions': [round(0.1 * i, 1) for i in range(11)],
        'length': 100,
        'occlusion_fractions': [round(0.1 * i, 1) for i in range(11)],
        'test_per_class': 10,
        'workers': 1,
    },
    'demo': {'digit': 4, 'modality': 'visual', 'fraction': 0.5},
}


def merge(base: dict, override: dict) -> dict:
    """
    Deep merge override into a copy of base. Nested dicts are merged key by key,
    every other value in override replaces the one in base.
    """
    ret = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(ret.get(key), dict):
            ret[key] = merge(ret[key], value)
        else:
            ret[key] = copy.deepcopy(value)
    return ret


class AttrDict(dict):
    def __init__(self, d=None):
        super().__init__()
        if d:
            for k, v in d.items():
                self.__setitem__(k, v)

    def __setitem__(self, key, value):
        if isinstance(value, dict):
            value = AttrDict(value)
        super().__setitem__(key, value)

    def __getattr__(self, item):
        return self.__getitem__(item)

    def __missing__(self, key):
        return AttrDict()

    def __repr__(self) -> str:
        return super().__repr__()

    def to_dict(self) -> dict:
        return {k: v.to_dict() if isinstance(v, AttrDict) else v for k, v in self.items()}

    __setattr__ = __setitem__


class Config:
    def __init__(self, config=None):
        """
        config: str, dict, Config or None
            if str, path to a YAML (or JSON) file. Values found in the file or dict are merged
            over DEFAULT_CONFIG. If None, the file named by the CTNN_CONFIG env var is used when
            it exists, otherwise the defaults.
        """
        self.config = AttrDict(DEFAULT_CONFIG)
        self.log_msg = ""

        if isinstance(config, str):
            if config and os.path.exists(config):
                self.config = AttrDict(merge(DEFAULT_CONFIG, self._load(config)))
                self.log_msg = f'Config: use file={config!r} containing the following main keys: {", ".join(self.config.keys())}'
            else:
                raise ConfigError(f'config file {config!r} does not exist')
        elif isinstance(config, dict):
            self.config = AttrDict(merge(DEFAULT_CONFIG, config))
            self.log_msg = f'Config: use dict containing the following main keys: {", ".join(config.keys())}'
        elif isinstance(config, Config):
            self.config = AttrDict(config.to_dict())
            self.log_msg = config.log_msg
        elif config is None and os.environ.get('CTNN_CONFIG') and os.path.exists(os.environ.get('CTNN_CONFIG')):
            config = os.environ.get('CTNN_CONFIG')
            self.config = AttrDict(merge(DEFAULT_CONFIG, self._load(config)))
            self.log_msg = f'Config: use file={config!r} from CTNN_CONFIG containing the following main keys: {", ".join(self.config.keys())}'
        elif config is None:
            self.log_msg = 'Config: no config given => default config.'
        else:
            raise ConfigError(f'Config: only accept str, dict and Config but got {type(config)!r}')

    @staticmethod
    def _load(path: str) -> dict:
        try:
            with open(path) as fp:
                data = yaml.safe_load(fp)
        except yaml.YAMLError as e:
            raise ConfigError(f'unable to parse config file {path!r}: {e}')
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f'config file {path!r} must contain a mapping')
        return data

    def override(self, values: dict) -> 'Config':
        """
        Return a new Config with values (typically command line flags) merged on top.
        Keys mapped to None are skipped so unset flags never mask the file values.
        """
        ret = Config(self)
        ret.config = AttrDict(merge(self.to_dict(), _drop_none(values)))
        return ret

    def to_dict(self) -> dict:
        return self.config.to_dict()

    def __bool__(self):
        return self.config != {}

    def __getattr__(self, attr):
        return self.config[attr]

    def __getitem__(self, key):
        return self.config[key]

    def __contains__(self, item):
        return item in self.config

    def __repr__(self) -> str:
        return self.config.__repr__()


def _drop_none(values: dict) -> dict:
    ret = {}
    for key, value in values.items():
        if isinstance(value, dict):
            value = _drop_none(value)
            if value:
                ret[key] = value
        elif value is not None:
            ret[key] = value
    return ret
