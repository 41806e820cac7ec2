'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
import numpy as np
import pytest

from ctnn.exceptions import ConfigError
from ctnn.optimizer import SGD, Adam, make_optimizer


def test_sgd_step():
    params = {'w': np.array([1.0, -2.0])}
    SGD(lr=0.5).step(params, {'w': np.array([2.0, -2.0])})
    assert params['w'].tolist() == [0.0, -1.0]


def test_adam_first_step_is_lr_times_sign():
    params = {'w': np.array([1.0, 1.0, 1.0])}
    Adam(lr=0.01).step(params, {'w': np.array([3.0, -0.5, 0.0])})
    np.testing.assert_allclose(params['w'], [0.99, 1.01, 1.0], atol=1e-8)


def test_adam_updates_in_place_and_keeps_dtype():
    w = np.ones(4, dtype=np.float32)
    params = {'w': w}
    opt = Adam()
    for _ in range(3):
        opt.step(params, {'w': np.full(4, 0.1, dtype=np.float32)})
    assert params['w'] is w
    assert w.dtype == np.float32
    assert opt.t == 3
    assert np.all(w < 1)


def test_make_optimizer():
    opt = make_optimizer({'name': 'adam', 'lr': 0.002})
    assert isinstance(opt, Adam)
    assert opt.lr == 0.002
    assert isinstance(make_optimizer({}), Adam)
    assert isinstance(make_optimizer({'name': 'sgd', 'lr': 0.1}), SGD)
    with pytest.raises(ConfigError):
        make_optimizer({'name': 'rmsprop'})
