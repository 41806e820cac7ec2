'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
import numpy as np
import pytest

from ctnn.defines import LATENT_SIZE, REDUCED_TOPOLOGY
from ctnn.network import AutoEncoder


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run tests that train the full-size network')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: trains the full-size network, run with --runslow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


class IdentityCortex:
    """
    Stand-in cortex that reconstructs its input perfectly, so the thalamus sees the incoming
    frame itself as the next expectation.
    """
    def __init__(self):
        self.calls = 0

    def forward(self, x):
        self.calls += 1
        x = np.asarray(x, dtype=np.float64)
        return x[:LATENT_SIZE], x


@pytest.fixture
def identity_cortex():
    return IdentityCortex()


@pytest.fixture
def reduced_model():
    return AutoEncoder.from_topology(REDUCED_TOPOLOGY, seed=3, dtype=np.float64)
