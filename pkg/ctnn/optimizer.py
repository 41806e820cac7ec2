'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
from typing import Dict

import numpy as np

from ctnn.defines import ADAM, SGD as SGD_NAME
from ctnn.exceptions import ConfigError


class Optimizer:
    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        raise NotImplementedError


class SGD(Optimizer):
    def __init__(self, lr: float = 0.01):
        self.lr = lr

    def step(self, params, grads):
        for k in params:
            params[k] -= (self.lr * grads[k]).astype(params[k].dtype, copy=False)


class Adam(Optimizer):
    """
    Adaptive moment estimation. Moments are keyed by parameter name and created
    lazily with the dtype of the parameter they track. Updates happen in place,
    so params must be the arrays owned by the model.
    """
    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        step_size = self.lr / bc1

        for k in params:
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])

            self.m[k] *= self.beta1
            self.m[k] += (1.0 - self.beta1) * g
            self.v[k] *= self.beta2
            self.v[k] += (1.0 - self.beta2) * (g * g)

            denom = np.sqrt(self.v[k] * (1.0 / bc2)) + self.epsilon
            params[k] -= (step_size * self.m[k] / denom).astype(params[k].dtype, copy=False)


def make_optimizer(config: dict) -> Optimizer:
    """
    config: mapping with the optimizer section of the run config (name, lr, beta1, beta2, epsilon)
    """
    name = config.get('name', ADAM)
    if name == ADAM:
        return Adam(lr=config.get('lr', 1e-3), beta1=config.get('beta1', 0.9), beta2=config.get('beta2', 0.999), epsilon=config.get('epsilon', 1e-8))
    if name == SGD_NAME:
        return SGD(lr=config.get('lr', 0.01))
    raise ConfigError(f'unknown optimizer {name!r}')
