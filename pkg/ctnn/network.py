'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


Dense feed-forward auto-encoder with hand written backpropagation.
The auto-encoder models the cortex: 1568 inputs, a 100 wide bottleneck,
relu hidden layers and a sigmoid output layer so reconstructions live in [0,1].
'''
from dataclasses import dataclass, field
import logging
import os
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ctnn.callback import EpochCallback, as_callbacks
from ctnn.defines import ENCODER_LAYERS, FRAME_SIZE, LATENT_SIZE, RELU, SIGMOID, TOPOLOGY_LENGTH, WEIGHT_MAGIC
from ctnn.exceptions import (PreconditionViolation, TopologyError, TopologyMismatch, TrainingDiverged,
                             WeightFormatError, WeightTruncatedError)
from ctnn.optimizer import Optimizer, make_optimizer


LOG = logging.getLogger('ctnn')


def mse(a, b) -> float:
    """
    Mean squared error (1/n) * sum((a - b)^2), accumulated in float64.
    Used both as the training loss and as the thalamic difference score.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise PreconditionViolation(f'mse: shape mismatch {a.shape} vs {b.shape}')
    if a.size == 0:
        raise PreconditionViolation('mse: empty vectors')
    d = a - b
    return float(np.mean(d * d))


def as_normalized(values) -> np.ndarray:
    """
    Validate a network-domain vector: every element must lie in [0,1].
    """
    values = np.asarray(values)
    if values.size and (np.min(values) < 0.0 or np.max(values) > 1.0):
        raise PreconditionViolation('normalized vector must lie in [0,1]')
    return values


def _relu(z):
    return np.maximum(z, 0)


def _sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class DenseLayer:
    def __init__(self, weights: np.ndarray, biases: np.ndarray, activation: str):
        if activation not in (RELU, SIGMOID):
            raise TopologyError(f'unsupported activation {activation!r}')
        if weights.ndim != 2 or biases.shape != (weights.shape[0],):
            raise TopologyError(f'layer shape mismatch: weights {weights.shape}, biases {biases.shape}')
        self.weights = weights
        self.biases = biases
        self.activation = activation

    @property
    def fan_in(self) -> int:
        return self.weights.shape[1]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[0]

    def preactivation(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights.T + self.biases

    def activate(self, z: np.ndarray) -> np.ndarray:
        if self.activation == RELU:
            return _relu(z)
        return _sigmoid(z)

    def derivative(self, z: np.ndarray, a: np.ndarray) -> np.ndarray:
        if self.activation == RELU:
            return (z > 0).astype(z.dtype)
        return a * (1 - a)

    def __repr__(self) -> str:
        return f'DenseLayer({self.fan_in}->{self.fan_out}, {self.activation})'


class AutoEncoder:
    def __init__(self, layers: List[DenseLayer]):
        if len(layers) != TOPOLOGY_LENGTH - 1:
            raise TopologyError(f'auto-encoder needs {TOPOLOGY_LENGTH - 1} layers, got {len(layers)}')
        for prev, nxt in zip(layers, layers[1:]):
            if prev.fan_out != nxt.fan_in:
                raise TopologyError(f'{prev!r} does not feed {nxt!r}')
        self.layers = layers

    @classmethod
    def from_topology(cls, topology: Sequence[int], seed: int, dtype=np.float32) -> 'AutoEncoder':
        """
        Build any mirrored 7 entry topology. Weights are drawn uniformly in
        +/- sqrt(6 / (fan_in + fan_out)) from a generator seeded with seed,
        layer by layer in order; biases start at zero.
        """
        topology = check_shape(topology)
        rng = np.random.default_rng(seed)
        layers = []
        for i, (fan_in, fan_out) in enumerate(zip(topology, topology[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights = rng.uniform(-limit, limit, size=(fan_out, fan_in)).astype(dtype)
            biases = np.zeros(fan_out, dtype=dtype)
            layers.append(DenseLayer(weights, biases, SIGMOID if i == len(topology) - 2 else RELU))
        return cls(layers)

    @property
    def topology(self) -> List[int]:
        return [self.layers[0].fan_in] + [layer.fan_out for layer in self.layers]

    @property
    def dtype(self):
        return self.layers[0].weights.dtype

    @property
    def encoder(self) -> List[DenseLayer]:
        return self.layers[:ENCODER_LAYERS]

    @property
    def decoder(self) -> List[DenseLayer]:
        return self.layers[ENCODER_LAYERS:]

    def parameters(self) -> Dict[str, np.ndarray]:
        """
        Named views of the trainable arrays, W0, b0 ... W5, b5. Updating them in place updates the model.
        """
        ret = {}
        for i, layer in enumerate(self.layers):
            ret[f'W{i}'] = layer.weights
            ret[f'b{i}'] = layer.biases
        return ret

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters().values())

    def copy(self) -> 'AutoEncoder':
        return AutoEncoder([DenseLayer(l.weights.copy(), l.biases.copy(), l.activation) for l in self.layers])

    def astype(self, dtype) -> 'AutoEncoder':
        return AutoEncoder([DenseLayer(l.weights.astype(dtype), l.biases.astype(dtype), l.activation) for l in self.layers])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters().values())

    def _check_input(self, x) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=self.dtype)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.topology[0]:
            raise PreconditionViolation(f'input length must be {self.topology[0]}, got shape {x.shape}')
        return x, single

    def _forward(self, x: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        zs, activations = [], [x]
        for layer in self.layers:
            z = layer.preactivation(activations[-1])
            zs.append(z)
            activations.append(layer.activate(z))
        return zs, activations

    def forward(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """
        x: 1-D vector of length topology[0] or a 2-D batch of them, values in [0,1]

        Returns (latent, output): the bottleneck activation and the sigmoid reconstruction,
        with the same leading shape as x.
        """
        x, single = self._check_input(x)
        _, activations = self._forward(x)
        latent, output = activations[ENCODER_LAYERS], activations[-1]
        if single:
            return latent[0], output[0]
        return latent, output

    def encode(self, x) -> np.ndarray:
        return self.forward(x)[0]

    def reconstruct(self, x) -> np.ndarray:
        return self.forward(x)[1]

    def decode(self, latent) -> np.ndarray:
        a = np.asarray(latent, dtype=self.dtype)
        for layer in self.decoder:
            a = layer.activate(layer.preactivation(a))
        return a

    def loss(self, x, target=None) -> float:
        x, _ = self._check_input(x)
        target = x if target is None else np.asarray(target, dtype=self.dtype).reshape(x.shape)
        return mse(self._forward(x)[1][-1], target)

    def backward(self, zs: List[np.ndarray], activations: List[np.ndarray], target: np.ndarray) -> Dict[str, np.ndarray]:
        # d(mean squared error)/d(output) over every element of the batch
        delta = 2.0 * (activations[-1] - target) / target.size
        grads = {}
        for i in reversed(range(len(self.layers))):
            layer = self.layers[i]
            delta = delta * layer.derivative(zs[i], activations[i + 1])
            grads[f'W{i}'] = delta.T @ activations[i]
            grads[f'b{i}'] = delta.sum(axis=0)
            if i:
                delta = delta @ layer.weights
        return grads

    def gradients(self, x, target=None) -> Tuple[float, Dict[str, np.ndarray]]:
        """
        Loss and analytic gradients of mse(forward(x), target) for every named parameter.
        Auto-encoding when target is None.
        """
        x, _ = self._check_input(x)
        target = x if target is None else np.asarray(target, dtype=self.dtype).reshape(x.shape)
        zs, activations = self._forward(x)
        return mse(activations[-1], target), self.backward(zs, activations, target)

    def __repr__(self) -> str:
        return f'AutoEncoder({self.topology})'


def check_shape(topology: Sequence[int]) -> List[int]:
    topology = [int(t) for t in topology]
    if len(topology) != TOPOLOGY_LENGTH:
        raise TopologyError(f'topology must have {TOPOLOGY_LENGTH} entries, got {len(topology)}')
    if any(t < 1 for t in topology):
        raise TopologyError('layer widths must be positive')
    if topology != topology[::-1]:
        raise TopologyError(f'topology must be mirrored around the bottleneck: {topology}')
    if not topology[0] > topology[1] > topology[2] > topology[3]:
        raise TopologyError(f'encoder widths must strictly decrease: {topology}')
    return topology


def build_autoencoder(topology: Sequence[int], seed: int) -> AutoEncoder:
    """
    Build the cortex auto-encoder: [1568, h1, h2, 100, h2, h1, 1568] with h1 > h2 > 100.
    Identical seeds give bit identical networks.
    """
    topology = [int(t) for t in topology]
    if len(topology) != TOPOLOGY_LENGTH:
        raise TopologyError(f'topology must have {TOPOLOGY_LENGTH} entries, got {len(topology)}')
    if topology[0] != FRAME_SIZE:
        raise TopologyError(f'input width must be {FRAME_SIZE}')
    if topology[-1] != FRAME_SIZE:
        raise TopologyError(f'output width must be {FRAME_SIZE}')
    if topology[3] != LATENT_SIZE:
        raise TopologyError(f'bottleneck width must be {LATENT_SIZE}')
    model = AutoEncoder.from_topology(topology, seed)
    LOG.info('NET: built %r with %d parameters (seed=%d)', model, model.parameter_count(), seed)
    return model


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    test_loss: Optional[float]


@dataclass
class TrainHistory:
    initial_train_loss: Optional[float] = None
    records: List[EpochRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def final(self) -> Optional[EpochRecord]:
        return self.records[-1] if self.records else None


def _stack(frames) -> np.ndarray:
    return np.stack([np.asarray(f) for f in frames]) if len(frames) else np.empty((0, 0))


def train(model: AutoEncoder, train_set, test_set, epochs: int, optimizer_config: Optional[dict] = None, seed: int = 0,
          optimizer: Optional[Optimizer] = None, callback=None,
          corrupt: Optional[Callable[[np.ndarray, np.random.Generator], np.ndarray]] = None) -> TrainHistory:
    """
    Auto-encode train_set for epochs passes of shuffled mini-batches, updating model in place.

    train_set, test_set: sequences of normalized vectors
    optimizer_config: optimizer section of the run config; batch_size defaults to 30
    seed: seeds the per-epoch shuffle
    callback: callable or list of callables invoked with every EpochRecord
    corrupt: maps each input batch to the batch the network sees, the clean batch stays the target

    Losses are the mean squared error over the whole train/test set measured after each epoch.
    A non finite loss or weight aborts with TrainingDiverged naming the epoch.
    """
    optimizer_config = dict(optimizer_config or {})
    if not len(train_set):
        raise PreconditionViolation('train set must not be empty')
    if epochs < 0:
        raise PreconditionViolation('epochs must be >= 0')

    x_train = as_normalized(_stack(train_set)).astype(model.dtype)
    x_test = as_normalized(_stack(test_set)).astype(model.dtype) if len(test_set) else None
    batch_size = int(optimizer_config.get('batch_size', 30))
    optimizer = optimizer if optimizer is not None else make_optimizer(optimizer_config)
    rng = np.random.default_rng(seed)
    corrupt_rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1]))
    callbacks = as_callbacks(callback, EpochCallback)
    params = model.parameters()

    history = TrainHistory(initial_train_loss=model.loss(x_train))
    LOG.info('TRAIN: %d samples, %d epochs, batch size %d, initial loss %.6f', len(x_train), epochs, batch_size, history.initial_train_loss)

    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(x_train))
        for start in range(0, len(order), batch_size):
            batch = x_train[order[start:start + batch_size]]
            inputs = corrupt(batch, corrupt_rng) if corrupt is not None else batch
            _, grads = model.gradients(inputs, batch)
            optimizer.step(params, grads)

        train_loss = model.loss(x_train)
        test_loss = model.loss(x_test) if x_test is not None else None
        if not np.isfinite(train_loss) or (test_loss is not None and not np.isfinite(test_loss)):
            LOG.error('TRAIN: loss became NaN at epoch %d', epoch)
            raise TrainingDiverged(epoch)
        if not model.is_finite():
            LOG.error('TRAIN: non finite weights at epoch %d', epoch)
            raise TrainingDiverged(epoch, 'weights are not finite')

        record = EpochRecord(epoch, train_loss, test_loss)
        history.records.append(record)
        LOG.info('TRAIN: epoch %d train loss %.6f test loss %s', epoch, train_loss, 'n/a' if test_loss is None else f'{test_loss:.6f}')
        for cb in callbacks:
            cb(record)
    return history


def numerical_gradient(model: AutoEncoder, x, name: str, epsilon: float = 1e-5) -> np.ndarray:
    """
    Central finite difference of the auto-encoding loss with respect to one named parameter.
    The parameter is perturbed in place and restored element by element.
    """
    param = model.parameters()[name]
    grad = np.zeros(param.shape, dtype=np.float64)
    for idx in np.ndindex(param.shape):
        orig = param[idx]
        param[idx] = orig + epsilon
        plus = model.loss(x)
        param[idx] = orig - epsilon
        minus = model.loss(x)
        param[idx] = orig
        grad[idx] = (plus - minus) / (2 * epsilon)
    return grad


def gradient_check(model: AutoEncoder, x, epsilon: float = 1e-5, floor: float = 1e-7) -> float:
    """
    Compare analytic gradients with central finite differences over all parameters
    and return the maximum relative error |a - n| / max(|a| + |n|, floor).
    Runs on a float64 copy; intended for reduced topologies.
    """
    if not 1e-6 <= epsilon <= 1e-3:
        raise PreconditionViolation(f'epsilon must be in [1e-6, 1e-3], got {epsilon}')
    model = model.astype(np.float64)
    x = np.asarray(x, dtype=np.float64)
    _, analytic = model.gradients(x)
    worst = 0.0
    for name in model.parameters():
        numeric = numerical_gradient(model, x, name, epsilon)
        err = np.abs(analytic[name] - numeric) / np.maximum(np.abs(analytic[name]) + np.abs(numeric), floor)
        worst = max(worst, float(np.max(err)))
    LOG.debug('NET: gradient check max relative error %.3e', worst)
    return worst


def _payload_size(topology: Sequence[int]) -> int:
    return 4 * sum(fan_out * fan_in + fan_out for fan_in, fan_out in zip(topology, topology[1:]))


def save_weights(model: AutoEncoder, path: str):
    """
    Write the CTNN1 weight file: magic line, ASCII topology line, then per layer the
    row-major weights and the biases as little-endian float32.
    """
    with open(path, 'wb') as fp:
        fp.write(WEIGHT_MAGIC)
        fp.write((' '.join(str(t) for t in model.topology) + '\n').encode('ascii'))
        for layer in model.layers:
            fp.write(np.ascontiguousarray(layer.weights, dtype='<f4').tobytes())
            fp.write(np.ascontiguousarray(layer.biases, dtype='<f4').tobytes())
    LOG.info('NET: saved weights for %r to %s', model, path)


def load_weights(path: str, topology: Optional[Sequence[int]] = None) -> AutoEncoder:
    """
    Read a CTNN1 weight file. If topology is given, the file must describe exactly that topology.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f'weight file {path!r} does not exist')
    with open(path, 'rb') as fp:
        data = fp.read()

    if not data.startswith(WEIGHT_MAGIC):
        raise WeightFormatError(f'{path}: bad magic, not a CTNN1 weight file')
    end = data.find(b'\n', len(WEIGHT_MAGIC))
    if end < 0:
        raise WeightFormatError(f'{path}: missing topology line')
    try:
        found = [int(t) for t in data[len(WEIGHT_MAGIC):end].decode('ascii').split()]
        found = check_shape(found)
    except (UnicodeDecodeError, ValueError) as e:
        raise WeightFormatError(f'{path}: invalid topology line ({e})')
    if topology is not None and list(topology) != found:
        raise TopologyMismatch(f'{path}: topology {found} does not match expected {list(topology)}')

    payload = data[end + 1:]
    expected = _payload_size(found)
    if len(payload) < expected:
        raise WeightTruncatedError(expected, len(payload))
    if len(payload) > expected:
        raise WeightFormatError(f'{path}: {len(payload) - expected} trailing bytes after parameters')

    values = np.frombuffer(payload, dtype='<f4').astype(np.float32)
    layers, offset = [], 0
    for i, (fan_in, fan_out) in enumerate(zip(found, found[1:])):
        weights = values[offset:offset + fan_in * fan_out].reshape(fan_out, fan_in).copy()
        offset += fan_in * fan_out
        biases = values[offset:offset + fan_out].copy()
        offset += fan_out
        layers.append(DenseLayer(weights, biases, SIGMOID if i == len(found) - 2 else RELU))
    return AutoEncoder(layers)
