'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


The thalamic pipeline: the reconstruction engine turns the decoder output back
into a 2D multi-modal frame, the difference engine scores the incoming frame
against it, and the gate only lets the frame through to the cortex when the
score reaches the threshold.
'''
from dataclasses import dataclass, field
import logging
from typing import List, Optional

import numpy as np

from ctnn.callback import StepCallback, as_callbacks
from ctnn.defines import FRAME_SIZE, MAX_INTENSITY
from ctnn.exceptions import PreconditionViolation
from ctnn.frames import Reconstruction, SensoryFrame, normalize


LOG = logging.getLogger('ctnn')


def reconstruction_engine(decoder_output, label: Optional[int] = None, scale: float = MAX_INTENSITY) -> Reconstruction:
    """
    1568 decoder outputs in [0,1] -> visual + audio 28x28 grids on the [0,255] scale.
    The reshape is the exact inverse of SensoryFrame.flatten; values are clamped after scaling.
    """
    values = np.asarray(decoder_output, dtype=np.float64)
    if values.shape != (FRAME_SIZE,):
        raise PreconditionViolation(f'decoder output must have length {FRAME_SIZE}, got {values.shape}')
    return Reconstruction.from_flat(np.clip(values * scale, 0.0, MAX_INTENSITY), label=label)


def _flat(frame) -> np.ndarray:
    if isinstance(frame, SensoryFrame):
        return frame.flatten()
    return np.asarray(frame, dtype=np.float64).ravel()


def difference_score(incoming, recon) -> float:
    """
    D = mean over every pixel of (y - y~)^2 on the [0,255] scale, so 0 <= D <= 65025.
    Accepts frames or plain arrays of equal shape.
    """
    y, y_tilde = _flat(incoming), _flat(recon)
    if y.shape != y_tilde.shape:
        raise PreconditionViolation(f'shape mismatch {y.shape} vs {y_tilde.shape}')
    d = y - y_tilde
    return float(np.mean(d * d))


def difference_image(incoming: SensoryFrame, recon: SensoryFrame) -> SensoryFrame:
    """
    Per pixel |y - y~| clamped to [0,255], the visual form of the difference row of a trace dump.
    """
    return SensoryFrame(np.clip(np.abs(incoming.visual - recon.visual), 0, MAX_INTENSITY),
                        np.clip(np.abs(incoming.audio - recon.audio), 0, MAX_INTENSITY), incoming.label)


def gate(incoming: SensoryFrame, difference: float, threshold: float) -> SensoryFrame:
    """
    O = y if D >= TH else the all-zero frame. Never a blend of the two.
    """
    if difference < 0 or threshold < 0:
        raise PreconditionViolation('difference and threshold must be non-negative')
    if difference >= threshold:
        return incoming
    return SensoryFrame.zeros()


@dataclass
class StepRecord:
    frame_index: int
    label: Optional[int]
    difference: float
    fired: bool
    output: SensoryFrame
    incoming: SensoryFrame
    reconstruction_before: Reconstruction
    reconstruction_after: Reconstruction
    network_calls: int

    def difference_image(self) -> SensoryFrame:
        return difference_image(self.incoming, self.reconstruction_before)


class CtnnState:
    def __init__(self, model, threshold: float, last_reconstruction: Optional[Reconstruction] = None):
        """
        model: object with forward(vector) -> (latent, output), the cortex auto-encoder
        threshold: TH, in squared intensity units on the 0-255 scale
        last_reconstruction: the cortex's current expectation, all-zero before the first frame
        """
        if threshold < 0:
            raise PreconditionViolation('threshold must be >= 0')
        self.model = model
        self.threshold = float(threshold)
        self.last_reconstruction = last_reconstruction if last_reconstruction is not None else Reconstruction.zeros()
        self.network_calls = 0
        self.frame_index = 0

    def step(self, incoming: SensoryFrame) -> StepRecord:
        before = self.last_reconstruction
        difference = difference_score(incoming, before)
        output = gate(incoming, difference, self.threshold)
        fired = difference >= self.threshold
        if fired:
            _, decoded = self.model.forward(normalize(output))
            self.last_reconstruction = reconstruction_engine(decoded, label=incoming.label)
            self.network_calls += 1
            LOG.debug('THAL: frame %d fired (D=%.3f, TH=%.3f), %d calls so far', self.frame_index, difference, self.threshold, self.network_calls)

        record = StepRecord(self.frame_index, incoming.label, difference, fired, output, incoming, before,
                            self.last_reconstruction, self.network_calls)
        self.frame_index += 1
        return record


def ctnn_step(state: CtnnState, incoming: SensoryFrame) -> StepRecord:
    return state.step(incoming)


@dataclass
class Trace:
    threshold: float
    records: List[StepRecord] = field(default_factory=list)

    @property
    def network_calls(self) -> int:
        return sum(1 for r in self.records if r.fired)

    @property
    def length(self) -> int:
        return len(self.records)

    @property
    def efficiency(self) -> float:
        """
        Share of frames that never reached the cortex.
        """
        return 1.0 - self.network_calls / self.length if self.records else 0.0

    def fired(self) -> List[bool]:
        return [r.fired for r in self.records]

    def differences(self) -> List[float]:
        return [r.difference for r in self.records]


def run_sequence(model, threshold: float, frames, callbacks=None) -> Trace:
    """
    Fold ctnn_step over frames from a fresh state. callbacks (a callable or a list of them)
    are invoked with every StepRecord in order.
    """
    if not len(frames):
        raise PreconditionViolation('frames must not be empty')
    callbacks = as_callbacks(callbacks, StepCallback)
    state = CtnnState(model, threshold)
    trace = Trace(threshold)
    for frame in frames:
        record = state.step(frame)
        trace.records.append(record)
        for cb in callbacks:
            cb(record)
    LOG.info('THAL: %d of %d frames reached the cortex at TH=%g', trace.network_calls, trace.length, threshold)
    return trace
