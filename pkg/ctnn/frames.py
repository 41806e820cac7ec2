'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
from typing import Optional

import numpy as np

from ctnn.defines import AUDIO, FRAME_SHAPE, FRAME_SIZE, GRID_SIZE, MAX_INTENSITY, MODALITY_SIZE, VISUAL
from ctnn.exceptions import PreconditionViolation


class SensoryFrame:
    """
    A multi-modal input: visual 28x28 grid and audio 28x28 grid, intensities in [0,255].
    Flattening puts the visual grid (row-major) first, then the audio grid.
    """
    __slots__ = ('visual', 'audio', 'label')

    def __init__(self, visual, audio, label: Optional[int] = None):
        visual = np.array(visual, dtype=np.float64)
        audio = np.array(audio, dtype=np.float64)
        for name, grid in ((VISUAL, visual), (AUDIO, audio)):
            if grid.shape != (GRID_SIZE, GRID_SIZE):
                raise PreconditionViolation(f'{name} grid must be {GRID_SIZE}x{GRID_SIZE}, got {grid.shape}')
            if not np.all(np.isfinite(grid)) or grid.min() < 0 or grid.max() > MAX_INTENSITY:
                raise PreconditionViolation(f'{name} intensities must lie in [0,{MAX_INTENSITY:g}]')
        self.visual = visual
        self.audio = audio
        self.label = label

    @classmethod
    def zeros(cls, label: Optional[int] = None):
        return cls(np.zeros((GRID_SIZE, GRID_SIZE)), np.zeros((GRID_SIZE, GRID_SIZE)), label)

    @classmethod
    def from_flat(cls, values, label: Optional[int] = None):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (FRAME_SIZE,):
            raise PreconditionViolation(f'flat frame must have length {FRAME_SIZE}, got {values.shape}')
        return cls(values[:MODALITY_SIZE].reshape(GRID_SIZE, GRID_SIZE), values[MODALITY_SIZE:].reshape(GRID_SIZE, GRID_SIZE), label)

    @classmethod
    def from_image(cls, image, label: Optional[int] = None):
        """
        image: 28x56 array, visual grid in the left half and audio grid in the right half
        """
        image = np.asarray(image, dtype=np.float64)
        if image.shape != FRAME_SHAPE:
            raise PreconditionViolation(f'frame image must be {FRAME_SHAPE}, got {image.shape}')
        return cls(image[:, :GRID_SIZE], image[:, GRID_SIZE:], label)

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.visual.ravel(), self.audio.ravel()])

    def image(self) -> np.ndarray:
        return np.hstack([self.visual, self.audio])

    def modality(self, name: str) -> np.ndarray:
        if name == VISUAL:
            return self.visual
        if name == AUDIO:
            return self.audio
        raise PreconditionViolation(f'unknown modality {name!r}')

    def normalized(self) -> np.ndarray:
        return self.flatten() / MAX_INTENSITY

    def is_zero(self) -> bool:
        return not self.visual.any() and not self.audio.any()

    def tobytes(self) -> bytes:
        return self.flatten().tobytes()

    def __eq__(self, other):
        if not isinstance(other, SensoryFrame):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.visual, other.visual) and np.array_equal(self.audio, other.audio)

    def __repr__(self) -> str:
        return f'{type(self).__name__}(label={self.label})'


class Reconstruction(SensoryFrame):
    """
    The cortex's expectation, rebuilt from a decoder output. Same layout as SensoryFrame.
    """
    __slots__ = ()


def normalize(frame: SensoryFrame) -> np.ndarray:
    """
    [0,255] frame -> [0,1] network input vector
    """
    return frame.normalized()


def stack_normalized(frames) -> np.ndarray:
    return np.stack([f.normalized() for f in frames])
