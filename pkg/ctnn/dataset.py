'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


Deterministic generation of the multi-modal digit dataset: typeset glyphs on the
visual side, one frequency band per digit on the audio side, augmented variants,
sequences with a controlled share of same-class neighbours, and occlusion masks.
Every function here is a pure function of its arguments and seeds.
'''
from dataclasses import dataclass
import logging
import math
import os
from typing import List, Optional, Tuple

import numpy as np

from ctnn.backends.pgm import read_pgm, write_pgm
from ctnn.backends.table import read_csv, write_csv
from ctnn.defines import FRAME_SIZE, GRID_SIZE, MANIFEST_CSV, MAX_INTENSITY, NUM_CLASSES, SEQUENCE_CSV
from ctnn.exceptions import DatasetError, PreconditionViolation
from ctnn.frames import SensoryFrame
from ctnn.glyphs import ATLAS, GlyphAtlas


LOG = logging.getLogger('ctnn')

VISUAL_STREAM = 0
AUDIO_STREAM = 1
# test set variants start here so they never share a seed with training variants
TEST_VARIANT_OFFSET = 50
MAX_VARIANTS = 100


@dataclass(frozen=True)
class Augmentation:
    """
    noise_sigma: std of the additive Gaussian pixel noise, intensity units
    translation: glyph shifts are drawn from {-translation..+translation} on both axes
    tone_jitter: tone amplitude is scaled by a factor drawn from [1 - jitter, 1 + jitter]
    """
    noise_sigma: float = 3.0
    translation: int = 0
    tone_jitter: float = 0.03

    @classmethod
    def from_config(cls, dataset) -> 'Augmentation':
        return cls(noise_sigma=float(dataset.get('noise_sigma', cls.noise_sigma)),
                   translation=int(dataset.get('translation', cls.translation)),
                   tone_jitter=float(dataset.get('tone_jitter', cls.tone_jitter)))


DEFAULT_AUGMENTATION = Augmentation()


@dataclass(frozen=True)
class ToneSpec:
    digit: int
    band_row: int
    band_sigma: float = 1.0

    @classmethod
    def for_digit(cls, digit: int) -> 'ToneSpec':
        _check_digit(digit)
        return cls(digit, 25 - 2 * digit, 1.0)

    def profile(self) -> np.ndarray:
        """
        Noise free band intensity per row, 255 at band_row.
        """
        rows = np.arange(GRID_SIZE, dtype=np.float64)
        return MAX_INTENSITY * np.exp(-(rows - self.band_row) ** 2 / (2 * self.band_sigma ** 2))


@dataclass(frozen=True)
class SequenceSpec:
    length: int
    similar_fraction: float
    seed: int

    def __post_init__(self):
        if self.length < 2:
            raise PreconditionViolation(f'sequence length must be >= 2, got {self.length}')
        if not 0.0 <= self.similar_fraction <= 1.0:
            raise PreconditionViolation(f'similar fraction must be in [0,1], got {self.similar_fraction}')

    @property
    def same_class_transitions(self) -> int:
        return int(round(self.similar_fraction * (self.length - 1)))


@dataclass(frozen=True)
class OcclusionSpec:
    visual_fraction: float = 0.0
    audio_fraction: float = 0.0

    def __post_init__(self):
        for f in (self.visual_fraction, self.audio_fraction):
            if not 0.0 <= f <= 1.0:
                raise PreconditionViolation(f'occlusion fractions must be in [0,1], got {f}')

    @staticmethod
    def rows(fraction: float) -> int:
        return int(math.floor(fraction * GRID_SIZE))

    @property
    def visual_rows(self) -> int:
        return self.rows(self.visual_fraction)

    @property
    def audio_rows(self) -> int:
        return self.rows(self.audio_fraction)

    def occluded_pixels(self) -> Tuple[int, int]:
        return self.visual_rows * GRID_SIZE, self.audio_rows * GRID_SIZE


def _check_digit(digit):
    if not isinstance(digit, (int, np.integer)) or not 0 <= digit < NUM_CLASSES:
        raise PreconditionViolation(f'digit must be an integer in 0-9, got {digit!r}')


def _rng(digit: int, seed: int, stream: int) -> np.random.Generator:
    if seed < 0:
        raise PreconditionViolation(f'seed must be >= 0, got {seed}')
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(digit), stream]))


def _shift(grid: np.ndarray, dy: int, dx: int) -> np.ndarray:
    out = np.zeros_like(grid)
    h, w = grid.shape
    src_y = slice(max(0, -dy), min(h, h - dy))
    dst_y = slice(max(0, dy), min(h, h + dy))
    src_x = slice(max(0, -dx), min(w, w - dx))
    dst_x = slice(max(0, dx), min(w, w + dx))
    out[dst_y, dst_x] = grid[src_y, src_x]
    return out


def _finish(grid: np.ndarray, rng: np.random.Generator, sigma: float) -> np.ndarray:
    if sigma > 0:
        grid = grid + rng.normal(0.0, sigma, size=grid.shape)
    return np.rint(np.clip(grid, 0.0, MAX_INTENSITY))


def render_digit(digit: int, seed: int, augmentation: Augmentation = DEFAULT_AUGMENTATION, atlas: GlyphAtlas = ATLAS) -> np.ndarray:
    """
    Glyph at full intensity, shifted by an integer translation and covered with clamped
    Gaussian noise. Intensities are rounded so the grid survives 8-bit export unchanged.
    """
    _check_digit(digit)
    rng = _rng(digit, seed, VISUAL_STREAM)
    t = augmentation.translation
    dy, dx = rng.integers(-t, t + 1, size=2)
    grid = _shift(atlas.glyph(digit).astype(np.float64) * MAX_INTENSITY, int(dy), int(dx))
    return _finish(grid, rng, augmentation.noise_sigma)


def render_tone(digit: int, seed: int, augmentation: Augmentation = DEFAULT_AUGMENTATION) -> np.ndarray:
    """
    Horizontal frequency band centered at row 25 - 2 * digit, constant across columns,
    with amplitude jitter and clamped Gaussian noise.
    """
    spec = ToneSpec.for_digit(digit)
    rng = _rng(digit, seed, AUDIO_STREAM)
    j = augmentation.tone_jitter
    amplitude = 1.0 + rng.uniform(-j, j) if j > 0 else 1.0
    grid = np.repeat((spec.profile() * amplitude)[:, None], GRID_SIZE, axis=1)
    return _finish(grid, rng, augmentation.noise_sigma)


def make_frame(digit: int, seed: int, augmentation: Augmentation = DEFAULT_AUGMENTATION, atlas: GlyphAtlas = ATLAS) -> SensoryFrame:
    return SensoryFrame(render_digit(digit, seed, augmentation, atlas), render_tone(digit, seed, augmentation), label=digit)


def frame_seed(seed: int, digit: int, variant: int) -> int:
    return seed * 1000 + digit * 100 + variant


def _entries(per_class: int, seed: int, offset: int = 0) -> List[Tuple[int, int, int]]:
    if per_class < 1:
        raise PreconditionViolation(f'per_class must be >= 1, got {per_class}')
    if offset + per_class > MAX_VARIANTS:
        raise PreconditionViolation(f'at most {MAX_VARIANTS - offset} variants per class')
    return [(digit, variant, frame_seed(seed, digit, variant)) for digit in range(NUM_CLASSES) for variant in range(offset, offset + per_class)]


def _training_entries(per_class: int, seed: int) -> List[Tuple[int, int, int]]:
    # variants from TEST_VARIANT_OFFSET on belong to the held out set
    if per_class > TEST_VARIANT_OFFSET:
        raise PreconditionViolation(f'at most {TEST_VARIANT_OFFSET} training frames per class, got {per_class}')
    return _entries(per_class, seed)


def make_training_set(per_class: int, seed: int, augmentation: Augmentation = DEFAULT_AUGMENTATION) -> List[SensoryFrame]:
    """
    per_class frames for every digit, digit-major, frame seeds seed * 1000 + digit * 100 + variant.
    """
    return [make_frame(digit, s, augmentation) for digit, _, s in _training_entries(per_class, seed)]


def make_test_set(per_class: int, seed: int, augmentation: Augmentation = DEFAULT_AUGMENTATION) -> List[SensoryFrame]:
    """
    Held out frames: same layout as the training set, variants numbered from TEST_VARIANT_OFFSET.
    """
    if per_class > MAX_VARIANTS - TEST_VARIANT_OFFSET:
        raise PreconditionViolation(f'at most {MAX_VARIANTS - TEST_VARIANT_OFFSET} test frames per class')
    return [make_frame(digit, s, augmentation) for digit, _, s in _entries(per_class, seed, TEST_VARIANT_OFFSET)]


def sequence_plan(spec: SequenceSpec) -> List[Tuple[int, int]]:
    """
    (digit, frame seed) for every position. Exactly spec.same_class_transitions adjacent pairs keep
    their class; the positions of those repeats and every class change are drawn from the seeded RNG.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed), 0x5E9]))
    transitions = spec.length - 1
    repeats = set(rng.choice(transitions, size=spec.same_class_transitions, replace=False).tolist())
    digits = [int(rng.integers(NUM_CLASSES))]
    for t in range(transitions):
        if t in repeats:
            digits.append(digits[-1])
        else:
            nxt = int(rng.integers(NUM_CLASSES - 1))
            digits.append(nxt if nxt < digits[-1] else nxt + 1)
    seeds = rng.integers(0, 2 ** 31 - 1, size=spec.length).tolist()
    for i in range(1, spec.length):
        # same-class neighbours need different augmentation seeds
        while digits[i] == digits[i - 1] and seeds[i] == seeds[i - 1]:
            seeds[i] = (seeds[i] + 1) % (2 ** 31 - 1)
    return list(zip(digits, (int(s) for s in seeds)))


def _realize(spec: SequenceSpec, augmentation: Augmentation) -> List[Tuple[int, int, SensoryFrame]]:
    ret = []
    for digit, seed in sequence_plan(spec):
        frame = make_frame(digit, seed, augmentation)
        attempts = 0
        while ret and frame == ret[-1][2]:
            # only reachable with little or no augmentation
            attempts += 1
            if attempts > 100:
                raise PreconditionViolation('augmentation too weak to render distinct same-class neighbours')
            seed += 1
            frame = make_frame(digit, seed, augmentation)
        ret.append((digit, seed, frame))
    return ret


def make_sequence(spec: SequenceSpec, augmentation: Augmentation = DEFAULT_AUGMENTATION) -> List[SensoryFrame]:
    """
    Render the sequence plan. No two adjacent frames are identical.
    """
    return [frame for _, _, frame in _realize(spec, augmentation)]


def count_same_class_transitions(frames) -> int:
    return sum(1 for a, b in zip(frames, frames[1:]) if a.label == b.label)


def occlude(frame: SensoryFrame, spec: OcclusionSpec) -> SensoryFrame:
    """
    Zero the bottom floor(fraction * 28) rows of each modality independently. Every other pixel and the label are kept.
    """
    visual = frame.visual.copy()
    audio = frame.audio.copy()
    if spec.visual_rows:
        visual[GRID_SIZE - spec.visual_rows:, :] = 0.0
    if spec.audio_rows:
        audio[GRID_SIZE - spec.audio_rows:, :] = 0.0
    return type(frame)(visual, audio, frame.label)


@dataclass(frozen=True)
class TrainingOcclusion:
    """
    Occlusion applied to training inputs only, the targets stay clean so the cortex
    learns to fill in missing rows from the other modality and the rest of the glyph.

    probability: chance that a sample in a batch is occluded at all
    max_fraction: visual and audio row counts are drawn independently from 0..floor(max_fraction * 28)
    """
    probability: float = 0.3
    max_fraction: float = 0.6

    def __post_init__(self):
        for name in ('probability', 'max_fraction'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise PreconditionViolation(f'training occlusion {name} must be in [0,1], got {value}')

    @classmethod
    def from_config(cls, training) -> Optional['TrainingOcclusion']:
        section = training.get('occlusion')
        if not section:
            return None
        ret = cls(probability=float(section.get('probability', cls.probability)),
                  max_fraction=float(section.get('max_fraction', cls.max_fraction)))
        return ret if ret.probability > 0 else None

    def __call__(self, batch: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """
        Copy of a (n, 1568) normalized batch with the bottom rows of each modality zeroed per sample.
        """
        if batch.ndim != 2 or batch.shape[1] != FRAME_SIZE:
            raise PreconditionViolation(f'training occlusion needs (n, {FRAME_SIZE}) batches, got {batch.shape}')
        n = len(batch)
        limit = OcclusionSpec.rows(self.max_fraction)
        hit = rng.random(n) < self.probability
        counts = rng.integers(0, limit + 1, size=(2, n)) * hit
        out = np.array(batch, copy=True)
        grids = out.reshape(n, 2, GRID_SIZE, GRID_SIZE)
        rows = np.arange(GRID_SIZE)
        for modality in range(2):
            mask = rows[None, :] >= GRID_SIZE - counts[modality][:, None]
            grids[:, modality][mask] = 0.0
        return out


def export_dataset(directory: str, per_class: int, seed: int, augmentation: Augmentation = DEFAULT_AUGMENTATION) -> int:
    """
    Write one d<digit>_v<variant>.pgm (28x56 combined frame) per training frame plus manifest.csv.
    Returns the number of frames written.
    """
    os.makedirs(directory, exist_ok=True)
    rows = []
    for digit, variant, s in _training_entries(per_class, seed):
        frame = make_frame(digit, s, augmentation)
        filename = f'd{digit}_v{variant}.pgm'
        write_pgm(os.path.join(directory, filename), frame.image())
        rows.append((filename, digit, variant, s))
    write_csv(os.path.join(directory, MANIFEST_CSV), ('filename', 'digit', 'variant', 'seed'), rows)
    LOG.info('DATA: wrote %d frames to %s', len(rows), directory)
    return len(rows)


def load_dataset(directory: str) -> List[SensoryFrame]:
    """
    Read a directory written by export_dataset, in manifest order.
    """
    manifest = os.path.join(directory, MANIFEST_CSV)
    if not os.path.exists(manifest):
        raise DatasetError(f'no {MANIFEST_CSV} in {directory!r}')
    frames = []
    for row in read_csv(manifest):
        path = os.path.join(directory, row['filename'])
        if not os.path.exists(path):
            raise DatasetError(f'{path!r} listed in manifest but missing')
        frames.append(SensoryFrame.from_image(read_pgm(path), label=int(row['digit'])))
    LOG.info('DATA: loaded %d frames from %s', len(frames), directory)
    return frames


def export_sequence(spec: SequenceSpec, directory: str, augmentation: Augmentation = DEFAULT_AUGMENTATION, images: bool = False) -> str:
    """
    Ordered sequence manifest (index, digit, seed[, filename]); PGM frames too when images is set.
    """
    os.makedirs(directory, exist_ok=True)
    rows = []
    for i, (digit, seed, frame) in enumerate(_realize(spec, augmentation)):
        filename = ''
        if images:
            filename = f's{i:04d}_d{digit}.pgm'
            write_pgm(os.path.join(directory, filename), frame.image())
        rows.append((i, digit, seed, filename))
    path = os.path.join(directory, SEQUENCE_CSV)
    write_csv(path, ('index', 'digit', 'seed', 'filename'), rows)
    return path
