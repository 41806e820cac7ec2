'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


Experiment harness: training curves, the efficiency sweep over thresholds and
sequence similarity, and occlusion robustness (heatmap and single frame demos).
Every result is a pure function of the seeds, the config and the weight file.
'''
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import os
from typing import Dict, List, Optional, Sequence

import numpy as np

from ctnn.backends.pgm import write_pgm
from ctnn.backends.table import write_csv
from ctnn.config import Config
from ctnn.dataset import (TEST_VARIANT_OFFSET, Augmentation, OcclusionSpec, SequenceSpec, TrainingOcclusion, frame_seed,
                          make_frame, make_sequence, make_test_set, make_training_set, occlude)
from ctnn.defines import (AUDIO, DISSIMILAR_FLOOR, EFFICIENCY_CSV, LOSSES_CSV, MODALITIES, NUM_CLASSES, OCCLUSION_CSV,
                          SIMILAR_CEILING, VISUAL, WEIGHTS_FILE)
from ctnn.exceptions import PreconditionViolation, ReconstructionMismatch
from ctnn.frames import Reconstruction, SensoryFrame, stack_normalized
from ctnn.network import AutoEncoder, TrainHistory, build_autoencoder, save_weights, train
from ctnn.thalamus import difference_score, reconstruction_engine, run_sequence
from ctnn.util.perf import timed


LOG = logging.getLogger('ctnn')


def cell_seed(master: int, *coords: int) -> int:
    """
    Seed for one sweep cell, a function of the master seed and the cell coordinates only,
    so results do not depend on the order cells are scheduled in.
    """
    return int(np.random.SeedSequence([int(master)] + [int(c) for c in coords]).generate_state(1)[0])


def _map(fn, items, workers: int = 1) -> list:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def reconstruct_frames(model: AutoEncoder, frames: Sequence[SensoryFrame]) -> List[Reconstruction]:
    _, outputs = model.forward(stack_normalized(frames))
    return [reconstruction_engine(out, label=f.label) for out, f in zip(outputs, frames)]


def _as_matrix(frames) -> np.ndarray:
    return np.stack([f.flatten() for f in frames])


# Training


@dataclass
class TrainingResult:
    model: AutoEncoder
    history: TrainHistory
    weights: str
    losses: str


def write_losses(path: str, history: TrainHistory):
    write_csv(path, ('epoch', 'train_loss', 'test_loss'), ((r.epoch, r.train_loss, r.test_loss) for r in history))


def datasets(config: Config):
    augmentation = Augmentation.from_config(config.dataset)
    train_set = make_training_set(config.dataset.per_class, config.seed, augmentation)
    test_set = make_test_set(config.dataset.test_per_class, config.seed, augmentation)
    return train_set, test_set


def run_training_experiment(config: Config, out: str, train_set: Optional[Sequence[SensoryFrame]] = None,
                            test_set: Optional[Sequence[SensoryFrame]] = None) -> TrainingResult:
    """
    Train the cortex auto-encoder on the configured dataset (300 frames and 100 held out
    frames by default) and write losses.csv and the weight file under out. Unless
    training.occlusion is switched off, part of every batch is fed with occluded rows
    against clean targets.
    """
    config = Config(config)
    if train_set is None or test_set is None:
        generated_train, generated_test = datasets(config)
        train_set = generated_train if train_set is None else train_set
        test_set = generated_test if test_set is None else test_set

    os.makedirs(out, exist_ok=True)
    model = build_autoencoder(config.model.topology, config.seed)
    with timed('EXP', 'training'):
        history = train(model, stack_normalized(train_set), stack_normalized(test_set) if len(test_set) else [],
                        int(config.training.epochs), config.optimizer.to_dict(), config.seed,
                        corrupt=TrainingOcclusion.from_config(config.training))

    losses = os.path.join(out, LOSSES_CSV)
    write_losses(losses, history)
    weights = os.path.join(out, WEIGHTS_FILE)
    save_weights(model, weights)
    final = history.final()
    if final:
        LOG.info('EXP: training finished, train loss %.6f test loss %s', final.train_loss, final.test_loss)
    return TrainingResult(model, history, weights, losses)


# Efficiency


@dataclass(frozen=True)
class EfficiencyRow:
    threshold: float
    similar_fraction: float
    length: int
    network_calls: int


@dataclass
class EfficiencySweepResult:
    rows: List[EfficiencyRow] = field(default_factory=list)

    def calls(self, threshold: float, similar_fraction: float) -> int:
        for row in self.rows:
            if row.threshold == threshold and row.similar_fraction == similar_fraction:
                return row.network_calls
        raise KeyError((threshold, similar_fraction))

    @property
    def thresholds(self) -> List[float]:
        return sorted({r.threshold for r in self.rows})

    @property
    def similar_fractions(self) -> List[float]:
        return sorted({r.similar_fraction for r in self.rows})

    def monotone_in_threshold(self) -> bool:
        for s in self.similar_fractions:
            calls = [self.calls(th, s) for th in self.thresholds]
            if any(a < b for a, b in zip(calls, calls[1:])):
                return False
        return True

    def monotone_in_similarity(self, threshold: float) -> bool:
        calls = [self.calls(threshold, s) for s in self.similar_fractions]
        return all(a >= b for a, b in zip(calls, calls[1:]))

    def to_csv(self, path: str):
        write_csv(path, ('threshold', 'similar_fraction', 'length', 'network_calls'),
                  ((float(r.threshold), float(r.similar_fraction), r.length, r.network_calls) for r in self.rows))


def efficiency_slope(result: EfficiencySweepResult, threshold: float) -> float:
    """
    Least squares slope of network calls against the similar fraction at one threshold.
    """
    s = np.array(result.similar_fractions, dtype=np.float64)
    calls = np.array([result.calls(threshold, x) for x in s], dtype=np.float64)
    return float(np.polyfit(s, calls, 1)[0])


def run_efficiency_sweep(thresholds: Sequence[float], similar_fractions: Sequence[float], length: int, seed: int,
                         model, augmentation: Augmentation = Augmentation(), workers: int = 1) -> EfficiencySweepResult:
    """
    For every (TH, s) pair run a fresh thalamus over a generated sequence and record the
    network calls. The sequence depends on (seed, index of s) only, so every threshold sees
    the same frames for a given s.
    """
    sequences = {}
    for j, s in enumerate(similar_fractions):
        sequences[j] = make_sequence(SequenceSpec(length, float(s), cell_seed(seed, j)), augmentation)

    cells = [(th, j, s) for th in thresholds for j, s in enumerate(similar_fractions)]

    def _cell(cell):
        th, j, s = cell
        trace = run_sequence(model, th, sequences[j])
        return EfficiencyRow(float(th), float(s), length, trace.network_calls)

    with timed('EXP', 'efficiency sweep'):
        rows = _map(_cell, cells, workers)
    return EfficiencySweepResult(rows)


# Threshold regime


@dataclass
class RegimeReport:
    same_class: List[float] = field(default_factory=list)
    class_change: List[float] = field(default_factory=list)

    @property
    def same_class_below(self) -> float:
        """
        Share of same-class consecutive pairs scoring below the similar ceiling (20)
        """
        if not self.same_class:
            return 1.0
        return float(np.mean(np.array(self.same_class) < SIMILAR_CEILING))

    @property
    def class_change_above(self) -> float:
        """
        Share of class-change pairs scoring above the dissimilar floor (100)
        """
        if not self.class_change:
            return 1.0
        return float(np.mean(np.array(self.class_change) > DISSIMILAR_FLOOR))


def threshold_regime(model, frames: Sequence[SensoryFrame]) -> RegimeReport:
    """
    Score every frame against the reconstruction of its predecessor, split by whether the
    pair keeps the digit class.
    """
    recons = reconstruct_frames(model, frames)
    report = RegimeReport()
    for prev, frame in zip(recons, frames[1:]):
        d = difference_score(frame, prev)
        if frame.label == prev.label:
            report.same_class.append(d)
        else:
            report.class_change.append(d)
    return report


# Occlusion


@dataclass(frozen=True)
class AccuracyBaseline:
    value: float
    pairs: int


def accuracy_baseline(model, test_set: Sequence[SensoryFrame]) -> AccuracyBaseline:
    """
    Mean difference score between reconstructions of clean frames of different classes.
    """
    r = _as_matrix(reconstruct_frames(model, test_set))
    labels = np.array([f.label for f in test_set])
    scores = []
    for i in range(len(r) - 1):
        other = labels[i + 1:] != labels[i]
        if other.any():
            scores.append(np.mean((r[i + 1:][other] - r[i]) ** 2, axis=1))
    if not scores:
        raise PreconditionViolation('baseline needs frames of at least two classes')
    scores = np.concatenate(scores)
    value = float(scores.mean())
    if value <= 0:
        raise PreconditionViolation('reconstructions of different classes are identical, baseline is 0')
    return AccuracyBaseline(value, len(scores))


def reconstruction_accuracy(correct, occluded, baseline) -> float:
    """
    clamp(1 - D(correct, occluded) / B, 0, 1)
    """
    b = baseline.value if isinstance(baseline, AccuracyBaseline) else float(baseline)
    if b <= 0:
        raise PreconditionViolation(f'baseline must be > 0, got {b}')
    return float(min(1.0, max(0.0, 1.0 - difference_score(correct, occluded) / b)))


@dataclass
class OcclusionHeatmap:
    visual_fractions: List[float]
    audio_fractions: List[float]
    accuracy: np.ndarray
    baseline: AccuracyBaseline

    def cell(self, visual_fraction: float, audio_fraction: float) -> float:
        return float(self.accuracy[self.visual_fractions.index(visual_fraction), self.audio_fractions.index(audio_fraction)])

    def is_monotone(self, tolerance: float = 0.03) -> bool:
        """
        Accuracy never rises by more than tolerance when either fraction grows by one step.
        """
        along_visual = np.diff(self.accuracy, axis=0)
        along_audio = np.diff(self.accuracy, axis=1)
        return bool((along_visual <= tolerance).all() and (along_audio <= tolerance).all())

    def to_csv(self, path: str):
        rows = ((float(v), float(a), float(self.accuracy[i, j]))
                for i, v in enumerate(self.visual_fractions) for j, a in enumerate(self.audio_fractions))
        write_csv(path, ('visual_fraction', 'audio_fraction', 'mean_accuracy'), rows)


def run_occlusion_sweep(model, fractions: Sequence[float], test_set: Sequence[SensoryFrame], seed: int = 0,
                        workers: int = 1, baseline: Optional[AccuracyBaseline] = None) -> OcclusionHeatmap:
    """
    For every (visual, audio) occlusion pair, reconstruct each occluded test frame and score it
    against the reconstruction of the clean frame; cells hold the mean over the test set.
    Occlusion masks are deterministic, so seed only identifies the run.
    """
    fractions = [float(f) for f in fractions]
    baseline = baseline or accuracy_baseline(model, test_set)
    clean = _as_matrix(reconstruct_frames(model, test_set))
    LOG.info('EXP: occlusion sweep over %d cells, %d frames, baseline B=%.3f (seed=%d)', len(fractions) ** 2, len(test_set), baseline.value, seed)

    def _cell(cell):
        v, a = cell
        spec = OcclusionSpec(v, a)
        if not spec.visual_rows and not spec.audio_rows:
            return 1.0
        occluded = _as_matrix(reconstruct_frames(model, [occlude(f, spec) for f in test_set]))
        d = np.mean((clean - occluded) ** 2, axis=1)
        return float(np.mean(np.clip(1.0 - d / baseline.value, 0.0, 1.0)))

    cells = [(v, a) for v in fractions for a in fractions]
    with timed('EXP', 'occlusion sweep'):
        values = _map(_cell, cells, workers)
    grid = np.array(values, dtype=np.float64).reshape(len(fractions), len(fractions))
    return OcclusionHeatmap(fractions, list(fractions), grid, baseline)


def _spec_for(modality: str, fraction: float) -> OcclusionSpec:
    if modality == VISUAL:
        return OcclusionSpec(fraction, 0.0)
    if modality == AUDIO:
        return OcclusionSpec(0.0, fraction)
    raise PreconditionViolation(f'modality must be one of {MODALITIES}, got {modality!r}')


def class_prototypes(model, frames: Sequence[SensoryFrame]) -> Dict[int, Reconstruction]:
    """
    Mean reconstruction of every digit class present in frames.
    """
    recons = reconstruct_frames(model, frames)
    ret = {}
    for digit in range(NUM_CLASSES):
        members = [r.flatten() for r in recons if r.label == digit]
        if members:
            ret[digit] = Reconstruction.from_flat(np.mean(members, axis=0), label=digit)
    return ret


def nearest_prototype(recon: SensoryFrame, prototypes: Dict[int, Reconstruction]) -> int:
    return min(prototypes, key=lambda digit: difference_score(recon, prototypes[digit]))


def occlusion_recovery_rate(model, test_set: Sequence[SensoryFrame], modality: str, fraction: float,
                            prototypes: Optional[Dict[int, Reconstruction]] = None) -> float:
    """
    Share of test frames whose occluded reconstruction is nearest to the prototype of their own class.
    """
    prototypes = prototypes or class_prototypes(model, test_set)
    spec = _spec_for(modality, fraction)
    recons = reconstruct_frames(model, [occlude(f, spec) for f in test_set])
    hits = sum(1 for frame, r in zip(test_set, recons) if nearest_prototype(r, prototypes) == frame.label)
    return hits / len(test_set)


@dataclass
class OcclusionDemoResult:
    digit: int
    modality: str
    fraction: float
    predicted: int
    clean: SensoryFrame
    occluded: SensoryFrame
    clean_reconstruction: Reconstruction
    reconstruction: Reconstruction
    images: List[str]

    @property
    def recovered(self) -> bool:
        return self.predicted == self.digit


def run_occlusion_demo(model, digit: int, modality: str, fraction: float, out: str, seed: int,
                       test_set: Optional[Sequence[SensoryFrame]] = None, augmentation: Augmentation = Augmentation(),
                       strict: bool = True) -> OcclusionDemoResult:
    """
    Occlude one modality of a held out frame of digit, reconstruct it and write the clean frame,
    occluded frame and reconstructions as PGM. The reconstruction must be nearest to the prototype
    of digit; with strict set a miss raises ReconstructionMismatch once the images are written.
    """
    spec = _spec_for(modality, fraction)
    if test_set is None:
        test_set = make_test_set(10, seed, augmentation)
    prototypes = class_prototypes(model, test_set)

    clean = make_frame(digit, frame_seed(seed, digit, TEST_VARIANT_OFFSET), augmentation)
    occluded = occlude(clean, spec)
    clean_recon, recon = reconstruct_frames(model, [clean, occluded])
    predicted = nearest_prototype(recon, prototypes)

    os.makedirs(out, exist_ok=True)
    stem = f'occlusion_d{digit}_{modality}_{int(round(fraction * 100)):03d}'
    images = []
    for name, frame in (('clean', clean), ('occluded', occluded), ('clean_reconstruction', clean_recon), ('reconstruction', recon)):
        path = os.path.join(out, f'{stem}_{name}.pgm')
        write_pgm(path, frame.image())
        images.append(path)

    result = OcclusionDemoResult(digit, modality, fraction, predicted, clean, occluded, clean_recon, recon, images)
    if not result.recovered:
        LOG.error('EXP: %s occlusion %.0f%% of digit %d reconstructed as %d', modality, fraction * 100, digit, predicted)
        if strict:
            raise ReconstructionMismatch(f'digit {digit} with {fraction:.0%} {modality} occlusion reconstructed as {predicted}')
    else:
        LOG.info('EXP: %s occlusion %.0f%% of digit %d recovered', modality, fraction * 100, digit)
    return result


def sweep_paths(out: str) -> Dict[str, str]:
    return {'efficiency': os.path.join(out, EFFICIENCY_CSV), 'occlusion': os.path.join(out, OCCLUSION_CSV)}
