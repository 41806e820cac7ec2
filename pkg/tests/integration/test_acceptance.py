'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


End to end checks on the full-size network trained with the default config.
Training takes a few minutes, so everything here is marked slow.
'''
import pytest

from ctnn.config import Config
from ctnn.dataset import SequenceSpec, make_frame, make_sequence, make_test_set, make_training_set
from ctnn.experiments import (class_prototypes, occlusion_recovery_rate, reconstruct_frames, run_efficiency_sweep,
                              run_occlusion_demo, run_occlusion_sweep, run_training_experiment, threshold_regime)
from ctnn.thalamus import difference_score, run_sequence


pytestmark = pytest.mark.slow


@pytest.fixture(scope='session')
def config():
    return Config({'log': {'disabled': True}})


@pytest.fixture(scope='session')
def trained(config, tmp_path_factory):
    return run_training_experiment(config, str(tmp_path_factory.mktemp('acceptance')))


@pytest.fixture(scope='session')
def test_set(config):
    return make_test_set(config.dataset.test_per_class, config.seed)


def test_training_converges(trained):
    final = trained.history.final()
    assert len(trained.history) == 200
    assert final.train_loss <= 0.01
    assert final.test_loss <= 0.012


def test_trained_reconstructions(trained, config):
    frames = make_training_set(1, config.seed)
    recons = reconstruct_frames(trained.model, frames)
    for frame, recon in zip(frames, recons):
        assert difference_score(frame, recon) < 20
        assert recon.flatten().min() >= 0 and recon.flatten().max() <= 255
    assert difference_score(recons[3], recons[8]) > 100


def test_threshold_regime(trained):
    frames = make_sequence(SequenceSpec(200, 0.5, seed=99))
    report = threshold_regime(trained.model, frames)
    assert report.same_class_below >= 0.9
    assert report.class_change_above >= 0.9


def test_stream_examples(trained):
    distinct = [make_frame(d, 500 + d) for d in range(10)]
    assert run_sequence(trained.model, 100, distinct).network_calls == 10
    same = [make_frame(6, 600 + s) for s in range(10)]
    assert run_sequence(trained.model, 100, same).network_calls == 1


def test_efficiency_trend(trained, config):
    sweep = config.sweep
    result = run_efficiency_sweep(sweep.thresholds, sweep.similar_fractions, sweep.length, config.seed, trained.model)
    assert len(result.rows) == 44
    assert result.monotone_in_similarity(100)
    assert result.calls(100, 0.0) >= 95
    assert result.calls(100, 1.0) <= 5
    assert result.monotone_in_threshold()


def test_occlusion_heatmap(trained, config, test_set):
    heatmap = run_occlusion_sweep(trained.model, config.sweep.occlusion_fractions, test_set, config.seed)
    assert heatmap.cell(0.0, 0.0) == 1.0
    for v in heatmap.visual_fractions:
        for a in heatmap.audio_fractions:
            if v <= 0.5 and a <= 0.5:
                assert heatmap.cell(v, a) >= 0.9
    assert heatmap.cell(1.0, 1.0) < heatmap.cell(0.0, 0.0)
    assert heatmap.is_monotone(tolerance=0.03)


@pytest.mark.parametrize("modality", ['visual', 'audio'])
def test_occlusion_recovery(trained, test_set, modality, tmp_path):
    prototypes = class_prototypes(trained.model, test_set)
    assert occlusion_recovery_rate(trained.model, test_set, modality, 0.5, prototypes) >= 0.95
    result = run_occlusion_demo(trained.model, 4, modality, 0.5, str(tmp_path), seed=42, test_set=test_set)
    assert result.recovered
