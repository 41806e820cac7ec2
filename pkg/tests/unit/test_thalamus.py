'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
import numpy as np
import pytest

from ctnn.dataset import SequenceSpec, make_frame, make_sequence
from ctnn.defines import FRAME_SIZE, MAX_DIFFERENCE
from ctnn.exceptions import PreconditionViolation
from ctnn.frames import Reconstruction, SensoryFrame
from ctnn.thalamus import (CtnnState, ctnn_step, difference_image, difference_score, gate, reconstruction_engine,
                           run_sequence)


def _full(value):
    return SensoryFrame(np.full((28, 28), value), np.full((28, 28), value))


def test_reconstruction_engine_inverts_flatten():
    frame = make_frame(7, seed=3)
    recon = reconstruction_engine(frame.flatten(), scale=1)
    assert isinstance(recon, Reconstruction)
    assert np.array_equal(recon.visual, frame.visual)
    assert np.array_equal(recon.audio, frame.audio)


def test_reconstruction_engine_scaling():
    recon = reconstruction_engine(np.full(FRAME_SIZE, 0.5))
    assert np.all(recon.flatten() == 127.5)


def test_reconstruction_engine_clamps():
    recon = reconstruction_engine(np.full(FRAME_SIZE, 1.5))
    assert np.all(recon.flatten() == 255)


def test_reconstruction_engine_length():
    with pytest.raises(PreconditionViolation):
        reconstruction_engine(np.zeros(784))


def test_difference_score_extremes():
    frame = make_frame(2, seed=1)
    assert difference_score(frame, frame) == 0
    assert difference_score(_full(255), _full(0)) == 65025 == MAX_DIFFERENCE


def test_difference_score_symmetric():
    a, b = make_frame(1, seed=1), make_frame(6, seed=2)
    assert difference_score(a, b) == difference_score(b, a)


def test_difference_score_shape_mismatch():
    with pytest.raises(PreconditionViolation):
        difference_score(np.zeros(4), np.zeros(5))


def test_difference_image():
    img = difference_image(_full(200), _full(50))
    assert np.all(img.flatten() == 150)


@pytest.mark.parametrize("difference, fires", [(150, True), (50, False), (100, True)])
def test_gate(difference, fires):
    frame = make_frame(4, seed=1)
    out = gate(frame, difference, 100)
    if fires:
        assert out is frame
    else:
        assert out.is_zero()


def test_gate_rejects_negative():
    with pytest.raises(PreconditionViolation):
        gate(_full(1), -1, 100)


def test_first_frame_fires(identity_cortex):
    state = CtnnState(identity_cortex, 100)
    assert state.last_reconstruction.is_zero()
    record = ctnn_step(state, make_frame(3, seed=1))
    assert record.fired
    assert record.network_calls == 1
    assert identity_cortex.calls == 1


def test_same_class_frame_is_gated(identity_cortex):
    state = CtnnState(identity_cortex, 100)
    state.step(make_frame(3, seed=1))
    expectation = state.last_reconstruction
    record = state.step(make_frame(3, seed=2))
    assert not record.fired
    assert record.difference < 20
    assert record.output.is_zero()
    assert state.last_reconstruction is expectation
    assert state.network_calls == 1


def test_threshold_above_maximum_never_fires(identity_cortex):
    frames = make_sequence(SequenceSpec(20, 0.0, seed=1))
    trace = run_sequence(identity_cortex, 65026, frames)
    assert trace.network_calls == 0
    assert identity_cortex.calls == 0
    assert trace.efficiency == 1.0


@pytest.mark.parametrize("similar_fraction", [0.0, 0.5, 1.0])
def test_zero_threshold_always_fires(identity_cortex, similar_fraction):
    frames = make_sequence(SequenceSpec(15, similar_fraction, seed=2))
    trace = run_sequence(identity_cortex, 0, frames)
    assert trace.network_calls == 15
    assert all(trace.fired())
    assert trace.efficiency == 0.0


def test_distinct_classes_all_fire(identity_cortex):
    frames = [make_frame(d, seed=d + 10) for d in range(10)]
    trace = run_sequence(identity_cortex, 100, frames)
    assert trace.network_calls == 10


def test_one_class_fires_once(identity_cortex):
    frames = [make_frame(5, seed=s) for s in range(10)]
    trace = run_sequence(identity_cortex, 100, frames)
    assert trace.network_calls == 1
    assert trace.fired() == [True] + [False] * 9


def test_reconstruction_only_changes_on_fire(identity_cortex):
    frames = make_sequence(SequenceSpec(40, 0.5, seed=3))
    trace = run_sequence(identity_cortex, 100, frames)
    for record in trace.records:
        if record.fired:
            assert record.reconstruction_after is not record.reconstruction_before
        else:
            assert record.reconstruction_after is record.reconstruction_before
    assert trace.network_calls == sum(1 for d in trace.differences() if d >= 100)


def _replay(frames, threshold):
    last, fired = np.zeros(FRAME_SIZE), []
    for frame in frames:
        y = frame.flatten()
        fired.append(np.mean((y - last) ** 2) >= threshold)
        if fired[-1]:
            last = y
    return fired


def test_random_streams_match_stepwise_replay(identity_cortex):
    rng = np.random.default_rng(11)
    total = 0
    for _ in range(1000):
        frames = [SensoryFrame.from_flat(rng.integers(0, 256, size=FRAME_SIZE).astype(np.float64))]
        for _ in range(int(rng.integers(0, 8))):
            if rng.random() < 0.5:
                values = rng.integers(0, 256, size=FRAME_SIZE).astype(np.float64)
            else:
                values = np.clip(frames[-1].flatten() + rng.normal(0, rng.choice([1.0, 5.0, 15.0, 60.0]), size=FRAME_SIZE), 0, 255)
            frames.append(SensoryFrame.from_flat(values))
        threshold = float(rng.choice([0, 1, 25, 100, 225, 3600, 10000, 65026]))

        trace = run_sequence(identity_cortex, threshold, frames)
        expected = _replay(frames, threshold)
        assert trace.fired() == expected
        assert trace.network_calls == sum(expected)
        total += trace.network_calls
    assert total > 0


def test_calls_monotone_in_threshold_on_structured_streams(identity_cortex):
    for s in (0.0, 0.3, 0.7, 1.0):
        frames = make_sequence(SequenceSpec(50, s, seed=4))
        calls = [run_sequence(identity_cortex, th, frames).network_calls for th in (0, 20, 50, 100, 65026)]
        assert calls == sorted(calls, reverse=True)


def test_run_sequence_callbacks(identity_cortex):
    seen = []
    frames = make_sequence(SequenceSpec(5, 0.0, seed=1))
    run_sequence(identity_cortex, 100, frames, callbacks=[seen.append, lambda r: None])
    assert [r.frame_index for r in seen] == list(range(5))


def test_run_sequence_rejects_empty(identity_cortex):
    with pytest.raises(PreconditionViolation):
        run_sequence(identity_cortex, 100, [])


def test_negative_threshold(identity_cortex):
    with pytest.raises(PreconditionViolation):
        CtnnState(identity_cortex, -1)
