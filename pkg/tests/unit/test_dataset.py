'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''
from itertools import combinations

import numpy as np
import pytest

from ctnn.backends.table import read_csv
from ctnn.config import AttrDict
from ctnn.dataset import (TEST_VARIANT_OFFSET, Augmentation, OcclusionSpec, SequenceSpec, ToneSpec, TrainingOcclusion,
                          count_same_class_transitions, export_dataset, export_sequence, frame_seed, load_dataset,
                          make_frame, make_sequence, make_test_set, make_training_set, occlude, render_digit,
                          render_tone, sequence_plan)
from ctnn.exceptions import DatasetError, PreconditionViolation
from ctnn.glyphs import ATLAS, MIN_LIT_PIXELS, GlyphAtlas
from ctnn.thalamus import difference_score


def test_atlas_check():
    assert ATLAS.check()
    for d in range(10):
        assert ATLAS.lit_pixels(d) >= MIN_LIT_PIXELS
    for a, b in combinations(range(10), 2):
        assert ATLAS.separation(a, b) > 100


def test_atlas_geometry():
    lit_rows = np.flatnonzero(ATLAS.bitmaps.any(axis=(0, 2)))
    lit_cols = np.flatnonzero(ATLAS.bitmaps.any(axis=(0, 1)))
    assert lit_rows.min() >= 3 and lit_rows.max() <= 23
    assert lit_cols.min() >= 6 and lit_cols.max() <= 20


def test_atlas_rejects_bad_shape():
    with pytest.raises(PreconditionViolation):
        GlyphAtlas(np.zeros((9, 28, 28)))


def test_render_digit_deterministic():
    assert np.array_equal(render_digit(3, 1), render_digit(3, 1))
    assert not np.array_equal(render_digit(3, 1), render_digit(3, 2))


def test_render_digit_same_class_close():
    a = make_frame(3, 1)
    b = make_frame(3, 2)
    assert difference_score(a.visual, b.visual) < 20
    assert difference_score(a, b) < 20


def test_render_digit_cross_class_far():
    for s in range(5):
        assert difference_score(render_digit(3, s), render_digit(8, s + 100)) > 100


def test_render_digit_range_and_integers():
    grid = render_digit(0, 5, Augmentation(noise_sigma=8, translation=2, tone_jitter=0.1))
    assert grid.shape == (28, 28)
    assert grid.min() >= 0 and grid.max() <= 255
    assert np.array_equal(grid, np.rint(grid))


def test_render_digit_rejects_bad_digit():
    with pytest.raises(PreconditionViolation):
        render_digit(10, 1)
    with pytest.raises(PreconditionViolation):
        render_digit(3, -1)


@pytest.mark.parametrize("digit, row", [(0, 25), (9, 7), (4, 17)])
def test_tone_band_row(digit, row):
    assert ToneSpec.for_digit(digit).band_row == row
    tone = render_tone(digit, 1, Augmentation(noise_sigma=0, tone_jitter=0))
    assert int(np.argmax(tone[:, 0])) == row
    assert np.all(tone == tone[:, :1])


def test_tone_same_class_close_cross_class_far():
    assert difference_score(render_tone(6, 1), render_tone(6, 2)) < 20
    assert difference_score(make_frame(0, 1), make_frame(1, 2)) > 100


def test_all_class_pairs_far():
    frames = [make_frame(d, 40 + d) for d in range(10)]
    for a, b in combinations(frames, 2):
        assert difference_score(a, b) > 100


def test_make_frame_composition():
    frame = make_frame(5, 9)
    assert frame.flatten().shape == (1568,)
    assert frame.label == 5
    assert np.array_equal(frame.visual, render_digit(5, 9))
    assert np.array_equal(frame.audio, render_tone(5, 9))


def test_blank_glyph_leaves_audio_alone():
    aug = Augmentation(noise_sigma=0, tone_jitter=0)
    blank = GlyphAtlas(np.zeros((10, 28, 28)))
    frame = make_frame(2, 1, aug, atlas=blank)
    assert not frame.visual.any()
    assert np.array_equal(frame.audio, make_frame(2, 1, aug).audio)


def test_training_set_sizes():
    assert len(make_training_set(30, 7)) == 300
    frames = make_training_set(1, 7)
    assert [f.label for f in frames] == list(range(10))


def test_training_set_deterministic():
    a = b''.join(f.tobytes() for f in make_training_set(2, 3))
    b = b''.join(f.tobytes() for f in make_training_set(2, 3))
    assert a == b


def test_test_set_disjoint_from_training_set():
    train = {f.tobytes() for f in make_training_set(5, 3)}
    test = make_test_set(5, 3)
    assert len(test) == 50
    assert not train & {f.tobytes() for f in test}
    with pytest.raises(PreconditionViolation):
        make_test_set(51, 3)


def test_training_set_never_reaches_held_out_variants(tmp_path):
    assert len(make_training_set(TEST_VARIANT_OFFSET, 3)) == 10 * TEST_VARIANT_OFFSET
    with pytest.raises(PreconditionViolation):
        make_training_set(TEST_VARIANT_OFFSET + 1, 3)
    with pytest.raises(PreconditionViolation):
        make_training_set(60, 0)
    with pytest.raises(PreconditionViolation):
        export_dataset(str(tmp_path), TEST_VARIANT_OFFSET + 1, seed=3)
    train = {frame_seed(3, d, v) for d in range(10) for v in range(TEST_VARIANT_OFFSET)}
    test = {frame_seed(3, d, v) for d in range(10) for v in range(TEST_VARIANT_OFFSET, 2 * TEST_VARIANT_OFFSET)}
    assert not train & test


def test_frame_seed():
    assert frame_seed(42, 3, 7) == 42307


@pytest.mark.parametrize("length, s, same", [(11, 0.0, 0), (11, 1.0, 10), (101, 0.5, 50), (100, 0.3, 30)])
def test_sequence_transitions(length, s, same):
    spec = SequenceSpec(length, s, seed=5)
    frames = make_sequence(spec)
    assert len(frames) == length
    assert spec.same_class_transitions == same
    assert count_same_class_transitions(frames) == same
    for a, b in zip(frames, frames[1:]):
        assert a != b


def test_sequence_all_one_class():
    frames = make_sequence(SequenceSpec(11, 1.0, seed=2))
    assert len({f.label for f in frames}) == 1


def test_sequence_deterministic():
    spec = SequenceSpec(30, 0.4, seed=8)
    assert sequence_plan(spec) == sequence_plan(spec)
    assert make_sequence(spec) == make_sequence(spec)


def test_sequence_spec_validation():
    with pytest.raises(PreconditionViolation):
        SequenceSpec(1, 0.0, 1)
    with pytest.raises(PreconditionViolation):
        SequenceSpec(10, 1.5, 1)


def test_sequence_without_augmentation_fails_cleanly():
    with pytest.raises(PreconditionViolation):
        make_sequence(SequenceSpec(5, 1.0, seed=1), Augmentation(noise_sigma=0, translation=0, tone_jitter=0))


def test_occlude_identity_and_full():
    frame = make_frame(6, 2)
    assert occlude(frame, OcclusionSpec(0, 0)) == frame
    assert occlude(frame, OcclusionSpec(1, 1)).is_zero()


def test_occlude_half_visual():
    frame = make_frame(6, 2)
    out = occlude(frame, OcclusionSpec(0.5, 0))
    assert OcclusionSpec(0.5, 0).visual_rows == 14
    assert not out.visual[14:].any()
    assert np.array_equal(out.visual[:14], frame.visual[:14])
    assert np.array_equal(out.audio, frame.audio)
    assert out.label == 6


def test_occlude_idempotent_and_monotone():
    frame = make_frame(8, 4)
    spec = OcclusionSpec(0.3, 0.6)
    once = occlude(frame, spec)
    assert occlude(once, spec) == once
    smaller = np.count_nonzero(once.flatten())
    larger = np.count_nonzero(occlude(frame, OcclusionSpec(0.6, 0.9)).flatten())
    assert larger <= smaller
    assert spec.occluded_pixels() == (8 * 28, 16 * 28)


def test_occlusion_spec_validation():
    with pytest.raises(PreconditionViolation):
        OcclusionSpec(-0.1, 0)


def _normalized_batch(n=20):
    return np.stack([make_frame(i % 10, i).normalized() for i in range(n)])


def test_training_occlusion_zeroes_bottom_rows_only():
    batch = _normalized_batch()
    out = TrainingOcclusion(probability=1.0, max_fraction=0.5)(batch, np.random.default_rng(0))
    assert out.shape == batch.shape
    assert not np.shares_memory(out, batch)
    for grid, ref in zip(out.reshape(-1, 2, 28, 28), batch.reshape(-1, 2, 28, 28)):
        for modality in range(2):
            candidates = []
            for rows in range(15):
                expected = ref[modality].copy()
                expected[28 - rows:] = 0.0
                candidates.append(np.array_equal(grid[modality], expected))
            assert any(candidates)


def test_training_occlusion_probability_bounds():
    batch = _normalized_batch()
    untouched = TrainingOcclusion(probability=0.0)(batch, np.random.default_rng(1))
    assert np.array_equal(untouched, batch)
    full = TrainingOcclusion(probability=1.0, max_fraction=1.0)
    outs = [full(batch, np.random.default_rng(s)) for s in range(5)]
    assert any(not np.array_equal(o, batch) for o in outs)
    assert all((o <= batch).all() for o in outs)


def test_training_occlusion_deterministic():
    batch = _normalized_batch()
    occlusion = TrainingOcclusion()
    a = occlusion(batch, np.random.default_rng(4))
    b = occlusion(batch, np.random.default_rng(4))
    assert np.array_equal(a, b)


def test_training_occlusion_validation():
    with pytest.raises(PreconditionViolation):
        TrainingOcclusion(probability=1.5)
    with pytest.raises(PreconditionViolation):
        TrainingOcclusion(max_fraction=-0.1)
    with pytest.raises(PreconditionViolation):
        TrainingOcclusion()(np.zeros((2, 16)), np.random.default_rng(0))


def test_training_occlusion_from_config():
    assert TrainingOcclusion.from_config(AttrDict({'epochs': 1})) is None
    assert TrainingOcclusion.from_config(AttrDict({'occlusion': None})) is None
    assert TrainingOcclusion.from_config(AttrDict({'occlusion': {'probability': 0}})) is None
    assert TrainingOcclusion.from_config(AttrDict({'occlusion': {'probability': 0.5}})) == TrainingOcclusion(0.5, 0.6)


def test_export_load_round_trip(tmp_path):
    count = export_dataset(str(tmp_path), 2, seed=7)
    assert count == 20
    rows = read_csv(str(tmp_path / 'manifest.csv'))
    assert rows[0] == {'filename': 'd0_v0.pgm', 'digit': '0', 'variant': '0', 'seed': '7000'}
    loaded = load_dataset(str(tmp_path))
    assert loaded == make_training_set(2, 7)


def test_load_dataset_missing(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(str(tmp_path / 'missing'))


def test_export_sequence(tmp_path):
    spec = SequenceSpec(6, 0.4, seed=3)
    path = export_sequence(spec, str(tmp_path), images=True)
    rows = read_csv(path)
    frames = make_sequence(spec)
    assert [int(r['digit']) for r in rows] == [f.label for f in frames]
    assert len(list(tmp_path.glob('*.pgm'))) == 6
    assert [make_frame(int(r['digit']), int(r['seed'])) for r in rows] == frames
