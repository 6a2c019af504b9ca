import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stno_reservoir.audio import spectrogram_features
from stno_reservoir.encoder import EncodingConfig, make_mask
from stno_reservoir.oscillator import BiasPoint, OscillatorParams
from stno_reservoir.tasks import (SINE, SQUARE, DigitSetup, compute_features, compute_states,
                                  corpus_slots, enumerate_splits, evaluate_plan, evaluate_split,
                                  generate_sine_square, run_sine_square, synth_digit_corpus,
                                  training_wsr)

SS_CFG = EncodingConfig(n_theta=24, samples_per_theta=50, i_pp=5.0, oversample=5)


# ------------------------------------------------------------- sine/square

def test_sine_values():
    r = np.sqrt(2) / 2
    np.testing.assert_allclose(SINE, [0, r, 1, r, 0, -r, -1, -r], atol=1e-15)


def test_square_values_and_peak_to_peak():
    np.testing.assert_array_equal(SQUARE, [1, 1, 1, 1, -1, -1, -1, -1])
    assert np.ptp(SQUARE) == np.ptp(SINE) == 2.0


@given(st.integers(0, 2 ** 31))
def test_sequence_deterministic(seed):
    a, b = generate_sine_square(seed), generate_sine_square(seed)
    assert np.array_equal(a.labels, b.labels)
    assert a.labels.size == 160 and a.points.size == 1280 and a.n_train == 80


def test_label_balance():
    n, seeds = 160, range(500)
    ones = np.array([generate_sine_square(s).labels.sum() for s in seeds])
    sigma = np.sqrt(n * 0.25)
    assert np.all(np.abs(ones - 80) < 5 * sigma)
    assert abs(ones.mean() - 80) < 3 * sigma / np.sqrt(len(seeds))


def test_odd_length_rejected():
    with pytest.raises(ValueError):
        generate_sine_square(0, 159)


@pytest.mark.parametrize("i_dc, field", [(6.0, 350.0), (7.0, 430.0), (7.5, 500.0)])
def test_noiseless_above_threshold_has_no_errors(i_dc, field):
    rep = run_sine_square(BiasPoint(i_dc, field), OscillatorParams().noiseless(), SS_CFG)
    assert rep.errors == 0


def test_rms_spread_across_noise_seeds():
    rms = [run_sine_square(BiasPoint(7.0, 430.0), OscillatorParams(), SS_CFG, seed=s,
                           mask_seed=3).rms_deviation for s in range(5)]
    assert 1e-3 < np.std(rms, ddof=1) < 0.1


def test_target_shift_scan_reports_choice():
    rep = run_sine_square(BiasPoint(7.0, 430.0), OscillatorParams(), SS_CFG, mask_seed=3,
                          target_shift=None)
    assert rep.detail[0]["target_shift"] in range(-2, 3)
    assert rep.detail[0]["train_rms"] <= run_sine_square(
        BiasPoint(7.0, 430.0), OscillatorParams(), SS_CFG, mask_seed=3).detail[0]["train_rms"]


def test_mask_selection_uses_training_rms_only():
    a = run_sine_square(BiasPoint(7.0, 430.0), OscillatorParams(), SS_CFG, mask_seed=1,
                        mask_candidates=3)
    picked = min(range(1, 4), key=lambda m: run_sine_square(
        BiasPoint(7.0, 430.0), OscillatorParams(), SS_CFG, mask_seed=m).detail[0]["train_rms"])
    b = run_sine_square(BiasPoint(7.0, 430.0), OscillatorParams(), SS_CFG, mask_seed=picked)
    assert a.rms_deviation == b.rms_deviation


# ------------------------------------------------------------------- splits

@pytest.mark.parametrize("n, count", [(1, 10), (2, 45), (5, 252), (9, 10)])
def test_split_counts(n, count):
    plan = enumerate_splits(n)
    brute = sum(1 for mask in range(1 << 10) if bin(mask).count("1") == n)
    assert len(plan) == count == brute == math.comb(10, n)


@given(st.integers(1, 9))
def test_splits_disjoint_exhaustive_lexicographic(n):
    plan = enumerate_splits(n)
    assert list(plan.combinations) == sorted(plan.combinations)
    assert len(set(plan.combinations)) == len(plan)
    for combo in plan.combinations:
        test = plan.test_slots(combo)
        assert set(combo).isdisjoint(test)
        assert sorted(set(combo) | set(test)) == list(range(10))


@pytest.mark.parametrize("bad", [0, 10, -1, 2.5])
def test_split_range(bad):
    with pytest.raises(ValueError):
        enumerate_splits(bad)


# ------------------------------------------------------------------- corpus

def test_corpus_structure(synth_corpus):
    assert len(synth_corpus) == 500
    keys = {(s.label, s.speaker, s.utterance) for s in synth_corpus}
    assert len(keys) == 500
    assert {s.speaker for s in synth_corpus} == {f"s{i}" for i in range(5)}
    slots = corpus_slots(synth_corpus)
    assert np.bincount(slots).tolist() == [50] * 10


def test_corpus_deterministic(synth_corpus):
    again = synth_digit_corpus(0)
    assert all(np.array_equal(a.samples, b.samples) for a, b in zip(synth_corpus, again))
    other = synth_digit_corpus(1)
    assert not np.array_equal(other[0].samples, synth_corpus[0].samples)


def _time_normalised(fm, n=32):
    # resample each channel onto n points across the utterance
    src = np.linspace(0, 1, fm.n_intervals)
    dst = np.linspace(0, 1, n)
    return np.array([np.interp(dst, src, row) for row in fm.values])


def test_same_digit_more_alike_than_other_digits(synth_corpus):
    feats = {(s.label, s.speaker, s.utterance): _time_normalised(spectrogram_features(s))
             for s in synth_corpus if s.speaker == "s0" and s.utterance <= 4}

    def corr(a, b):
        return np.corrcoef(a.ravel(), b.ravel())[0, 1]
    same = [corr(feats[(d, "s0", 1)], feats[(d, "s0", u)]) for d in range(10) for u in (2, 3, 4)]
    cross = [corr(feats[(d, "s0", 1)], feats[(e, "s0", 2)])
             for d in range(10) for e in range(10) if e != d]
    assert min(same) > max(cross)


def test_paired_digits_share_long_term_spectrum(synth_corpus):
    def mean_spec(d):
        return np.mean([spectrogram_features(s).values.mean(axis=1)
                        for s in synth_corpus if s.label == d], axis=0)
    corr = np.corrcoef([mean_spec(d) for d in range(10)])
    for d in range(10):
        partner = d ^ 1
        others = [k for k in range(10) if k // 2 != d // 2]
        assert corr[d, partner] > 0.95
        assert corr[d, others].max() < 0.8


def test_incomplete_corpus_rejected(synth_corpus):
    with pytest.raises(ValueError, match="utterances"):
        corpus_slots(synth_corpus[1:])
    with pytest.raises(ValueError, match="missing digits"):
        corpus_slots([s for s in synth_corpus if s.label != 3])
    with pytest.raises(ValueError):
        corpus_slots([])


# ------------------------------------------------------------------- digits

@pytest.fixture(scope="module")
def one_speaker(synth_corpus):
    return [s for s in synth_corpus if s.speaker == "s0"]


def _setup(features, mode, n_theta=40):
    cfg = EncodingConfig(n_theta=n_theta)
    mask = make_mask(features[0].n_channels, n_theta, "01", 1)
    return DigitSetup(BiasPoint(6.0, 430.0), OscillatorParams(), cfg, mask, mode, 0)


def test_states_independent_of_jobs_and_order(one_speaker):
    subset = one_speaker[:6]
    feats = compute_features(subset, "spectrogram")
    setup = _setup(feats, "oscillator")
    serial = compute_states(feats, subset, setup, jobs=1)
    parallel = compute_states(feats, subset, setup, jobs=2)
    assert all(np.array_equal(a, b) for a, b in zip(serial, parallel))
    rev = compute_states(feats[::-1], subset[::-1], setup)[::-1]
    assert all(np.array_equal(a, b) for a, b in zip(serial, rev))


def test_control_interpolates_training_but_not_test(one_speaker):
    # five intervals per utterance keeps the training S full column rank
    feats = compute_features(one_speaker, "spectrogram")
    for f in feats:
        f.values = f.values[:, 20:25]
    setup = _setup(feats, "control", n_theta=400)
    states = compute_states(feats, one_speaker, setup)
    labels = np.array([s.label for s in one_speaker])
    slots = corpus_slots(one_speaker)
    train = [i for i in range(len(states)) if slots[i] == 0]
    S = np.hstack([states[i] for i in train])
    assert np.linalg.matrix_rank(S) == S.shape[1]
    assert training_wsr([states[i] for i in train], labels[train]) == 1.0
    rep = evaluate_plan(states, labels, slots, enumerate_splits(1))
    assert rep.word_success_rate < 0.95


@pytest.mark.parametrize("mode, n_train", [("control", 1), ("control", 9), ("oscillator", 5)])
def test_plan_matches_direct_split_solve(one_speaker, mode, n_train):
    feats = compute_features(one_speaker, "spectrogram")
    states = compute_states(feats, one_speaker, _setup(feats, mode))
    labels = np.array([s.label for s in one_speaker])
    slots = corpus_slots(one_speaker)
    plan = enumerate_splits(n_train)
    rep = evaluate_plan(states, labels, slots, plan)
    direct = [evaluate_split(states, labels, slots, c) for c in plan.combinations]
    assert [d["wsr"] for d in rep.detail] == [w for w, _ in direct]
    np.testing.assert_array_equal(rep.confusion, sum(c for _, c in direct))


def test_evaluate_plan_statistics(one_speaker):
    feats = compute_features(one_speaker, "cochlear")
    setup = _setup(feats, "control")
    states = compute_states(feats, one_speaker, setup)
    labels = np.array([s.label for s in one_speaker])
    slots = corpus_slots(one_speaker)
    rep = evaluate_plan(states, labels, slots, enumerate_splits(9))
    rates = np.array([d["wsr"] for d in rep.detail])
    assert len(rates) == 10
    assert rep.word_success_rate == pytest.approx(rates.mean())
    assert rep.wsr_std == pytest.approx(rates.std())
    assert rep.confusion.sum() == 10 * 10  # one test utterance per digit per split


def test_learning_curve_rises(synth_corpus):
    feats = compute_features(synth_corpus, "spectrogram")
    setup = _setup(feats, "oscillator", n_theta=30)
    states = compute_states(feats, synth_corpus, setup)
    labels = np.array([s.label for s in synth_corpus])
    slots = corpus_slots(synth_corpus)
    lo = evaluate_plan(states, labels, slots, enumerate_splits(1))
    hi = evaluate_plan(states, labels, slots, enumerate_splits(9))
    assert hi.word_success_rate >= lo.word_success_rate


def test_unknown_mode(one_speaker):
    feats = compute_features(one_speaker[:1], "spectrogram")
    with pytest.raises(ValueError, match="mode"):
        compute_states(feats, one_speaker[:1], _setup(feats, "magic"))
