"""Benchmark tasks: sine/square waveform classification and spoken digits.

Both tasks share the same pipeline: features -> mask -> drive -> envelope ->
sampled node states -> pseudoinverse readout. Digit evaluation runs over
every train/test split of the 10 utterance slots per (digit, speaker).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import partial
from itertools import combinations

import numpy as np

from .audio import SAMPLE_RATE, AudioSignal, FeatureMatrix, extract_features
from .encoder import (EncodingConfig, Mask, control_states, encode_drive, make_mask,
                      sample_nodes)
from .oscillator import BiasPoint, EnvelopeTrace, OscillatorParams, simulate_envelope
from .readout import (TaskReport, classify_word, compress_columns, one_hot_targets,
                      reconstruct_outputs, rms_deviation, train_weights)

POINTS_PER_PERIOD = 8
N_UTTERANCES = 10
N_DIGITS = 10


# ---------------------------------------------------------------- sine/square

@dataclass(frozen=True)
class SineSquareSequence:
    labels: np.ndarray = dc_field(repr=False)  # 0 = sine, 1 = square
    seed: int = 0

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([SQUARE if lab else SINE for lab in self.labels])

    @property
    def n_train(self) -> int:
        return self.labels.size // 2


_K = np.arange(POINTS_PER_PERIOD)
SINE = np.sin(2 * np.pi * _K / POINTS_PER_PERIOD)
SQUARE = np.sign(np.sin(2 * np.pi * (_K + 0.5) / POINTS_PER_PERIOD))


def generate_sine_square(seed: int = 0, n_waveforms: int = 160) -> SineSquareSequence:
    if n_waveforms < 2 or n_waveforms % 2:
        raise ValueError("n_waveforms must be even and >= 2")
    rng = np.random.default_rng(seed)
    return SineSquareSequence(rng.integers(0, 2, n_waveforms), int(seed))


def _shifted(n_cols: int, shift: int):
    # column j of the states is paired with target index j - shift
    cols = np.arange(n_cols)
    tgt = cols - shift
    ok = (tgt >= 0) & (tgt < n_cols)
    return cols[ok], tgt[ok]


def _fit_shift(S, target, n_split, shift):
    cols, tgt = _shifted(S.shape[1], shift)
    train = tgt < n_split
    W = train_weights(S[:, cols[train]], target[None, tgt[train]])
    return W, cols, tgt, train


def sine_square_trial(bias: BiasPoint, params: OscillatorParams, cfg: EncodingConfig,
                      seq: SineSquareSequence, mask: Mask, seed: int = 0,
                      target_shift: int | None = 0):
    """Run one sine/square trial; returns ``(TaskReport, EnvelopeTrace)``.

    The readout is trained on the first half of the waveforms and evaluated on
    the second. The error count thresholds each test waveform's mean output
    over its 8 points at 0.5. ``target_shift=None`` scans shifts -2..2 and keeps
    the one with the lowest training RMS.
    """
    x = seq.points
    target = np.repeat(seq.labels, POINTS_PER_PERIOD).astype(float)
    n_split = seq.n_train * POINTS_PER_PERIOD
    trace = simulate_envelope(encode_drive(x[None, :], mask, cfg), bias, params, seed)
    S = sample_nodes(trace, cfg, x.size).values

    shifts = range(-2, 3) if target_shift is None else [target_shift]
    best = None
    for sh in shifts:
        W, cols, tgt, train = _fit_shift(S, target, n_split, sh)
        fit = rms_deviation(reconstruct_outputs(W, S[:, cols[train]])[0], target[tgt[train]])
        if best is None or fit < best[0]:
            best = (fit, sh, W, cols, tgt, train)
    _, sh, W, cols, tgt, train = best

    test = ~train
    out = reconstruct_outputs(W, S[:, cols[test]])[0]
    rms = rms_deviation(out, target[tgt[test]])
    wave = tgt[test] // POINTS_PER_PERIOD
    n_wave = seq.labels.size
    sums = np.bincount(wave, out, minlength=n_wave)
    counts = np.bincount(wave, minlength=n_wave)
    tested = np.flatnonzero(counts)
    decided = (sums[tested] / counts[tested]) > 0.5
    errors = int(np.sum(decided != seq.labels[tested].astype(bool)))
    report = TaskReport(word_success_rate=1.0 - errors / tested.size, rms_deviation=rms,
                        errors=errors, detail=[{"target_shift": sh, "n_test": int(tested.size),
                                                "train_rms": best[0]}])
    return report, trace


def select_mask(bias: BiasPoint, params: OscillatorParams, cfg: EncodingConfig,
                seq: SineSquareSequence, seeds, alphabet: str = "pm1", seed=0,
                target_shift: int | None = 0) -> tuple[Mask, list[float]]:
    """Pick the candidate mask with the lowest *training* RMS.

    Only the training half of ``seq`` informs the choice; ties go to the
    earliest seed. Returns the mask and every candidate's training RMS.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one candidate mask seed")
    scores = []
    for ms in seeds:
        mask = make_mask(1, cfg.n_theta, alphabet, ms)
        rep, _ = sine_square_trial(bias, params, cfg, seq, mask, seed, target_shift)
        scores.append(rep.detail[0]["train_rms"])
    return make_mask(1, cfg.n_theta, alphabet, seeds[int(np.argmin(scores))]), scores


def run_sine_square(bias: BiasPoint, params: OscillatorParams, cfg: EncodingConfig,
                    seed=0, mask_seed: int = 1, label_seed: int = 0,
                    n_waveforms: int = 160, target_shift: int | None = 0,
                    alphabet: str = "pm1", mask_candidates: int = 1) -> TaskReport:
    """Full sine/square experiment. With ``mask_candidates > 1`` the mask is
    chosen by ``select_mask`` among seeds ``mask_seed .. mask_seed + k - 1``."""
    seq = generate_sine_square(label_seed, n_waveforms)
    mask, _ = select_mask(bias, params, cfg, seq, range(mask_seed, mask_seed + mask_candidates),
                          alphabet, seed, target_shift)
    return sine_square_trial(bias, params, cfg, seq, mask, seed, target_shift)[0]


# ------------------------------------------------------------------- splits

@dataclass(frozen=True)
class SplitPlan:
    n_train: int
    combinations: tuple

    def __len__(self):
        return len(self.combinations)

    def test_slots(self, combo) -> tuple:
        return tuple(i for i in range(N_UTTERANCES) if i not in combo)


def enumerate_splits(n_train: int) -> SplitPlan:
    """All ``C(10, n_train)`` training subsets of slots 0..9, lexicographic."""
    if not isinstance(n_train, (int, np.integer)) or not 1 <= n_train <= N_UTTERANCES - 1:
        raise ValueError(f"n_train must be an integer in 1..9, got {n_train!r}")
    return SplitPlan(int(n_train), tuple(combinations(range(N_UTTERANCES), int(n_train))))


def n_combinations(n_train: int) -> int:
    return math.comb(N_UTTERANCES, n_train)


# ---------------------------------------------------------- synthetic corpus

# Digits come in pairs built from four tones (a, b, c, d) spread over the
# band. The even digit plays {a, c} then {b, d}; the odd digit plays {a, d}
# then {b, c}. Both have the same long-term spectrum and differ only in which
# tones co-occur, so a readout that is linear in the per-frame spectrum
# cannot separate them.
_TONES = np.geomspace(250.0, 4500.0, 20)
_BASE_DUR = np.linspace(0.09, 0.13, N_DIGITS)


def _digit_template(digit: int):
    p = digit // 2
    a, b, c, d = _TONES[[p, p + 5, p + 10, p + 15]]
    return ((a, c), (b, d)) if digit % 2 == 0 else ((a, d), (b, c))


def synth_digit_corpus(seed: int = 0, n_speakers: int = 5, n_utterances: int = N_UTTERANCES,
                       sample_rate: float = SAMPLE_RATE, noise: float = 0.02) -> list[AudioSignal]:
    """Tone-pair "digits": 10 digits x ``n_speakers`` x ``n_utterances``.

    Each speaker has a fixed formant shift of up to 8 %. Each utterance draws
    its own segment durations (+-15 %), tone detuning (+-2 %), phases,
    amplitude and additive white noise from a seed derived from
    ``(seed, digit, speaker, utterance)``.
    """
    rng = np.random.default_rng(seed)
    shifts = 1.0 + rng.uniform(-0.08, 0.08, n_speakers)
    out = []
    for digit in range(N_DIGITS):
        template = _digit_template(digit)
        for s in range(n_speakers):
            for u in range(n_utterances):
                r = np.random.default_rng([seed, digit, s, u])
                parts = []
                for tones in template:
                    dur = _BASE_DUR[digit] * r.uniform(0.85, 1.15)
                    t = np.arange(int(dur * sample_rate)) / sample_rate
                    env = np.sqrt(np.sin(np.pi * t / dur))
                    glide = 1.0 + 0.05 * t / dur
                    seg = sum(np.sin(2 * np.pi * f * shifts[s] * r.uniform(0.98, 1.02) * glide * t
                                     + r.uniform(0, 2 * np.pi)) for f in tones)
                    parts.append(env * seg)
                x = np.concatenate(parts) * r.uniform(0.3, 1.0)
                x = x + noise * r.standard_normal(x.size)
                out.append(AudioSignal(x / np.abs(x).max(), sample_rate, digit, f"s{s}", u + 1))
    return out


def corpus_slots(corpus) -> np.ndarray:
    """Slot index 0..9 of every signal within its (digit, speaker) group.

    Raises if any group does not hold exactly 10 utterances or a digit is missing.
    """
    groups: dict = {}
    for i, sig in enumerate(corpus):
        groups.setdefault((sig.label, sig.speaker), []).append((sig.utterance, i))
    if not groups:
        raise ValueError("empty corpus")
    digits = {d for d, _ in groups}
    speakers = {s for _, s in groups}
    if digits != set(range(N_DIGITS)):
        raise ValueError(f"corpus is missing digits {sorted(set(range(N_DIGITS)) - digits)}")
    slots = np.empty(len(corpus), dtype=np.int64)
    for (d, s), members in groups.items():
        if len(members) != N_UTTERANCES:
            raise ValueError(f"digit {d} speaker {s}: {len(members)} utterances, need {N_UTTERANCES}")
        for rank, (_, i) in enumerate(sorted(members)):
            slots[i] = rank
    if len(groups) != N_DIGITS * len(speakers):
        raise ValueError("corpus is incomplete: not every speaker has every digit")
    return slots


# -------------------------------------------------------------- digit states

@dataclass(frozen=True)
class DigitSetup:
    bias: BiasPoint
    params: OscillatorParams
    cfg: EncodingConfig
    mask: Mask
    mode: str = "oscillator"
    noise_seed: int = 0


def utterance_states(features: FeatureMatrix, setup: DigitSetup, noise_key) -> np.ndarray:
    if setup.mode == "control":
        return control_states(features.values, setup.mask, setup.cfg).values
    if setup.mode != "oscillator":
        raise ValueError(f"mode must be 'oscillator' or 'control', got {setup.mode!r}")
    drive = encode_drive(features.values, setup.mask, setup.cfg)
    trace = simulate_envelope(drive, setup.bias, setup.params, [setup.noise_seed, *noise_key])
    return sample_nodes(trace, setup.cfg, features.n_intervals).values


def _states_job(setup, item):
    fm, key = item
    return utterance_states(fm, setup, key)


def noise_keys(corpus) -> list[tuple]:
    speakers = sorted({sig.speaker for sig in corpus})
    return [(sig.label, speakers.index(sig.speaker), sig.utterance) for sig in corpus]


def compute_features(corpus, frontend: str, jobs: int = 1) -> list[FeatureMatrix]:
    fn = partial(extract_features, frontend=frontend)
    return _map(fn, corpus, jobs)


def compute_states(features, corpus, setup: DigitSetup, jobs: int = 1) -> list[np.ndarray]:
    """Node states per utterance. Each utterance's noise seed is derived from
    its (digit, speaker, utterance) identity, so results do not depend on
    ``jobs`` or on corpus order."""
    return _map(partial(_states_job, setup), list(zip(features, noise_keys(corpus))), jobs)


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _training_block(states, labels, idx):
    S = np.hstack([states[i] for i in idx])
    Y = np.hstack([one_hot_targets(np.full(states[i].shape[1], labels[i]), N_DIGITS)
                   for i in idx])
    return S, Y


def _test_confusion(W, states, labels, test):
    confusion = np.zeros((N_DIGITS, N_DIGITS), dtype=np.int64)
    for i in test:
        confusion[labels[i], classify_word(reconstruct_outputs(W, states[i]))] += 1
    return float(np.trace(confusion) / len(test)), confusion


def evaluate_split(states, labels, slots, combo) -> tuple[float, np.ndarray]:
    """Train on utterances whose slot is in ``combo``; return test WSR and confusion."""
    combo = set(combo)
    train = [i for i in range(len(states)) if slots[i] in combo]
    test = [i for i in range(len(states)) if slots[i] not in combo]
    W = train_weights(*_training_block(states, labels, train))
    return _test_confusion(W, states, labels, test)


def evaluate_plan(states, labels, slots, plan: SplitPlan) -> TaskReport:
    """Mean and population std of the test WSR over every combination of the plan.

    Each slot's training block is QR-compressed once, so a split solves the
    pseudoinverse on at most ``n_train * rows`` columns instead of every
    training frame. The weights equal those of :func:`evaluate_split` up to
    rounding, with the rank tolerance taken from the uncompressed shape.
    """
    slots = np.asarray(slots)
    members = {k: np.flatnonzero(slots == k) for k in range(N_UTTERANCES)}
    blocks = {k: compress_columns(*_training_block(states, labels, idx))
              for k, idx in members.items() if idx.size}
    n_cols = {k: sum(states[i].shape[1] for i in idx) for k, idx in members.items()}
    n_rows = states[0].shape[0]

    rates, total = [], np.zeros((N_DIGITS, N_DIGITS), dtype=np.int64)
    for combo in plan.combinations:
        S = np.hstack([blocks[k][0] for k in combo])
        Y = np.hstack([blocks[k][1] for k in combo])
        W = train_weights(S, Y, tol_shape=(n_rows, sum(n_cols[k] for k in combo)))
        test = np.concatenate([members[k] for k in range(N_UTTERANCES) if k not in combo])
        wsr, conf = _test_confusion(W, states, labels, np.sort(test))
        rates.append(wsr)
        total += conf
    rates = np.array(rates)
    return TaskReport(word_success_rate=float(rates.mean()), wsr_std=float(rates.std()),
                      confusion=total,
                      detail=[{"combination": c, "wsr": float(r)}
                              for c, r in zip(plan.combinations, rates)])


def run_spoken_digits(corpus, frontend: str, bias: BiasPoint, params: OscillatorParams,
                      cfg: EncodingConfig, split: SplitPlan, mode: str = "oscillator",
                      mask_seed: int = 1, noise_seed: int = 0, alphabet: str = "01",
                      jobs: int = 1) -> TaskReport:
    slots = corpus_slots(corpus)
    features = compute_features(corpus, frontend, jobs)
    mask = make_mask(features[0].n_channels, cfg.n_theta, alphabet, mask_seed)
    setup = DigitSetup(bias, params, cfg, mask, mode, noise_seed)
    states = compute_states(features, corpus, setup, jobs)
    labels = np.array([sig.label for sig in corpus])
    return evaluate_plan(states, labels, slots, split)


def training_wsr(states, labels) -> float:
    """WSR when the readout is tested on its own training utterances."""
    S = np.hstack(states)
    Y = np.hstack([one_hot_targets(np.full(s.shape[1], lab), N_DIGITS)
                   for s, lab in zip(states, labels)])
    W = train_weights(S, Y)
    return float(np.mean([classify_word(reconstruct_outputs(W, s)) == lab
                          for s, lab in zip(states, labels)]))
