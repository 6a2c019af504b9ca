"""Audio ingestion and the two frequency-channel frontends.

Both frontends return an ``N_f x N_tau`` matrix of nonnegative channel
energies, max-normalised per utterance. The spectrogram is a Hann-windowed
short-time Fourier magnitude; the cochlear-style frontend is a log-spaced
gammatone bank followed by half-wave rectification and block-mean smoothing.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import gammatone, get_window, resample_poly, sosfilt, tf2sos

SAMPLE_RATE = 12_500.0
MANIFEST_COLUMNS = ("file", "digit", "speaker", "utterance")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class AudioSignal:
    samples: np.ndarray = dc_field(repr=False)
    sample_rate: float = SAMPLE_RATE
    label: int = 0
    speaker: str = ""
    utterance: int = 1

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("audio must be a non-empty 1-D sequence")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.label not in range(10):
            raise ValueError(f"label must be a digit 0-9, got {self.label}")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class FeatureMatrix:
    values: np.ndarray = dc_field(repr=False)
    frontend: str = ""

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_intervals(self) -> int:
        return self.values.shape[1]


# --------------------------------------------------------------------- corpus

def _peak_normalise(x: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(x))
    return x / peak if peak > 0 else x


def resample(x: np.ndarray, rate_in: float, rate_out: float = SAMPLE_RATE) -> np.ndarray:
    if rate_in == rate_out:
        return np.asarray(x, dtype=float)
    ratio = Fraction(rate_out / rate_in).limit_denominator(10_000)
    return resample_poly(np.asarray(x, dtype=float), ratio.numerator, ratio.denominator)


def read_wav(path, sample_rate: float = SAMPLE_RATE) -> np.ndarray:
    """Mono PCM WAV -> float samples at ``sample_rate``, peak-normalised to 1."""
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except Exception as exc:  # scipy raises several unrelated types
        raise CorpusError(f"{path}: unreadable WAV ({exc})") from exc
    if data.ndim != 1:
        raise CorpusError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.size == 0:
        raise CorpusError(f"{path}: no samples")
    if np.issubdtype(data.dtype, np.integer):
        data = data.astype(float) / np.iinfo(data.dtype).max
    return _peak_normalise(resample(data.astype(float), float(rate), sample_rate))


def load_corpus(root, manifest: str = "manifest.csv", n_utterances: int | None = 10,
                sample_rate: float = SAMPLE_RATE) -> list[AudioSignal]:
    """Load every WAV listed in ``root/manifest``.

    If ``n_utterances`` is set, each (digit, speaker) keeps its lowest
    ``n_utterances`` utterance indices, and fewer than that is an error.
    Signals are returned sorted by (digit, speaker, utterance).
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"{root}: not a directory")
    wavs = sorted(p.name for p in root.glob("*.wav"))
    mpath = root / manifest
    if not wavs and not mpath.exists():
        raise CorpusError(f"{root}: empty corpus (no WAV files, no manifest)")
    if not mpath.exists():
        raise CorpusError(f"{mpath}: manifest not found")

    with open(mpath, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(MANIFEST_COLUMNS) - set(reader.fieldnames):
            raise CorpusError(f"{mpath}: header must contain {','.join(MANIFEST_COLUMNS)}")
        rows = list(reader)
    if not rows:
        raise CorpusError(f"{mpath}: empty corpus")

    listed = {r["file"] for r in rows}
    missing = sorted(f for f in listed if not (root / f).is_file())
    if missing:
        raise CorpusError(f"{mpath}: listed files not found: {missing[:5]}")
    unlisted = sorted(set(wavs) - listed)
    if unlisted:
        raise CorpusError(f"{mpath}: WAV files missing from manifest: {unlisted[:5]}")

    entries = {}
    for r in rows:
        try:
            key = (int(r["digit"]), str(r["speaker"]), int(r["utterance"]))
        except ValueError as exc:
            raise CorpusError(f"{mpath}: bad row {r}") from exc
        if key in entries:
            raise CorpusError(f"{mpath}: duplicate entry {key}")
        entries[key] = r["file"]

    if n_utterances is not None:
        groups: dict = {}
        for d, s, u in entries:
            groups.setdefault((d, s), []).append(u)
        keep = set()
        for (d, s), us in groups.items():
            if len(us) < n_utterances:
                raise CorpusError(f"digit {d} speaker {s}: {len(us)} utterances, need {n_utterances}")
            keep.update((d, s, u) for u in sorted(us)[:n_utterances])
        entries = {k: v for k, v in entries.items() if k in keep}

    out = []
    for (d, s, u) in sorted(entries):
        x = read_wav(root / entries[(d, s, u)], sample_rate)
        out.append(AudioSignal(x, sample_rate, d, s, u))
    return out


def write_corpus(signals, root, manifest: str = "manifest.csv") -> Path:
    """Write signals as 16-bit PCM WAVs plus a manifest that ``load_corpus`` reads back."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / manifest, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(MANIFEST_COLUMNS)
        for sig in signals:
            name = f"{sig.label}_{sig.speaker}_{sig.utterance:02d}.wav"
            pcm = np.round(np.clip(sig.samples, -1.0, 1.0) * 32767).astype(np.int16)
            wavfile.write(root / name, int(round(sig.sample_rate)), pcm)
            w.writerow([name, sig.label, sig.speaker, sig.utterance])
    return root / manifest


# ------------------------------------------------------------------ frontends

def n_windows(n_samples: int, hop: int) -> int:
    return math.ceil(n_samples / hop)


def _normalise(values: np.ndarray, normalize: bool) -> np.ndarray:
    if normalize:
        peak = values.max()
        if peak > 0:
            values = values / peak
    return values


def spectrogram_features(audio: AudioSignal, n_channels: int = 65, hop: int | None = None,
                         normalize: bool = True) -> FeatureMatrix:
    """Hann-windowed STFT magnitude with ``2 (n_channels - 1)``-sample windows.

    Frame ``k`` is centred on sample ``k * hop`` (default hop: half a window)
    with zero padding at both ends, giving ``ceil(n / hop)`` frames.
    """
    if n_channels < 2:
        raise ValueError("n_channels must be >= 2")
    win = 2 * (n_channels - 1)
    hop = win // 2 if hop is None else int(hop)
    if hop < 1:
        raise ValueError("hop must be >= 1")
    x = audio.samples
    if x.size < win:
        raise ValueError(f"audio of {x.size} samples is shorter than one {win}-sample window")
    n_tau = n_windows(x.size, hop)
    padded = np.zeros((n_tau - 1) * hop + win)
    padded[win // 2: win // 2 + x.size] = x[: padded.size - win // 2]
    frames = np.lib.stride_tricks.sliding_window_view(padded, win)[::hop][:n_tau]
    mag = np.abs(np.fft.rfft(frames * get_window("hann", win), axis=1)).T
    return FeatureMatrix(_normalise(mag, normalize), "spectrogram")


def log_centres(f_lo: float, f_hi: float, n: int) -> np.ndarray:
    return np.geomspace(f_lo, f_hi, n)


def cochlear_features(audio: AudioSignal, n_channels: int = 78, hop: int = 104,
                      f_lo: float = 100.0, f_hi: float = 5000.0, compress: float = 1.0,
                      normalize: bool = True) -> FeatureMatrix:
    """Gammatone bank on a log axis, half-wave rectified and block-averaged.

    Each channel output is rectified, raised to ``compress`` (1 = linear,
    < 1 = compressive) and averaged over consecutive ``hop``-sample blocks,
    the last block zero-padded, giving ``ceil(n / hop)`` columns.
    """
    fs = audio.sample_rate
    if not 0 < f_lo < f_hi < fs / 2:
        raise ValueError(f"need 0 < f_lo < f_hi < fs/2, got {f_lo}, {f_hi}, fs={fs}")
    if not compress > 0:
        raise ValueError("compress must be > 0")
    x = audio.samples
    if x.size < hop:
        raise ValueError(f"audio of {x.size} samples is shorter than one {hop}-sample block")
    n_tau = n_windows(x.size, hop)
    out = np.empty((n_channels, n_tau))
    buf = np.zeros(n_tau * hop)
    for c, fc in enumerate(log_centres(f_lo, f_hi, n_channels)):
        # second-order sections: the 8th-order transfer function is ill-conditioned at low fc
        y = np.maximum(sosfilt(tf2sos(*gammatone(fc, "iir", fs=fs)), x), 0.0)
        if compress != 1.0:
            y = y ** compress
        buf[:x.size] = y
        out[c] = buf.reshape(n_tau, hop).mean(axis=1)
    return FeatureMatrix(_normalise(out, normalize), "cochlear")


FRONTENDS = {"spectrogram": spectrogram_features, "cochlear": cochlear_features}


def extract_features(audio: AudioSignal, frontend: str, **kw) -> FeatureMatrix:
    if frontend not in FRONTENDS:
        raise ValueError(f"unknown frontend {frontend!r}; choose from {sorted(FRONTENDS)}")
    return FRONTENDS[frontend](audio, **kw)


def save_features(fm: FeatureMatrix, path) -> None:
    """Delimited text with a first line ``N_f,N_tau``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{fm.n_channels},{fm.n_intervals}\n")
        np.savetxt(fh, fm.values, delimiter=",", fmt="%.17g")


def load_features(path, frontend: str = "") -> FeatureMatrix:
    with open(path, encoding="utf-8") as fh:
        n_f, n_tau = (int(v) for v in fh.readline().split(","))
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    if values.shape != (n_f, n_tau):
        raise ValueError(f"{path}: header says {n_f}x{n_tau}, body is {values.shape}")
    return FeatureMatrix(values, frontend)
