"""Time multiplexing: binary masks, drive encoding, and virtual-node sampling."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .oscillator import DriveWaveform, EnvelopeTrace

PRNG_NAME = "numpy.PCG64"

ALPHABETS = {
    "01": np.array([0.0, 1.0]),
    "pm1": np.array([-1.0, 1.0]),
}


@dataclass(frozen=True)
class Mask:
    values: np.ndarray = dc_field(repr=False)
    seed: int = 0
    alphabet: str = "01"
    prng: str = PRNG_NAME

    @property
    def n_f(self) -> int:
        return self.values.shape[0]

    @property
    def n_theta(self) -> int:
        return self.values.shape[1]

    def record(self) -> dict:
        """The persisted form of a mask; ``make_mask(**...)`` rebuilds it bit-exactly."""
        return {"seed": self.seed, "n_f": self.n_f, "n_theta": self.n_theta,
                "alphabet": self.alphabet, "prng": self.prng}

    @classmethod
    def from_record(cls, record: dict) -> "Mask":
        if record.get("prng", PRNG_NAME) != PRNG_NAME:
            raise ValueError(f"unsupported PRNG {record['prng']!r}, expected {PRNG_NAME!r}")
        return make_mask(record["n_f"], record["n_theta"], record["alphabet"], record["seed"])


@dataclass(frozen=True)
class EncodingConfig:
    n_theta: int = 400
    theta: float = 100.0
    samples_per_theta: int = 20
    i_pp: float = 6.0
    oversample: int = 1
    v_in_pp: float = 500.0

    def __post_init__(self):
        if self.n_theta < 1:
            raise ValueError("n_theta must be >= 1")
        if self.samples_per_theta < 1:
            raise ValueError("samples_per_theta must be >= 1")
        if not 1 <= self.oversample <= self.samples_per_theta:
            raise ValueError("oversample must lie in [1, samples_per_theta]")
        if not self.theta > 0 or not self.i_pp >= 0:
            raise ValueError("theta must be > 0 and i_pp >= 0")

    @property
    def dt(self) -> float:
        return self.theta / self.samples_per_theta

    @property
    def tau(self) -> float:
        return self.n_theta * self.theta

    @property
    def n_rows(self) -> int:
        return self.n_theta * self.oversample + 1


@dataclass
class NodeStateMatrix:
    """Sampled virtual-node states, ``(n_theta * oversample + 1) x n_tau``.

    The last row is the constant bias row.
    """
    values: np.ndarray = dc_field(repr=False)
    label: int | None = None

    @property
    def n_tau(self) -> int:
        return self.values.shape[1]


def make_mask(n_f: int, n_theta: int, alphabet: str = "01", seed: int = 0) -> Mask:
    if n_f < 1 or n_theta < 1:
        raise ValueError("mask dimensions must be >= 1")
    if alphabet not in ALPHABETS:
        raise ValueError(f"unknown alphabet {alphabet!r}; choose from {sorted(ALPHABETS)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.integers(0, 2, size=(n_f, n_theta))
    return Mask(ALPHABETS[alphabet][draws], int(seed), alphabet)


def masked_inputs(features: np.ndarray, mask: Mask, i_pp: float) -> np.ndarray:
    """Masked values, ``n_tau x n_theta``, rescaled to span ``i_pp`` centred on 0."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.shape[0] != mask.n_f:
        raise ValueError(f"features have {features.shape[0]} channels, mask expects {mask.n_f}")
    m = features.T @ mask.values
    lo, hi = m.min(), m.max()
    if hi == lo:
        return np.zeros_like(m)
    return (m - 0.5 * (lo + hi)) * (i_pp / (hi - lo))


def encode_drive(features, mask: Mask, cfg: EncodingConfig) -> DriveWaveform:
    m = masked_inputs(_as_array(features), mask, cfg.i_pp)
    return DriveWaveform(np.repeat(m.ravel(), cfg.samples_per_theta), cfg.dt)


def _sample_times(cfg: EncodingConfig, n_tau: int, align_offset: float) -> np.ndarray:
    # times (ns) at which each (slot, k) is read, shape (n_tau * n_theta, oversample)
    slots = np.arange(n_tau * cfg.n_theta)
    ks = np.arange(cfg.oversample - 1, -1, -1)
    return cfg.theta * (slots[:, None] + 1) - ks[None, :] * cfg.dt + align_offset


def sample_nodes(trace: EnvelopeTrace, cfg: EncodingConfig, n_tau: int,
                 align_offset: float = 0.0, label: int | None = None) -> NodeStateMatrix:
    """Read ``oversample`` points from the end of each theta slot of the trace."""
    if abs(align_offset) > cfg.theta:
        raise ValueError(f"|align_offset|={abs(align_offset)} ns exceeds theta={cfg.theta} ns")
    if not np.isclose(trace.dt, cfg.dt):
        raise ValueError(f"trace dt={trace.dt} does not match encoding dt={cfg.dt}")
    times = _sample_times(cfg, n_tau, align_offset)
    t_first, t_last = trace.dt, trace.dt * len(trace)
    if times.min() < t_first - 1e-9 or times.max() > t_last + 1e-9:
        raise ValueError(
            f"trace of {t_last:g} ns cannot cover {n_tau} intervals of {cfg.tau:g} ns "
            f"with align_offset={align_offset:g} ns")

    pos = times / trace.dt - 1.0
    idx = np.rint(pos)
    if np.allclose(pos, idx, atol=1e-9):
        picked = trace.samples[idx.astype(np.int64)]
    else:
        picked = np.interp(times, trace.times, trace.samples)
    return NodeStateMatrix(_assemble(picked, cfg, n_tau), label)


def _assemble(picked: np.ndarray, cfg: EncodingConfig, n_tau: int) -> np.ndarray:
    # (n_tau * n_theta, oversample) -> rows ordered neuron-major, oversample-minor
    body = picked.reshape(n_tau, cfg.n_theta * cfg.oversample).T
    return np.vstack([body, np.ones((1, n_tau))])


def control_states(features, mask: Mask, cfg: EncodingConfig,
                   label: int | None = None) -> NodeStateMatrix:
    """Masked inputs fed straight to the readout, bypassing the oscillator."""
    m = masked_inputs(_as_array(features), mask, cfg.i_pp)
    n_tau = m.shape[0]
    picked = np.repeat(m.reshape(-1, 1), cfg.oversample, axis=1)
    return NodeStateMatrix(_assemble(picked, cfg, n_tau), label)


def _as_array(features) -> np.ndarray:
    return np.asarray(getattr(features, "values", features), dtype=float)
