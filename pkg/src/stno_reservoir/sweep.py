"""Bias-condition maps: task performance and response figures of merit over (I_DC, H)."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import partial

import numpy as np
from scipy.stats import spearmanr

from .encoder import EncodingConfig, make_mask
from .oscillator import (BiasPoint, DriveWaveform, EnvelopeTrace, OscillatorParams,
                         simulate_envelope, steady_state_amplitude, threshold_current)
from .tasks import _map, generate_sine_square, sine_square_trial


@dataclass(frozen=True)
class BiasGrid:
    currents: np.ndarray = dc_field(default_factory=lambda: np.linspace(5.0, 8.0, 13))
    fields: np.ndarray = dc_field(default_factory=lambda: np.linspace(250.0, 550.0, 13))

    def __post_init__(self):
        for name in ("currents", "fields"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.ndim != 1 or axis.size == 0 or np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} must be a non-empty strictly increasing sequence")
            object.__setattr__(self, name, axis)

    @property
    def shape(self) -> tuple[int, int]:
        return self.fields.size, self.currents.size

    def points(self):
        """(field index, current index, BiasPoint), field-major."""
        return [(j, i, BiasPoint(float(c), float(h)))
                for j, h in enumerate(self.fields) for i, c in enumerate(self.currents)]


@dataclass(frozen=True)
class SweepCell:
    bias: BiasPoint
    v_up: float
    v_dw: float
    delta_v: float
    rms: float
    errors: int

    @property
    def fom_amp(self) -> float:
        return self.v_up * self.v_dw

    @property
    def fom_noise(self) -> float:
        return 1.0 / self.delta_v if self.delta_v > 0 else float("inf")

    @property
    def fom_total(self) -> float:
        return self.fom_amp / self.delta_v if self.delta_v > 0 else float("inf")


def extract_response_extremes(trace: EnvelopeTrace, baseline: float) -> tuple[float, float]:
    v = np.asarray(getattr(trace, "samples", trace), dtype=float)
    if v.size == 0:
        raise ValueError("empty trace")
    return max(0.0, float(v.max() - baseline)), max(0.0, float(baseline - v.min()))


def extract_noise(trace: EnvelopeTrace, params: OscillatorParams) -> float:
    """Sample std of a constant-bias trace after dropping the first ``5 tau_relax``."""
    duration = trace.dt * len(trace)
    if duration < 50 * params.tau_noise:
        raise ValueError(f"trace of {duration:g} ns is shorter than 50 tau_noise "
                         f"= {50 * params.tau_noise:g} ns")
    skip = int(np.ceil(5 * params.tau_relax / trace.dt))
    kept = trace.samples[skip:]
    if kept.size < 2:
        raise ValueError("nothing left after discarding the transient")
    return float(np.std(kept, ddof=1))


@dataclass(frozen=True)
class SweepSetup:
    """Everything a cell needs. The mask is fixed across the grid."""
    params: OscillatorParams
    cfg: EncodingConfig
    mask_seed: int = 1
    label_seed: int = 0
    noise_seed: int = 0
    n_waveforms: int = 160
    alphabet: str = "pm1"
    noise_duration: float = 20_000.0
    noise_dt: float = 2.0


def measure_cell(setup: SweepSetup, point) -> SweepCell:
    j, i, bias = point
    seq = generate_sine_square(setup.label_seed, setup.n_waveforms)
    mask = make_mask(1, setup.cfg.n_theta, setup.alphabet, setup.mask_seed)
    report, trace = sine_square_trial(bias, setup.params, setup.cfg, seq, mask,
                                      seed=[setup.noise_seed, j, i, 0])
    v_up, v_dw = extract_response_extremes(trace, steady_state_amplitude(bias, setup.params))
    n = int(round(setup.noise_duration / setup.noise_dt))
    quiet = simulate_envelope(DriveWaveform(np.zeros(n), setup.noise_dt), bias, setup.params,
                              seed=[setup.noise_seed, j, i, 1])
    return SweepCell(bias, v_up, v_dw, extract_noise(quiet, setup.params),
                     report.rms_deviation, report.errors)


def run_sweep(grid: BiasGrid, setup: SweepSetup, jobs: int = 1) -> list[SweepCell]:
    """One cell per grid point, field-major. Noise seeds are keyed on grid
    indices, so results do not depend on ``jobs``."""
    return _map(partial(measure_cell, setup), grid.points(), jobs)


def cell_maps(cells, grid: BiasGrid) -> dict[str, np.ndarray]:
    """``fields x currents`` arrays of every per-cell quantity."""
    names = ("rms", "errors", "v_up", "v_dw", "delta_v", "fom_amp", "fom_noise", "fom_total")
    maps = {k: np.array([getattr(c, k) for c in cells], dtype=float).reshape(grid.shape)
            for k in names}
    return maps


def fom_performance_correlation(cells) -> float:
    """Spearman rank correlation between fom_total and 1 - rms."""
    fom = np.array([c.fom_total for c in cells])
    perf = 1.0 - np.array([c.rms for c in cells])
    return float(spearmanr(fom, perf).statistic)


def threshold_contour(grid: BiasGrid, params: OscillatorParams) -> np.ndarray:
    return np.asarray(threshold_current(grid.fields, params), dtype=float)
