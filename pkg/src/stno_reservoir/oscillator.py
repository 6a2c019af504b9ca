"""Phenomenological amplitude model of a vortex spin-torque nano-oscillator.

Only the slowly varying amplitude envelope is modelled. The steady-state
amplitude follows a square-root law above a field-dependent threshold
current. The oscillation power relaxes toward its steady state through a
logistic law seeded by a small thermal power, so small deviations decay with
``tau_relax`` at any bias while regrowth from near-zero amplitude is slow.
An Ornstein-Uhlenbeck amplitude noise whose strength peaks just above
threshold is superimposed.

Units throughout: current in mA, field in mT, time in ns, amplitude in mV.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.signal import lfilter


@dataclass(frozen=True)
class BiasPoint:
    i_dc: float
    field: float

    def __post_init__(self):
        if not self.i_dc >= 0:
            raise ValueError(f"i_dc must be >= 0 mA, got {self.i_dc}")
        if not self.field > 0:
            raise ValueError(f"field must be > 0 mT, got {self.field}")


@dataclass(frozen=True)
class OscillatorParams:
    i_th_ref: float = 4.5
    field_ref: float = 430.0
    alpha_th: float = 0.4
    gain_ref: float = 12.0
    beta_gain: float = 0.3
    tau_relax: float = 500.0
    sigma_floor: float = 0.05
    sigma_peak: float = 0.5
    i_width: float = 0.3
    tau_noise: float = 50.0
    v_sat: float = 40.0
    p_thermal: float = 0.1  # mV^2, thermal power seeding regrowth from zero amplitude

    def __post_init__(self):
        for name in ("tau_relax", "tau_noise", "i_width", "v_sat", "field_ref", "p_thermal"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("gain_ref", "sigma_floor", "sigma_peak", "i_th_ref"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    def noiseless(self) -> "OscillatorParams":
        from dataclasses import replace
        return replace(self, sigma_floor=0.0, sigma_peak=0.0)


@dataclass(frozen=True)
class DriveWaveform:
    """Current offset added to ``BiasPoint.i_dc``, uniformly sampled."""
    samples: np.ndarray = dc_field(repr=False)
    dt: float = 5.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("drive must be a non-empty 1-D sequence")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0 ns, got {self.dt}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size * self.dt


@dataclass(frozen=True)
class EnvelopeTrace:
    """Amplitude samples; sample ``n`` is the envelope at time ``(n + 1) * dt``,
    i.e. at the end of drive sample ``n``."""
    samples: np.ndarray = dc_field(repr=False)
    dt: float = 5.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("trace must be a non-empty 1-D sequence")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0 ns, got {self.dt}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, self.samples.size + 1)


def threshold_current(field, params: OscillatorParams):
    """Threshold current (mA) at ``field`` (mT); affine in field, floored at 0."""
    field = np.asarray(field, dtype=float)
    if np.any(field <= 0):
        raise ValueError("field must be > 0 mT")
    rel = (field - params.field_ref) / params.field_ref
    out = np.maximum(params.i_th_ref * (1.0 + params.alpha_th * rel), 0.0)
    return out if out.ndim else float(out)


def gain(field, params: OscillatorParams):
    """Square-root-law gain k(H) in mV/sqrt(mA); decreases with field for beta_gain > 0."""
    field = np.asarray(field, dtype=float)
    rel = (field - params.field_ref) / params.field_ref
    out = np.maximum(params.gain_ref * (1.0 - params.beta_gain * rel), 0.0)
    return out if out.ndim else float(out)


def _ss_amplitude(current, field, params):
    current = np.asarray(current, dtype=float)
    excess = np.maximum(current - threshold_current(field, params), 0.0)
    return np.minimum(params.v_sat, gain(field, params) * np.sqrt(excess))


def steady_state_amplitude(bias: BiasPoint, params: OscillatorParams) -> float:
    return float(_ss_amplitude(bias.i_dc, bias.field, params))


def noise_std(bias: BiasPoint, params: OscillatorParams) -> float:
    """Stationary amplitude-noise std (mV): a floor plus a Lorentzian peak
    sitting just above the threshold current."""
    excess = bias.i_dc - threshold_current(bias.field, params)
    if excess <= 0:
        return params.sigma_floor
    return params.sigma_floor + params.sigma_peak / (1.0 + (excess / params.i_width) ** 2)


def _cascade_variance_factor(dt, tau_noise, tau_relax):
    # Stationary var of x[n+1] = b x[n] + (1-b) eta[n] for unit-variance AR(1) eta
    # with coefficient a: (1-b)(1+ab) / ((1+b)(1-ab)).
    a = np.exp(-dt / tau_noise)
    b = 1.0 - dt / tau_relax
    return (1.0 - b) * (1.0 + a * b) / ((1.0 + b) * (1.0 - a * b))


def amplitude_noise(n: int, dt: float, sigma: float, params: OscillatorParams,
                    seed=0) -> np.ndarray:
    """Zero-mean envelope fluctuation with stationary std ``sigma``.

    An Ornstein-Uhlenbeck source (correlation ``tau_noise``) low-passed by the
    relaxation ``tau_relax dx/dt = -x + eta``, both started stationary.
    """
    if sigma <= 0:
        return np.zeros(n)
    a = np.exp(-dt / params.tau_noise)
    b = 1.0 - dt / params.tau_relax
    var_x = _cascade_variance_factor(dt, params.tau_noise, params.tau_relax)
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal(n + 1)
    # eta[0] is stationary and concurrent with the initial state x0, which is
    # drawn from its stationary law conditioned on eta[0]
    kicks = draws[:n].copy()
    kicks[1:] *= np.sqrt(1.0 - a * a)
    eta = lfilter([1.0], [1.0, -a], kicks)
    cov = (1.0 - b) * a / (1.0 - a * b)
    x0 = cov * eta[0] + np.sqrt(max(var_x - cov ** 2, 0.0)) * draws[n]
    x, _ = lfilter([1.0 - b], [1.0, -b], eta, zi=[b * x0])
    x *= sigma / np.sqrt(var_x)
    return x


def simulate_envelope(drive: DriveWaveform, bias: BiasPoint, params: OscillatorParams,
                      seed=0) -> EnvelopeTrace:
    """Integrate the envelope by explicit Euler steps of size ``drive.dt``.

    With ``p = V**2`` and ``s = p_thermal`` the deterministic part obeys
    ``tau_relax d/dt [1/(p+s)] = 1/(p_ss(I)+s) - 1/(p+s)`` where
    ``p_ss(I) = V_ss(I, H)**2``. Its fixed point is the square-root law, and
    the linearised relaxation time is ``tau_relax`` at every current. The
    trace starts at the steady state of ``bias``. An Ornstein-Uhlenbeck
    fluctuation with stationary std ``noise_std(bias)`` is added, and the
    result is clamped to ``[0, v_sat]``. ``seed`` is anything
    ``numpy.random.default_rng`` accepts (an int or a sequence of ints).
    """
    dt = drive.dt
    if dt > params.tau_relax / 20:
        raise ValueError(
            f"drive dt={dt} ns too coarse for tau_relax={params.tau_relax} ns (need dt <= tau_relax/20)")
    s = params.p_thermal
    current = bias.i_dc + drive.samples
    target = 1.0 / (_ss_amplitude(current, bias.field, params) ** 2 + s)
    w0 = 1.0 / (steady_state_amplitude(bias, params) ** 2 + s)

    b = 1.0 - dt / params.tau_relax
    w, _ = lfilter([1.0 - b], [1.0, -b], target, zi=[b * w0])
    v = np.sqrt(np.maximum(1.0 / w - s, 0.0))
    v += amplitude_noise(v.size, dt, noise_std(bias, params), params, seed)
    np.clip(v, 0.0, params.v_sat, out=v)
    return EnvelopeTrace(v, dt)
