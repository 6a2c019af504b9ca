"""Fast self-checks shared by ``stno-reservoir validate`` and the test suite.

Each check returns a ``Check`` with a boolean outcome and a short detail
string. Oracles here are deliberately computed by a different route than the
code under test (``lstsq`` vs SVD pseudoinverse, brute-force counting vs
``itertools.combinations``, curve fitting vs the integrator).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.optimize import curve_fit

from .oscillator import (BiasPoint, DriveWaveform, OscillatorParams, _ss_amplitude, gain,
                         simulate_envelope, steady_state_amplitude, threshold_current)
from .readout import train_weights
from .tasks import enumerate_splits


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}"


def r_squared(x, y) -> float:
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    return 1.0 - np.sum(resid ** 2) / np.sum((y - y.mean()) ** 2)


def check_square_root_law(params: OscillatorParams = OscillatorParams(), field: float = 430.0,
                          n: int = 50) -> Check:
    i_th = threshold_current(field, params)
    # stay below saturation: V < v_sat  <=>  I - I_th < (v_sat / k)^2
    i_sat = i_th + (params.v_sat / gain(field, params)) ** 2
    currents = np.linspace(i_th, min(i_th + 4.0, i_sat), n + 1)[1:]
    v = _ss_amplitude(currents, field, params)
    r2 = r_squared(currents, v ** 2)
    at_th = steady_state_amplitude(BiasPoint(i_th, field), params)
    ok = r2 > 0.9999 and at_th == 0.0
    return Check("square-root law", bool(ok), f"R^2={r2:.8f} V(I_th)={at_th}")


def step_response(params: OscillatorParams, bias: BiasPoint, step: float, dt: float = 5.0,
                  duration: float = 10_000.0, step_at: float = 1_000.0):
    n = int(round(duration / dt))
    k0 = int(round(step_at / dt))
    drive = np.zeros(n)
    drive[k0:] = step
    trace = simulate_envelope(DriveWaveform(drive, dt), bias, params.noiseless())
    return trace.times[k0:] - k0 * dt, trace.samples[k0:]


def fit_exponential(t, v) -> float:
    def model(t, v_inf, a, tau):
        return v_inf + a * np.exp(-t / tau)
    p0 = [v[-1], v[0] - v[-1], 0.2 * t[-1]]
    (_, _, tau), _ = curve_fit(model, t, v, p0=p0, maxfev=20_000)
    return float(tau)


def check_relaxation(params: OscillatorParams = OscillatorParams(),
                     bias: BiasPoint = BiasPoint(7.0, 430.0), step: float = 0.1,
                     dt: float = 5.0) -> Check:
    t, v = step_response(params, bias, step, dt)
    tau = fit_exponential(t, v)
    err = abs(tau - params.tau_relax) / params.tau_relax
    return Check("relaxation time", bool(err < 0.02),
                 f"fitted tau={tau:.2f} ns vs {params.tau_relax:g} ns ({100 * err:.2f} %)")


def random_instance(rng, max_rows: int = 50, max_cols: int = 200):
    rows = int(rng.integers(2, max_rows + 1))
    cols = int(rng.integers(2, max_cols + 1))
    rank = int(rng.integers(1, min(rows, cols) + 1))
    S = rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
    Y = rng.standard_normal((int(rng.integers(1, 11)), cols))
    return S, Y


def check_pseudoinverse(n_instances: int = 20, n_perturb: int = 100, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    worst, beaten = 0.0, 0
    for k in range(n_instances):
        S, Y = random_instance(rng)
        if k == 0:
            S = rng.standard_normal((50, 200))      # full size, full rank
            Y = rng.standard_normal((10, 200))
        elif k == 1:
            S = np.vstack([S[:1]] * S.shape[0])     # rank one
        W = train_weights(S, Y).values
        res = np.linalg.norm(W @ S - Y)
        oracle = np.linalg.lstsq(S.T, Y.T, rcond=None)[0].T
        res_o = np.linalg.norm(oracle @ S - Y)
        worst = max(worst, abs(res - res_o) / max(res_o, np.linalg.norm(Y)))
        scale = np.linalg.norm(W) / np.sqrt(W.size) + 1e-3
        for _ in range(n_perturb):
            Wp = W + 1e-3 * scale * rng.standard_normal(W.shape)
            if np.linalg.norm(Wp @ S - Y) < res * (1 - 1e-12):
                beaten += 1
    ok = worst < 1e-8 and beaten == 0
    return Check("pseudoinverse optimality", bool(ok),
                 f"max rel residual gap={worst:.2e}, better perturbations={beaten}")


def brute_force_count(n_train: int, n: int = 10) -> int:
    return sum(1 for bits in product((0, 1), repeat=n) if sum(bits) == n_train)


def check_split_counts() -> Check:
    counts = [len(enumerate_splits(k)) for k in range(1, 10)]
    brute = [brute_force_count(k) for k in range(1, 10)]
    binom = [math.comb(10, k) for k in range(1, 10)]
    return Check("split counts", counts == brute == binom, f"{counts}")


def all_checks(params: OscillatorParams = OscillatorParams()) -> list[Check]:
    return [check_square_root_law(params), check_relaxation(params),
            check_pseudoinverse(), check_split_counts()]
