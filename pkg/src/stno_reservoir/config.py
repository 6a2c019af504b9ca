"""Experiment configuration: nested dataclasses loaded from YAML.

Unknown keys are rejected at every level, and every block re-runs its own
validation on construction. ``config_hash`` is the sha256 of the canonical
JSON form, so two configs with equal content hash equally regardless of key
order or file formatting.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .encoder import ALPHABETS, EncodingConfig
from .oscillator import BiasPoint, OscillatorParams

CONFIG_ENV = "STNO_RESERVOIR_CONFIG"
FRONTEND_NAMES = ("spectrogram", "cochlear")
MODE_NAMES = ("oscillator", "control")


class ConfigError(ValueError):
    pass


def _check_alphabet(name):
    if name not in ALPHABETS:
        raise ConfigError(f"alphabet must be one of {sorted(ALPHABETS)}, got {name!r}")


def _subset(key, values, allowed):
    bad = [v for v in values if v not in allowed]
    if not values or bad:
        raise ConfigError(f"{key} must be a non-empty subset of {allowed}, got {list(values)}")


@dataclass(frozen=True)
class Seeds:
    mask: int = 1
    noise: int = 0
    corpus: int = 0
    labels: int = 0


@dataclass(frozen=True)
class DigitsConfig:
    bias: BiasPoint = BiasPoint(6.0, 430.0)
    encoding: EncodingConfig = EncodingConfig()
    alphabet: str = "01"
    frontends: tuple = FRONTEND_NAMES
    modes: tuple = MODE_NAMES
    n_train: tuple = tuple(range(1, 10))
    sample_rate: float = 12_500.0

    def __post_init__(self):
        _check_alphabet(self.alphabet)
        _subset("frontends", self.frontends, FRONTEND_NAMES)
        _subset("modes", self.modes, MODE_NAMES)
        if not self.n_train or any(not 1 <= n <= 9 for n in self.n_train):
            raise ConfigError("digits.n_train entries must lie in 1..9")


@dataclass(frozen=True)
class SineSquareConfig:
    bias: BiasPoint = BiasPoint(7.0, 430.0)
    encoding: EncodingConfig = EncodingConfig(
        n_theta=24, samples_per_theta=50, i_pp=5.0, oversample=5)
    alphabet: str = "pm1"
    n_waveforms: int = 160
    target_shift: int = 0
    n_noise_seeds: int = 5
    mask_candidates: int = 8

    def __post_init__(self):
        _check_alphabet(self.alphabet)
        if self.n_waveforms < 2 or self.n_waveforms % 2:
            raise ConfigError("sinesquare.n_waveforms must be an even number >= 2")
        if not -2 <= self.target_shift <= 2:
            raise ConfigError("sinesquare.target_shift must lie in -2..2")
        if self.mask_candidates < 1:
            raise ConfigError("sinesquare.mask_candidates must be >= 1")
        if self.n_noise_seeds < 1:
            raise ConfigError("sinesquare.n_noise_seeds must be >= 1")


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    num: int

    def __post_init__(self):
        if self.num < 1 or (self.num > 1 and not self.stop > self.start):
            raise ConfigError(f"axis needs num >= 1 and stop > start, got {self}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


@dataclass(frozen=True)
class SweepConfig:
    currents: Axis = Axis(5.0, 8.0, 13)
    fields: Axis = Axis(250.0, 550.0, 13)
    noise_duration: float = 20_000.0
    noise_dt: float = 2.0

    def __post_init__(self):
        if not self.noise_duration > 0 or not self.noise_dt > 0:
            raise ConfigError("sweep durations must be > 0")


PROBES = ("constant", "step", "mask")


@dataclass(frozen=True)
class SimulateConfig:
    bias: BiasPoint = BiasPoint(7.0, 430.0)
    probe: str = "step"
    dt: float = 5.0
    duration: float = 10_000.0
    step_at: float = 1_000.0
    step_size: float = 0.1

    def __post_init__(self):
        if self.probe not in PROBES:
            raise ConfigError(f"simulate.probe must be one of {PROBES}, got {self.probe!r}")
        if not self.dt > 0 or not self.duration >= self.dt:
            raise ConfigError("simulate needs dt > 0 and duration >= dt")
        if not 0 <= self.step_at < self.duration:
            raise ConfigError("simulate.step_at must lie inside the run")


@dataclass(frozen=True)
class PathsConfig:
    corpus_root: str | None = None
    manifest: str = "manifest.csv"
    out_dir: str = "out"


@dataclass(frozen=True)
class ExperimentConfig:
    oscillator: OscillatorParams = OscillatorParams()
    digits: DigitsConfig = DigitsConfig()
    sinesquare: SineSquareConfig = SineSquareConfig()
    sweep: SweepConfig = SweepConfig()
    simulate: SimulateConfig = SimulateConfig()
    paths: PathsConfig = PathsConfig()
    seeds: Seeds = Seeds()

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def with_seed(self, master: int) -> "ExperimentConfig":
        """Replace every named seed by ``master`` plus a fixed per-role offset."""
        return dataclasses.replace(self, seeds=Seeds(mask=master + 1, noise=master,
                                                     corpus=master, labels=master))


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _build(cls, data, where: str):
    if dataclasses.is_dataclass(data):
        return data
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")
    defaults = cls() if all(f.default is not dataclasses.MISSING for f in fields.values()) else None
    kwargs: dict[str, Any] = {}
    for name, value in data.items():
        default = getattr(defaults, name, None)
        if dataclasses.is_dataclass(default):
            sub = dataclasses.asdict(default)
            if isinstance(value, dict):
                sub.update(value)
                value = sub
            kwargs[name] = _build(type(default), value, f"{where}.{name}")
        elif isinstance(default, tuple):
            kwargs[name] = tuple(value) if isinstance(value, (list, tuple)) else (value,)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: dict | None) -> ExperimentConfig:
    return _build(ExperimentConfig, data or {}, "config")


def load_config(path=None) -> ExperimentConfig:
    """Load a YAML config; ``None`` falls back to ``$STNO_RESERVOIR_CONFIG``, then defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
