"""Reservoir computing with a single spin-torque oscillator amplitude model."""
__version__ = "0.1.0"

from .oscillator import (BiasPoint, DriveWaveform, EnvelopeTrace, OscillatorParams,
                         noise_std, simulate_envelope, steady_state_amplitude,
                         threshold_current)
from .encoder import (EncodingConfig, Mask, NodeStateMatrix, control_states, encode_drive,
                      make_mask, sample_nodes)
from .readout import (ReadoutWeights, TaskReport, classify_word, reconstruct_outputs,
                      rms_deviation, train_weights)

__all__ = [
    "BiasPoint", "DriveWaveform", "EnvelopeTrace", "OscillatorParams", "noise_std",
    "simulate_envelope", "steady_state_amplitude", "threshold_current",
    "EncodingConfig", "Mask", "NodeStateMatrix", "control_states", "encode_drive",
    "make_mask", "sample_nodes",
    "ReadoutWeights", "TaskReport", "classify_word", "reconstruct_outputs",
    "rms_deviation", "train_weights",
]
