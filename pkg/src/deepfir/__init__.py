"""Streaming speech enhancement with recurrently predicted FIR filters.

A small recurrent network predicts a new FIR filter every hop from
compressed spectral features; filters are optionally converted to minimum
phase to strip their group delay, applied by time-domain convolution, and
blended with half-Hann crossfades. Spectral-mask baselines (OLA and LSTW),
SI-SDR/spectral-loss metrics, and a latency/compute accounting harness
round out the package.
"""

__version__ = "0.1.0"

from .engine import EvalTrace, StreamConfig, StreamEngine, build_engine, process_stream
from .errors import DeepFirError, DegenerateFilterError, FormatError, InvalidArgument
from .metrics import LossConfig, compressed_spectral_loss, si_sdr, si_sdr_improvement
from .minphase import GroupDelayProfile, group_delay, to_minimum_phase
from .model import (
    FirFilter,
    ModelState,
    ModelWeights,
    load_weights,
    load_weights_file,
    lstm_step,
    predict_mask,
    predict_taps,
)
from .wavio import WavAudio, read_wav, write_wav

__all__ = [
    "DeepFirError",
    "DegenerateFilterError",
    "EvalTrace",
    "FirFilter",
    "FormatError",
    "GroupDelayProfile",
    "InvalidArgument",
    "LossConfig",
    "ModelState",
    "ModelWeights",
    "StreamConfig",
    "StreamEngine",
    "WavAudio",
    "__version__",
    "build_engine",
    "compressed_spectral_loss",
    "group_delay",
    "load_weights",
    "load_weights_file",
    "lstm_step",
    "predict_mask",
    "predict_taps",
    "process_stream",
    "read_wav",
    "si_sdr",
    "si_sdr_improvement",
    "to_minimum_phase",
    "write_wav",
]
