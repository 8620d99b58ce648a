"""Desk-scale trainer for the deepfir tap-prediction network.

Builds the same two-LSTM/two-FC architecture the inference engine runs,
trains it on synthetic mixtures with the compressed spectral loss against a
half-tap-delayed target, and exports DFW1 weight files the engine loads.
"""

__version__ = "0.1.0"

from .data import ConfigurationError, MixtureExample, mix_at_snr, synthesize_dataset
from .loss import compressed_spectral_loss, delayed_target, filter_mixture
from .model import TapPredictor, export_dfw1, feature_frames, parameter_count
from .train import TrainConfig, TrainingDiverged, build_model, train_and_export, training_loss

__all__ = [
    "ConfigurationError",
    "MixtureExample",
    "TapPredictor",
    "TrainConfig",
    "TrainingDiverged",
    "build_model",
    "compressed_spectral_loss",
    "delayed_target",
    "export_dfw1",
    "feature_frames",
    "filter_mixture",
    "mix_at_snr",
    "parameter_count",
    "synthesize_dataset",
    "train_and_export",
    "training_loss",
]
