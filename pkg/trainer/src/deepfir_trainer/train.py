"""Training loop: synthetic mixtures -> compressed spectral loss -> DFW1 export.

The target is the clean signal delayed by half the tap count, which trains
an approximately linear-phase filter; minimum-phase conversion stays on the
inference side. A JSON sidecar next to the exported weights records the
configuration, the loss curve, and the 256/128 root-Hann STFT convention
the loss used (the DFW1 format itself has no metadata slot).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass

import numpy as np
import torch

from .data import ConfigurationError, synthesize_dataset
from .loss import compressed_spectral_loss, delayed_target, filter_mixture
from .model import TapPredictor, export_dfw1, feature_frames, parameter_count

__all__ = ["TrainConfig", "TrainingDiverged", "build_model", "train_and_export",
           "training_loss"]


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; training was aborted."""


@dataclass
class TrainConfig:
    """Desk-scale training configuration."""

    hidden: int = 200
    fc_dim: int = 128
    taps: int = 128
    hop: int = 16               # 1 ms at 16 kHz
    alpha: float = 0.3
    beta: float = 0.85
    learning_rate: float = 1e-4
    delay: int = 64             # target delay: half the tap count
    epochs: int = 8
    examples: int = 32
    duration_s: float = 1.0
    snr_range: tuple = (-10.0, 20.0)
    seed: int = 0
    clean_dir: str | None = None
    noise_dir: str | None = None

    def __post_init__(self) -> None:
        if self.delay != self.taps // 2:
            raise ConfigurationError(
                f"target delay must be half the tap count: {self.taps // 2}, "
                f"got {self.delay}")
        if self.hop < 1 or self.taps < 1 or self.hidden < 1:
            raise ConfigurationError("dimensions must be positive")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning rate must be positive")


def build_model(config: TrainConfig) -> TapPredictor:
    """Model with the head initialized at the pass-through solution.

    The output bias starts as a delayed impulse (the filter that reproduces
    the delayed target exactly on clean input), so training begins from a
    transparent filter and learns to attenuate noise, instead of having to
    escape the heavily distorting all-0.5 boxcar that zero bias gives.
    """
    torch.manual_seed(config.seed)
    model = TapPredictor(hidden=config.hidden, fc_dim=config.fc_dim,
                         out_dim=config.taps, head=0)
    with torch.no_grad():
        model.fc2.bias.fill_(-5.0)
        model.fc2.bias[config.delay] = 3.0
    return model


def training_loss(model: TapPredictor, mixture: torch.Tensor, clean: torch.Tensor,
                  config: TrainConfig) -> torch.Tensor:
    """Loss of one example: filter the mixture per hop, compare against the
    delayed clean target."""
    feats = feature_frames(mixture, config.hop)
    taps = model(feats.unsqueeze(0)).squeeze(0)
    prediction = filter_mixture(mixture, taps, config.hop)
    target = delayed_target(clean, config.delay)
    return compressed_spectral_loss(prediction, target, config.alpha, config.beta)


def train_and_export(config: TrainConfig, out_path,
                     log=lambda msg: None) -> list[float]:
    """Train on synthetic mixtures and write a DFW1 file; returns the loss curve.

    Raises :class:`TrainingDiverged` on a non-finite loss and
    :class:`ConfigurationError` if the final epoch loss has not dropped at
    least 20% below the first.
    """
    examples = synthesize_dataset(config.seed, config.examples, config.duration_s,
                                  config.snr_range, config.clean_dir, config.noise_dir)
    tensors = [(torch.from_numpy(ex.mixture).float(), torch.from_numpy(ex.clean).float())
               for ex in examples]

    model = build_model(config)
    log(f"model: hidden={config.hidden} fc={config.fc_dim} taps={config.taps} "
        f"parameters={parameter_count(model)}")
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    order_rng = np.random.default_rng(config.seed + 1)

    curve = []
    for epoch in range(config.epochs):
        order = order_rng.permutation(len(tensors))
        total = 0.0
        for index in order:
            mixture, clean = tensors[index]
            optimizer.zero_grad()
            loss = training_loss(model, mixture, clean, config)
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, example {index}; "
                    f"last finite epoch losses: {curve}")
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
        curve.append(total / len(tensors))
        log(f"epoch {epoch}: mean loss {curve[-1]:.4f}")

    if curve[-1] > 0.8 * curve[0]:
        raise ConfigurationError(
            f"training did not reduce the loss by 20%: {curve[0]:.4f} -> {curve[-1]:.4f}")

    export_dfw1(model, out_path)
    sidecar = {
        "config": {k: v for k, v in dataclasses.asdict(config).items()},
        "loss_curve": curve,
        "loss_stft": {"window": 256, "hop": 128, "window_kind": "sqrt-hann"},
        "parameters": parameter_count(model),
    }
    with open(f"{out_path}.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
    log(f"exported {out_path}")
    return curve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="deepfir-train",
        description="Train the tap-prediction network on synthetic mixtures and "
                    "export DFW1 weights.")
    parser.add_argument("--out", required=True, help="output DFW1 path")
    parser.add_argument("--hidden", type=int, default=200)
    parser.add_argument("--fc-dim", type=int, default=128)
    parser.add_argument("--taps", type=int, default=128)
    parser.add_argument("--hop", type=int, default=16)
    parser.add_argument("--epochs", type=int, default=8)
    parser.add_argument("--examples", type=int, default=32)
    parser.add_argument("--duration-s", type=float, default=1.0)
    parser.add_argument("--learning-rate", type=float, default=1e-4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--clean-dir", help="folder of clean/*.wav (mono PCM16 16 kHz)")
    parser.add_argument("--noise-dir", help="folder of noise/*.wav (mono PCM16 16 kHz)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = TrainConfig(hidden=args.hidden, fc_dim=args.fc_dim, taps=args.taps,
                         hop=args.hop, delay=args.taps // 2, epochs=args.epochs,
                         examples=args.examples, duration_s=args.duration_s,
                         learning_rate=args.learning_rate, seed=args.seed,
                         clean_dir=args.clean_dir, noise_dir=args.noise_dir)
    try:
        train_and_export(config, args.out, log=lambda msg: print(msg, flush=True))
    except (ConfigurationError, TrainingDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
