"""Finite-difference verification of the training loss gradients."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from deepfir_trainer import TapPredictor, TrainConfig, training_loss
from deepfir_trainer.loss import compressed_spectral_loss, delayed_target, filter_mixture


def central_difference_gradient(fn, params: torch.Tensor, step: float = 1e-4) -> torch.Tensor:
    """Independent oracle: central differences in float64, one coordinate at a time."""
    grad = torch.empty_like(params)
    for i in range(params.numel()):
        plus = params.clone()
        minus = params.clone()
        plus[i] += step
        minus[i] -= step
        grad[i] = (fn(plus) - fn(minus)) / (2.0 * step)
    return grad


def toy_setup(seed: int = 0):
    torch.manual_seed(seed)
    model = TapPredictor(feature_dim=5, hidden=3, fc_dim=4, out_dim=6).double()
    # 129 is the production feature size; the toy front-end just needs shapes
    rng = np.random.default_rng(seed)
    hop, n = 4, 320
    mixture = torch.from_numpy(rng.uniform(-0.5, 0.5, n)).double()
    clean = torch.from_numpy(rng.uniform(-0.5, 0.5, n)).double()
    feats = torch.from_numpy(rng.uniform(0.0, 1.5, (n // hop, 5))).double()
    return model, mixture, clean, feats, hop


def loss_of(model, mixture, clean, feats, hop) -> torch.Tensor:
    taps = model(feats.unsqueeze(0)).squeeze(0)
    prediction = filter_mixture(mixture, taps, hop)
    return compressed_spectral_loss(prediction, delayed_target(clean, 3))


class TestGradientCheck:
    def test_loss_gradient_matches_central_differences(self) -> None:
        model, mixture, clean, feats, hop = toy_setup()
        params = torch.nn.utils.parameters_to_vector(model.parameters()).detach()

        def scalar_loss(vec: torch.Tensor) -> float:
            torch.nn.utils.vector_to_parameters(vec, model.parameters())
            with torch.no_grad():
                return float(loss_of(model, mixture, clean, feats, hop))

        torch.nn.utils.vector_to_parameters(params, model.parameters())
        loss = loss_of(model, mixture, clean, feats, hop)
        loss.backward()
        autograd = torch.cat([p.grad.reshape(-1) for p in model.parameters()])

        numeric = central_difference_gradient(scalar_loss, params)
        scale = max(float(autograd.abs().max()), 1e-8)
        rel_err = float((numeric - autograd).abs().max()) / scale
        assert rel_err < 1e-4, f"max relative gradient error {rel_err}"

    def test_filter_mixture_gradient(self) -> None:
        torch.manual_seed(0)
        mixture = torch.randn(32, dtype=torch.float64)
        taps = torch.randn(8, 5, dtype=torch.float64, requires_grad=True)
        assert torch.autograd.gradcheck(
            lambda t: filter_mixture(mixture, t, 4).sum(), (taps,), eps=1e-6)

    def test_loss_positive_for_random_prediction(self) -> None:
        torch.manual_seed(1)
        a = torch.randn(1024, dtype=torch.float64)
        b = torch.randn(1024, dtype=torch.float64)
        assert float(compressed_spectral_loss(a, b)) > 0.0

    def test_loss_zero_when_prediction_equals_delayed_target(self) -> None:
        torch.manual_seed(2)
        clean = torch.randn(1024, dtype=torch.float64)
        target = delayed_target(clean, 64)
        assert float(compressed_spectral_loss(target, target)) == 0.0

    def test_training_loss_runs_on_production_shapes(self) -> None:
        config = TrainConfig(hidden=4, fc_dim=4, taps=16, delay=8, hop=16,
                             epochs=1, examples=1)
        model = TapPredictor(hidden=4, fc_dim=4, out_dim=16)
        mixture = torch.randn(1600)
        clean = torch.randn(1600)
        loss = training_loss(model, mixture, clean, config)
        assert loss.shape == ()
        assert float(loss.detach()) > 0.0
