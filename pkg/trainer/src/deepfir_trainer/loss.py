"""Differentiable synthesis and the compressed spectral training loss.

Training synthesizes audio by convolving the mixture with the predicted
filter, held constant over its hop (no crossfade in the training graph;
crossfading is an inference-time synthesis mechanism). The loss compares
STFTs of the prediction against the clean target delayed by half the tap
count, which steers the network toward an approximately linear-phase
filter without constraining the phase explicitly.
"""

from __future__ import annotations

import torch

__all__ = ["compressed_spectral_loss", "delayed_target", "filter_mixture"]

STFT_WINDOW = 256
STFT_HOP = 128
_EPS2 = 1e-24  # magnitude smoothing keeping |S|^alpha differentiable at 0


def filter_mixture(mixture: torch.Tensor, taps: torch.Tensor, hop: int) -> torch.Tensor:
    """Convolve ``mixture`` with a per-hop filter sequence.

    ``y[n] = sum_k taps[n // hop, k] * x[n - k]`` with zeros before the
    stream start; differentiable with respect to ``taps``.

    Args:
        mixture: (N,) with N a multiple of ``hop``.
        taps: (N // hop, K).

    Returns:
        (N,) filtered signal.
    """
    if mixture.ndim != 1 or mixture.shape[0] % hop:
        raise ValueError("mixture must be 1-D with a whole number of hops")
    n_hops, k = taps.shape
    if n_hops * hop != mixture.shape[0]:
        raise ValueError(f"{n_hops} filters cover {n_hops * hop} samples, "
                         f"signal has {mixture.shape[0]}")
    padded = torch.cat([mixture.new_zeros(k - 1), mixture])
    windows = padded.unfold(0, k, 1)                  # (N, K): x[n-K+1 .. n]
    windows = windows.reshape(n_hops, hop, k)
    return torch.einsum("thk,tk->th", windows, taps.flip(-1)).reshape(-1)


def delayed_target(clean: torch.Tensor, delay: int) -> torch.Tensor:
    """Clean signal delayed by ``delay`` samples, same length."""
    if delay < 0:
        raise ValueError(f"delay must be >= 0, got {delay}")
    if delay == 0:
        return clean
    return torch.cat([clean.new_zeros(delay), clean[:-delay]])


def _stft(signal: torch.Tensor) -> torch.Tensor:
    window = torch.sqrt(torch.hann_window(STFT_WINDOW, periodic=True,
                                          dtype=signal.dtype))
    return torch.stft(signal, n_fft=STFT_WINDOW, hop_length=STFT_HOP,
                      window=window, center=False, return_complex=True)


def compressed_spectral_loss(estimate: torch.Tensor, reference: torch.Tensor,
                             alpha: float = 0.3, beta: float = 0.85) -> torch.Tensor:
    """Weighted compressed magnitude + phase-aware complex loss on STFTs.

    Matches the evaluation metric: ``sum (1-beta)*(|E|^a - |R|^a)^2 +
    beta*|E^a - R^a|^2`` where ``S^a`` keeps the phase of ``S``. Magnitudes
    are smoothed by a tiny epsilon so gradients stay finite at silence.
    """
    if estimate.shape != reference.shape:
        raise ValueError(f"shape mismatch: {estimate.shape} vs {reference.shape}")
    est, ref = _stft(estimate), _stft(reference)

    def mag2(spec):
        return spec.real ** 2 + spec.imag ** 2 + _EPS2

    est2, ref2 = mag2(est), mag2(ref)
    mag_term = (est2 ** (alpha / 2) - ref2 ** (alpha / 2)) ** 2
    est_c = est * est2 ** ((alpha - 1) / 2)
    ref_c = ref * ref2 ** ((alpha - 1) / 2)
    complex_term = (est_c - ref_c).abs() ** 2
    return ((1.0 - beta) * mag_term + beta * complex_term).sum()
