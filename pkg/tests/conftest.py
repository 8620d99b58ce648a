"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from deepfir.model import HEAD_MASK, HEAD_TAPS, ModelWeights


def make_weights(rng: np.random.Generator, feature_dim: int = 129, hidden: int = 8,
                 fc_dim: int = 6, out_dim: int = 128, head: int = HEAD_TAPS,
                 scale: float = 0.3) -> ModelWeights:
    """Random but well-conditioned weights at test-friendly sizes."""
    def k(*shape):
        return rng.normal(0.0, scale, shape)

    h4 = 4 * hidden
    return ModelWeights(
        w1=k(feature_dim, h4), u1=k(hidden, h4), b1=k(h4),
        w2=k(hidden, h4), u2=k(hidden, h4), b2=k(h4),
        fc1_w=k(hidden, fc_dim), fc1_b=k(fc_dim),
        fc2_w=k(fc_dim, out_dim), fc2_b=k(out_dim), head=head)


def impulse_head_weights(out_dim: int = 128) -> ModelWeights:
    """Weights whose sigmoid head saturates to an impulse filter (pass-through)."""
    f, h, fc = 129, 4, 4
    z = np.zeros
    bias = np.full(out_dim, -40.0)
    bias[0] = 40.0
    return ModelWeights(
        w1=z((f, 4 * h)), u1=z((h, 4 * h)), b1=z(4 * h),
        w2=z((h, 4 * h)), u2=z((h, 4 * h)), b2=z(4 * h),
        fc1_w=z((h, fc)), fc1_b=z(fc),
        fc2_w=z((fc, out_dim)), fc2_b=bias, head=HEAD_TAPS)


def bounded_spectrum_filter(rng: np.random.Generator, taps: int = 128) -> np.ndarray:
    """Random sigmoid-range taps whose spectrum is bounded away from zero.

    The first tap dominates and the remaining mass is capped at 40% of it,
    so ``min|H| >= 0.6 * h0`` by the triangle inequality. A third of the
    draws are time-reversed (maximum phase) and a third delayed; both keep
    the magnitude response, so the conversion under test still has real
    work to do.
    """
    h0 = rng.uniform(0.5, 0.9)
    tail = rng.uniform(0.0, 1.0, taps - 1) * 0.9 ** np.arange(1, taps)
    h = np.empty(taps)
    h[0] = h0
    h[1:] = 0.4 * h0 * tail / tail.sum()
    kind = rng.integers(0, 3)
    if kind == 1:
        h = h[::-1].copy()
    elif kind == 2:
        shift = int(rng.integers(1, 33))
        h = np.concatenate([np.zeros(shift), h[:taps - shift]])
    return h


def linear_phase_counterpart(h: np.ndarray, nfft: int = 512) -> np.ndarray:
    """Linear-phase filter with (approximately) the magnitude response of h."""
    k = h.shape[0]
    mag = np.abs(np.fft.rfft(h, nfft))
    w = np.arange(nfft // 2 + 1) * 2.0 * np.pi / nfft
    return np.fft.irfft(mag * np.exp(-1j * w * (k - 1) / 2.0), nfft)[:k]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
