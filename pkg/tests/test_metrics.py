"""Tests for SI-SDR, the compressed spectral loss, and the STFT helper."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from deepfir.errors import InvalidArgument
from deepfir.metrics import (
    LossConfig,
    best_lag_si_sdr,
    compressed_spectral_loss,
    shifted_si_sdr,
    si_sdr,
    si_sdr_improvement,
    stft,
)


class TestStft:
    def test_zero_signal(self) -> None:
        spec = stft(np.zeros(512))
        assert_allclose(np.abs(spec), 0.0)

    def test_frame_count_formula(self) -> None:
        assert stft(np.zeros(512)).shape == (129, 3)
        assert stft(np.zeros(256)).shape == (129, 1)
        assert stft(np.zeros(16000)).shape == (129, 124)

    def test_per_frame_parseval(self, rng) -> None:
        from deepfir.dsp import sqrt_hann

        x = rng.normal(size=1024)
        spec = stft(x)
        window = sqrt_hann(256)
        for t in range(spec.shape[1]):
            frame = x[t * 128:t * 128 + 256] * window
            half = spec[:, t]
            full = (np.abs(half[0]) ** 2 + np.abs(half[128]) ** 2
                    + 2.0 * np.sum(np.abs(half[1:128]) ** 2))
            assert_allclose(np.sum(frame ** 2), full / 256.0, rtol=1e-6)

    def test_too_short_signal_rejected(self) -> None:
        with pytest.raises(InvalidArgument):
            stft(np.zeros(255))


class TestCompressedSpectralLoss:
    def test_zero_at_equality(self, rng) -> None:
        spec = stft(rng.normal(size=1024))
        assert compressed_spectral_loss(spec, spec) == 0.0

    @pytest.mark.parametrize("alpha", [0.1, 0.3, 1.0])
    def test_single_unit_bin_against_zero_reference(self, alpha: float) -> None:
        ref = np.zeros((4, 3), dtype=complex)
        est = np.zeros((4, 3), dtype=complex)
        est[1, 1] = 1.0  # |1|^alpha = 1 for any alpha
        cfg = LossConfig(alpha=alpha, beta=0.85)
        assert_allclose(compressed_spectral_loss(ref, est, cfg), 1.0, rtol=1e-12)

    def test_phase_flip_costs_four_times_beta(self) -> None:
        ref = np.array([[np.exp(1j * 0.0)]])
        est = np.array([[np.exp(1j * np.pi)]])
        loss = compressed_spectral_loss(ref, est, LossConfig(alpha=0.3, beta=0.85))
        assert abs(loss - 3.4) < 1e-9

    def test_beta_zero_ignores_phase(self, rng) -> None:
        mag = rng.uniform(0.1, 2.0, (129, 5))
        ref = mag * np.exp(1j * rng.uniform(-np.pi, np.pi, mag.shape))
        est = mag * np.exp(1j * rng.uniform(-np.pi, np.pi, mag.shape))
        loss = compressed_spectral_loss(ref, est, LossConfig(alpha=0.3, beta=0.0))
        assert abs(loss) < 1e-20

    def test_decreases_toward_reference(self, rng) -> None:
        ref = stft(rng.normal(size=2048))
        est = stft(rng.normal(size=2048))
        losses = [compressed_spectral_loss(ref, est + t * (ref - est))
                  for t in (0.0, 0.25, 0.5, 0.75, 1.0)]
        assert all(a > b for a, b in zip(losses, losses[1:]))
        assert losses[-1] < 1e-20  # est + 1.0*(ref - est) is ref up to rounding

    def test_nonnegative(self, rng) -> None:
        for _ in range(10):
            a = stft(rng.normal(size=512))
            b = stft(rng.normal(size=512))
            assert compressed_spectral_loss(a, b) >= 0.0

    def test_shape_mismatch_rejected(self) -> None:
        with pytest.raises(InvalidArgument):
            compressed_spectral_loss(np.zeros((3, 2)), np.zeros((2, 3)))

    def test_bad_config_rejected(self) -> None:
        with pytest.raises(InvalidArgument):
            LossConfig(alpha=0.0)
        with pytest.raises(InvalidArgument):
            LossConfig(beta=1.5)


class TestSiSdr:
    def test_scaled_copy_clamps_at_sixty(self, rng) -> None:
        ref = rng.normal(size=1000)
        assert si_sdr(ref, 2.0 * ref) == 60.0

    def test_equal_power_orthogonal_noise_scores_zero(self) -> None:
        t = np.arange(16000) / 16000.0
        ref = np.sin(2 * np.pi * 1000.0 * t)
        noise = np.cos(2 * np.pi * 1000.0 * t)  # orthogonal over whole periods
        assert abs(si_sdr(ref, ref + noise)) < 0.01

    def test_orthogonal_estimate_scores_very_low(self) -> None:
        t = np.arange(16000) / 16000.0
        ref = np.sin(2 * np.pi * 1000.0 * t)
        est = np.cos(2 * np.pi * 1000.0 * t)
        assert si_sdr(ref, est) <= -40.0

    @pytest.mark.parametrize("gain", [2.0, 0.5, -4.0])
    def test_scale_invariance_bit_exact_for_binary_gains(self, rng, gain: float) -> None:
        ref = rng.normal(size=512)
        est = ref + 0.3 * rng.normal(size=512)
        assert si_sdr(ref, gain * est) == si_sdr(ref, est)

    @given(st.floats(min_value=0.01, max_value=100.0))
    def test_scale_invariance_general(self, gain: float) -> None:
        rng = np.random.default_rng(7)
        ref = rng.normal(size=256)
        est = ref + 0.5 * rng.normal(size=256)
        assert abs(si_sdr(ref, gain * est) - si_sdr(ref, est)) < 1e-9

    def test_improvement_is_difference(self, rng) -> None:
        ref = rng.normal(size=1000)
        noise = rng.normal(size=1000)
        mix = ref + noise
        est = ref + 0.25 * noise
        imp = si_sdr_improvement(mix, ref, est)
        assert_allclose(imp, si_sdr(ref, est) - si_sdr(ref, mix), rtol=1e-12)
        assert imp > 0.0

    def test_zero_reference_rejected(self) -> None:
        with pytest.raises(InvalidArgument):
            si_sdr(np.zeros(8), np.ones(8))

    def test_length_mismatch_rejected(self) -> None:
        with pytest.raises(InvalidArgument):
            si_sdr(np.ones(8), np.ones(9))


class TestAlignment:
    def test_shifted_si_sdr_compensates_known_delay(self, rng) -> None:
        ref = rng.normal(size=4000)
        est = np.concatenate([np.zeros(64), ref[:-64]])
        assert si_sdr(ref, est) < 10.0
        assert shifted_si_sdr(ref, est, 64) == 60.0

    def test_best_lag_finds_the_delay(self, rng) -> None:
        ref = rng.normal(size=4000)
        est = np.concatenate([np.zeros(37), ref[:-37]]) + 0.01 * rng.normal(size=4000)
        score, lag = best_lag_si_sdr(ref, est)
        assert lag == 37
        assert score > 30.0

    def test_invalid_delays_rejected(self, rng) -> None:
        ref = rng.normal(size=100)
        with pytest.raises(InvalidArgument):
            shifted_si_sdr(ref, ref, -1)
        with pytest.raises(InvalidArgument):
            shifted_si_sdr(ref, ref, 100)
