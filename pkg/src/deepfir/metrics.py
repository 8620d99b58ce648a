"""Reference-based evaluation: SI-SDR and the compressed spectral loss,
plus the fixed-grid STFT they operate on.

SI-SDR projects the estimate onto the reference before the energy ratio, so
it is invariant to the estimate's scale. Phase-modifying processing (such as
min-phase filtering) makes a fixed-delay comparison misleading, so a
best-lag alignment helper is provided; reports should flag when it is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dsp
from .errors import InvalidArgument

__all__ = [
    "LossConfig",
    "best_lag_si_sdr",
    "compressed_spectral_loss",
    "shifted_si_sdr",
    "si_sdr",
    "si_sdr_improvement",
    "stft",
]

STFT_WINDOW = 256
STFT_HOP = 128
SI_SDR_CLAMP_DB = 60.0  # applied symmetrically: a perfect match reports +60 dB

_STFT_WINDOW_VEC = dsp.sqrt_hann(STFT_WINDOW)


@dataclass(frozen=True)
class LossConfig:
    """Compression exponent and magnitude/complex weighting of the loss."""

    alpha: float = 0.3
    beta: float = 0.85

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidArgument(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise InvalidArgument(f"beta must be in [0, 1], got {self.beta}")


def stft(signal: np.ndarray, window: np.ndarray | None = None,
         hop: int = STFT_HOP) -> np.ndarray:
    """Framed FFT on the fixed 256/128 root-Hann grid.

    Frames start at multiples of ``hop`` with no padding, so the frame count
    is ``1 + (len - window) // hop``.

    Returns:
        Complex array of shape ``(window // 2 + 1, n_frames)``.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if window is None:
        window = _STFT_WINDOW_VEC
    n = window.shape[0]
    if signal.ndim != 1 or signal.shape[0] < n:
        raise InvalidArgument(
            f"signal must be 1-D with at least {n} samples, got shape {signal.shape}")
    if hop < 1:
        raise InvalidArgument(f"hop must be >= 1, got {hop}")
    n_frames = 1 + (signal.shape[0] - n) // hop
    offsets = np.arange(n_frames) * hop
    frames = signal[offsets[:, None] + np.arange(n)] * window
    return np.fft.rfft(frames, axis=1).T


def _compressed(spec: np.ndarray, alpha: float) -> np.ndarray:
    """``|S|^alpha * exp(j*angle(S))``; zero stays zero."""
    mag = np.abs(spec)
    out = np.zeros_like(spec)
    nz = mag > 0
    out[nz] = (mag[nz] ** alpha) * (spec[nz] / mag[nz])
    return out


def compressed_spectral_loss(ref: np.ndarray, est: np.ndarray,
                             cfg: LossConfig = LossConfig()) -> float:
    """Weighted sum of compressed-magnitude and compressed-complex errors.

    ``sum (1-beta)*(|est|^a - |ref|^a)^2 + beta*|est^a - ref^a|^2`` over all
    bins, where ``S^a`` keeps the phase of ``S``. Zero iff est equals ref
    (up to phase at zero-magnitude bins).
    """
    ref = np.asarray(ref)
    est = np.asarray(est)
    if ref.shape != est.shape:
        raise InvalidArgument(f"shape mismatch: ref {ref.shape} vs est {est.shape}")
    mag_term = (np.abs(est) ** cfg.alpha - np.abs(ref) ** cfg.alpha) ** 2
    complex_term = np.abs(_compressed(est, cfg.alpha) - _compressed(ref, cfg.alpha)) ** 2
    return float(np.sum((1.0 - cfg.beta) * mag_term + cfg.beta * complex_term))


def si_sdr(reference: np.ndarray, estimate: np.ndarray) -> float:
    """Scale-invariant signal-to-distortion ratio in dB.

    The estimate is projected onto the reference; the ratio of projection
    energy to residual energy is clamped to [-60, +60] dB so that perfect
    matches (zero residual) and zero projections stay finite.
    """
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape or reference.ndim != 1 or reference.shape[0] < 1:
        raise InvalidArgument(
            f"signals must be equal-length 1-D vectors, got {reference.shape} "
            f"and {estimate.shape}")
    ref_energy = np.dot(reference, reference)
    if ref_energy == 0.0:
        raise InvalidArgument("reference signal is all zeros")
    target = (np.dot(estimate, reference) / ref_energy) * reference
    target_energy = np.dot(target, target)
    residual = estimate - target
    residual_energy = np.dot(residual, residual)
    if residual_energy == 0.0 or target_energy / residual_energy > 10.0 ** (SI_SDR_CLAMP_DB / 10.0):
        return SI_SDR_CLAMP_DB
    if target_energy == 0.0 or target_energy / residual_energy < 10.0 ** (-SI_SDR_CLAMP_DB / 10.0):
        return -SI_SDR_CLAMP_DB
    return float(10.0 * np.log10(target_energy / residual_energy))


def si_sdr_improvement(mixture: np.ndarray, reference: np.ndarray,
                       estimate: np.ndarray) -> float:
    """``si_sdr(reference, estimate) - si_sdr(reference, mixture)`` in dB."""
    return si_sdr(reference, estimate) - si_sdr(reference, mixture)


def shifted_si_sdr(reference: np.ndarray, estimate: np.ndarray, delay: int) -> float:
    """SI-SDR after advancing the estimate by ``delay`` samples.

    Compensates a known processing delay (for the linear-phase engine this
    is half the tap count). The overlapping region is scored.
    """
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if delay < 0:
        raise InvalidArgument(f"delay must be >= 0, got {delay}")
    if delay >= reference.shape[0]:
        raise InvalidArgument(f"delay {delay} exceeds signal length {reference.shape[0]}")
    if delay == 0:
        return si_sdr(reference, estimate)
    return si_sdr(reference[:-delay], estimate[delay:])


def best_lag_si_sdr(reference: np.ndarray, estimate: np.ndarray,
                    max_lag: int = 128) -> tuple[float, int]:
    """Best SI-SDR over estimate shifts of -max_lag..+max_lag samples.

    Phase-modified output has no single documented delay, so the score is
    maximized over a lag search; callers should flag scores produced this
    way. Positive lag means the estimate trails the reference. Returns
    ``(si_sdr_db, lag)``.
    """
    if max_lag < 0:
        raise InvalidArgument(f"max_lag must be >= 0, got {max_lag}")
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    best = (-np.inf, 0)
    for lag in range(-max_lag, max_lag + 1):
        ref = reference[:-lag] if lag > 0 else reference[-lag:]
        est = estimate[lag:] if lag > 0 else (estimate[:lag] if lag < 0 else estimate)
        if ref.shape[0] < 1:
            continue
        try:
            value = si_sdr(ref, est)
        except InvalidArgument:  # a silent reference slice at extreme lags
            continue
        if value > best[0]:
            best = (value, lag)
    return best
