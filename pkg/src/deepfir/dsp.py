"""Windows, real-input FFT helpers, ring buffer, and direct convolution.

Bottom of the dependency graph: float64 throughout, no imports from other
modules of this package besides the error types.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgument

__all__ = [
    "RingBuffer",
    "direct_convolve",
    "hamming",
    "hann_crossfade",
    "irfft",
    "rfft",
]


# ---------------------------------------------------------------------------
# Windows
# ---------------------------------------------------------------------------


def hamming(length: int) -> np.ndarray:
    """Symmetric Hamming window ``0.54 - 0.46*cos(2*pi*n/(length-1))``.

    The edges stay at 0.08 rather than tapering to zero, so the newest
    samples of an analysis frame keep some weight.

    Args:
        length: Window length in samples, at least 2.

    Returns:
        Float64 array of shape ``(length,)``.
    """
    if length < 2:
        raise InvalidArgument(f"hamming window needs length >= 2, got {length}")
    n = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (length - 1))


def hann_crossfade(length: int) -> tuple[np.ndarray, np.ndarray]:
    """Complementary half-Hann gain ramps for blending two filter outputs.

    ``rise[n] = 0.5*(1 - cos(pi*(n+1)/length))`` is monotone increasing and
    reaches exactly 1 at the last sample, so the incoming filter has fully
    taken over by the end of the hop; ``fall = 1 - rise``. A length of 1 is
    a hard handover.

    Args:
        length: Ramp length in samples, at least 1.

    Returns:
        ``(rise, fall)`` float64 arrays of shape ``(length,)``.
    """
    if length < 1:
        raise InvalidArgument(f"crossfade length must be >= 1, got {length}")
    n = np.arange(1, length + 1)
    rise = 0.5 * (1.0 - np.cos(np.pi * n / length))
    rise[-1] = 1.0  # cos(pi) is exact, but pin the endpoint regardless
    return rise, 1.0 - rise


def sqrt_hann(length: int) -> np.ndarray:
    """Periodic square-root-Hann window ``sin(pi*n/length)``.

    Used in pairs (analysis * synthesis = periodic Hann), which satisfies
    constant overlap-add at 50% hop.
    """
    if length < 2:
        raise InvalidArgument(f"sqrt-hann window needs length >= 2, got {length}")
    return np.sin(np.pi * np.arange(length) / length)


# ---------------------------------------------------------------------------
# Real-input FFT
# ---------------------------------------------------------------------------


def _check_pow2(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise InvalidArgument(f"FFT size must be a power of two >= 2, got {n}")


def rfft(signal: np.ndarray) -> np.ndarray:
    """DFT of a real signal whose length is a power of two.

    Returns the ``N/2 + 1`` nonnegative-frequency bins; bins 0 and N/2 have
    zero imaginary part for real input.
    """
    signal = np.asarray(signal, dtype=np.float64)
    _check_pow2(signal.shape[-1])
    return np.fft.rfft(signal)


def irfft(spectrum: np.ndarray, length: int | None = None) -> np.ndarray:
    """Inverse of :func:`rfft`; ``length`` must be the (power-of-two) signal length."""
    spectrum = np.asarray(spectrum, dtype=np.complex128)
    if length is None:
        length = 2 * (spectrum.shape[-1] - 1)
    _check_pow2(length)
    if spectrum.shape[-1] != length // 2 + 1:
        raise InvalidArgument(
            f"spectrum has {spectrum.shape[-1]} bins, expected {length // 2 + 1}"
        )
    return np.fft.irfft(spectrum, n=length)


# ---------------------------------------------------------------------------
# Streaming history
# ---------------------------------------------------------------------------


class RingBuffer:
    """Most recent ``capacity`` samples of a stream, zero-initialized.

    Single writer; reads return chronological order (oldest first). Not
    thread-safe without external exclusion.
    """

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise InvalidArgument(f"ring capacity must be >= 1, got {capacity}")
        self._buf = np.zeros(capacity, dtype=np.float64)

    @property
    def capacity(self) -> int:
        return self._buf.shape[0]

    def push(self, samples: np.ndarray) -> None:
        """Append samples, discarding the oldest ones beyond capacity."""
        samples = np.asarray(samples, dtype=np.float64)
        n = samples.shape[0]
        if n == 0:
            return
        cap = self._buf.shape[0]
        if n >= cap:
            self._buf[:] = samples[-cap:]
        else:
            self._buf[:-n] = self._buf[n:]
            self._buf[-n:] = samples

    def last(self, k: int) -> np.ndarray:
        """Copy of the newest ``k`` samples in chronological order."""
        if not 1 <= k <= self._buf.shape[0]:
            raise InvalidArgument(f"cannot read {k} samples from capacity {self._buf.shape[0]}")
        return self._buf[-k:].copy()


def direct_convolve(history: RingBuffer, taps) -> float:
    """One output sample ``y = sum_k h[k] * x[n-k]`` with x[n] the newest sample.

    ``taps`` may be a plain array or anything exposing a ``.taps`` array.
    """
    taps = np.asarray(getattr(taps, "taps", taps), dtype=np.float64)
    k = taps.shape[0]
    if k > history.capacity:
        raise InvalidArgument(f"{k} taps exceed history capacity {history.capacity}")
    recent = history.last(k)  # chronological: recent[-1] is x[n]
    return float(np.dot(taps, recent[::-1]))
