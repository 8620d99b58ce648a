"""Spectral-mask baselines: OLA (equal windows, 50% overlap) and LSTW
(long analysis window, short synthesis window).

Both reuse the inference runtime with a mask head (head_tag 1) and the same
feature front-end as the FIR engine; only the output layer size differs.
Synthesis is weighted overlap-add normalized by the accumulated window
products, so a unity mask reconstructs the input (exactly for OLA, and to
measurement precision for LSTW, where the accumulated products also undo
the Hamming analysis taper on the extracted segment).

Output is time-aligned with the input; availability lags by one synthesis
window, which is the algorithmic latency of these methods.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from . import dsp, features
from .engine import EvalTrace, HopStream, StreamConfig
from .errors import InvalidArgument
from .model import HEAD_MASK, ModelState, ModelWeights, predict_mask

__all__ = ["LstwEngine", "OlaEngine", "lstw_process", "ola_process"]

_NORM_GUARD = 1e-12  # positions with no usable window coverage emit silence


class _MaskEngine(HopStream):
    """Shared per-hop mask inference and normalized overlap-add synthesis."""

    def __init__(self, config: StreamConfig, weights: ModelWeights,
                 mask_transform: Callable[[np.ndarray], np.ndarray] | None = None) -> None:
        bins = config.analysis_window // 2 + 1
        if weights.head != HEAD_MASK:
            raise InvalidArgument(f"{config.mode} mode needs mask-head weights (head_tag 1)")
        if weights.feature_dim != features.FEATURE_DIM:
            raise InvalidArgument(
                f"weights expect {weights.feature_dim} features, front-end produces "
                f"{features.FEATURE_DIM}")
        if weights.out_dim != bins:
            raise InvalidArgument(
                f"weights predict {weights.out_dim} mask bins, analysis FFT has {bins}")
        self._drop_total = config.synthesis_window - config.hop
        self._init_stream(config)
        self.weights = weights
        self._mask_transform = mask_transform
        self._ring = dsp.RingBuffer(config.analysis_window)
        self._state = ModelState.zeros(weights.hidden)
        self._ola = np.zeros(config.synthesis_window)
        self._norm = np.zeros(config.synthesis_window)
        # set by subclasses: analysis window and the per-frame norm contribution
        self._w_analysis: np.ndarray
        self._norm_add: np.ndarray

    def _synth_frame(self, mask: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _process_hop(self, chunk: np.ndarray) -> np.ndarray:
        cfg = self.config
        hop = cfg.hop
        t0 = time.perf_counter()
        self._ring.push(chunk)
        feats = features.extract_features(self._ring.last(cfg.analysis_window))
        t1 = time.perf_counter()
        self._state, mask = predict_mask(self.weights, self._state, feats)
        if self._mask_transform is not None:
            mask = np.asarray(self._mask_transform(mask), dtype=np.float64)
        t2 = time.perf_counter()
        contribution = self._synth_frame(mask)

        self._ola[:-hop] = self._ola[hop:]
        self._ola[-hop:] = 0.0
        self._norm[:-hop] = self._norm[hop:]
        self._norm[-hop:] = 0.0
        self._ola += contribution
        self._norm += self._norm_add

        out = np.zeros(hop)
        ready_sig, ready_norm = self._ola[:hop], self._norm[:hop]
        usable = ready_norm > _NORM_GUARD
        out[usable] = ready_sig[usable] / ready_norm[usable]
        t3 = time.perf_counter()

        self.trace.frontend_us.append((t1 - t0) * 1e6)
        self.trace.inference_us.append((t2 - t1) * 1e6)
        self.trace.synthesis_us.append((t3 - t2) * 1e6)
        return out


class OlaEngine(_MaskEngine):
    """Mask baseline with square-root-Hann analysis and synthesis windows.

    The window product is a periodic Hann, which satisfies constant
    overlap-add at 50% hop, so a unity mask reconstructs the input.
    """

    def __init__(self, config: StreamConfig, weights: ModelWeights,
                 mask_transform=None) -> None:
        if config.mode != "ola":
            raise InvalidArgument(f"OlaEngine drives ola mode, not {config.mode!r}")
        super().__init__(config, weights, mask_transform)
        w = dsp.sqrt_hann(config.analysis_window)
        self._w_analysis = w
        self._w_synthesis = w
        self._norm_add = w * w

    def _synth_frame(self, mask: np.ndarray) -> np.ndarray:
        frame = self._ring.last(self.config.analysis_window)
        spectrum = np.fft.rfft(frame * self._w_analysis)
        filtered = np.fft.irfft(spectrum * mask, self.config.analysis_window)
        return filtered * self._w_synthesis


class LstwEngine(_MaskEngine):
    """Mask baseline with a long Hamming analysis window and a short
    square-root-Hann synthesis window over the newest samples of each frame.

    The synthesis segment is the trailing part of the inverse FFT (the
    lowest-latency audio in the frame); the overlap-add normalization
    includes the Hamming taper over that segment, which is nonzero at the
    frame edge precisely because the window is a Hamming.
    """

    def __init__(self, config: StreamConfig, weights: ModelWeights,
                 mask_transform=None) -> None:
        if config.mode != "lstw":
            raise InvalidArgument(f"LstwEngine drives lstw mode, not {config.mode!r}")
        super().__init__(config, weights, mask_transform)
        self._w_analysis = dsp.hamming(config.analysis_window)
        self._w_synthesis = dsp.sqrt_hann(config.synthesis_window)
        tail = self._w_analysis[config.analysis_window - config.synthesis_window:]
        self._norm_add = tail * self._w_synthesis

    def _synth_frame(self, mask: np.ndarray) -> np.ndarray:
        n = self.config.analysis_window
        frame = self._ring.last(n)
        spectrum = np.fft.rfft(frame * self._w_analysis)
        filtered = np.fft.irfft(spectrum * mask, n)
        return filtered[n - self.config.synthesis_window:] * self._w_synthesis


def ola_process(config: StreamConfig, weights: ModelWeights, samples,
                **kwargs) -> tuple[np.ndarray, EvalTrace]:
    """Whole-signal OLA baseline; output has exactly the input length."""
    if config.mode != "ola":
        raise InvalidArgument(f"ola_process needs an ola config, got {config.mode!r}")
    return _run(OlaEngine(config, weights, **kwargs), samples)


def lstw_process(config: StreamConfig, weights: ModelWeights, samples,
                 **kwargs) -> tuple[np.ndarray, EvalTrace]:
    """Whole-signal LSTW baseline; output has exactly the input length."""
    if config.mode != "lstw":
        raise InvalidArgument(f"lstw_process needs an lstw config, got {config.mode!r}")
    return _run(LstwEngine(config, weights, **kwargs), samples)


def _run(engine: _MaskEngine, samples) -> tuple[np.ndarray, EvalTrace]:
    samples = np.asarray(samples, dtype=np.float64)
    out = np.concatenate([engine.process(samples), engine.flush()])
    assert out.shape == samples.shape
    return out, engine.trace
