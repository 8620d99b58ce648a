"""Streaming FIR enhancement engine: per-hop inference, optional min-phase
conversion, time-domain convolution, and half-Hann crossfading between the
current and previous filter.

One engine per stream; processing within a stream is strictly sequential.
Multiple streams may share the immutable :class:`~deepfir.model.ModelWeights`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dsp, features
from .errors import InvalidArgument
from .minphase import group_delay, to_minimum_phase
from .model import HEAD_TAPS, FirFilter, ModelState, ModelWeights, predict_taps

__all__ = ["EvalTrace", "StreamConfig", "StreamEngine", "build_engine", "process_stream"]

MODES = ("deepfir", "lstw", "ola")


@dataclass(frozen=True)
class StreamConfig:
    """Stream shape shared by the engine and the baselines.

    In deepfir mode the hop equals the synthesis window (one new filter per
    emitted block); the mask modes use 50% overlap, so the hop is half the
    synthesis window.
    """

    mode: str
    hop: int
    synthesis_window: int
    sample_rate: int = 16000
    analysis_window: int = features.ANALYSIS_WINDOW
    taps: int = 128
    min_phase: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise InvalidArgument(f"unknown mode {self.mode!r}")
        if self.sample_rate <= 0:
            raise InvalidArgument("sample rate must be positive")
        if self.analysis_window != features.ANALYSIS_WINDOW:
            raise InvalidArgument(
                f"analysis window is fixed at {features.ANALYSIS_WINDOW} samples"
            )
        if self.hop < 1:
            raise InvalidArgument(f"hop must be >= 1, got {self.hop}")
        if self.taps < 1:
            raise InvalidArgument(f"tap count must be >= 1, got {self.taps}")
        if self.synthesis_window > self.analysis_window:
            raise InvalidArgument(
                f"synthesis window {self.synthesis_window} exceeds analysis window "
                f"{self.analysis_window}"
            )
        if self.mode == "deepfir":
            if self.synthesis_window != self.hop:
                raise InvalidArgument("deepfir mode requires synthesis window == hop")
        else:
            if self.min_phase:
                raise InvalidArgument("min-phase conversion only applies to deepfir mode")
            if self.synthesis_window < 2 or self.synthesis_window % 2:
                raise InvalidArgument("mask modes need an even synthesis window >= 2")
            if self.hop != self.synthesis_window // 2:
                raise InvalidArgument("mask modes require hop == synthesis window / 2")
            if self.mode == "ola" and self.synthesis_window != self.analysis_window:
                raise InvalidArgument("ola mode requires synthesis window == analysis window")

    # -- convenience constructors (synthesis window in milliseconds) --------

    @classmethod
    def deepfir(cls, synthesis_ms: float = 1.0, taps: int = 128,
                min_phase: bool = True, sample_rate: int = 16000) -> "StreamConfig":
        n = _ms_to_samples(synthesis_ms, sample_rate)
        return cls(mode="deepfir", hop=n, synthesis_window=n, taps=taps,
                   min_phase=min_phase, sample_rate=sample_rate)

    @classmethod
    def lstw(cls, synthesis_ms: float = 2.0, sample_rate: int = 16000) -> "StreamConfig":
        n = _ms_to_samples(synthesis_ms, sample_rate)
        return cls(mode="lstw", hop=n // 2, synthesis_window=n, sample_rate=sample_rate)

    @classmethod
    def ola(cls, sample_rate: int = 16000) -> "StreamConfig":
        return cls(mode="ola", hop=128, synthesis_window=256, sample_rate=sample_rate)

    @property
    def hop_ms(self) -> float:
        return self.hop / self.sample_rate * 1000.0

    @property
    def synthesis_ms(self) -> float:
        return self.synthesis_window / self.sample_rate * 1000.0


def _ms_to_samples(ms: float, sample_rate: int) -> int:
    n = ms * sample_rate / 1000.0
    if abs(n - round(n)) > 1e-9 or round(n) < 1:
        raise InvalidArgument(f"{ms} ms is not a whole positive number of samples at "
                              f"{sample_rate} Hz")
    return int(round(n))


@dataclass
class EvalTrace:
    """Per-hop observability: measured filter group delay and stage timings.

    The mask baselines leave ``group_delay_ms`` empty (there is no filter to
    measure).
    """

    group_delay_ms: list = field(default_factory=list)
    frontend_us: list = field(default_factory=list)
    inference_us: list = field(default_factory=list)
    synthesis_us: list = field(default_factory=list)

    @property
    def hops(self) -> int:
        return len(self.inference_us)

    def hop_times_us(self) -> np.ndarray:
        return (np.asarray(self.frontend_us) + np.asarray(self.inference_us)
                + np.asarray(self.synthesis_us))

    def mean_group_delay_ms(self) -> float:
        if not self.group_delay_ms:
            raise InvalidArgument("no group delay was recorded")
        return float(np.mean(self.group_delay_ms))


class HopStream:
    """Chunk-size-independent hop framing shared by all engines.

    Input of any chunking is buffered into whole hops before processing, so
    outputs are bit-identical however the stream is fed. Subclasses implement
    ``_process_hop`` and may set ``_drop_total`` to discard warm-up output
    that precedes input position zero (the mask baselines emit with one
    synthesis window of lag).
    """

    config: StreamConfig
    trace: EvalTrace
    _drop_total = 0

    def _init_stream(self, config: StreamConfig) -> None:
        self.config = config
        self.trace = EvalTrace()
        self._pending = np.empty(0, dtype=np.float64)
        self._samples_in = 0
        self._samples_out = 0
        self._drop_left = self._drop_total

    def process(self, samples) -> np.ndarray:
        """Consume samples; return the output of every hop completed by them."""
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidArgument("input must be a 1-D sample vector")
        self._samples_in += samples.shape[0]
        self._pending = np.concatenate([self._pending, samples])
        hop = self.config.hop
        blocks = []
        while self._pending.shape[0] >= hop:
            chunk, self._pending = self._pending[:hop], self._pending[hop:]
            out = self._emit(self._process_hop(chunk))
            if out.shape[0]:
                self._samples_out += out.shape[0]
                blocks.append(out)
        if not blocks:
            return np.empty(0, dtype=np.float64)
        return np.concatenate(blocks)

    def flush(self) -> np.ndarray:
        """Zero-feed until the output has caught up with the input length."""
        hop = self.config.hop
        blocks = []
        while self._samples_out < self._samples_in:
            fill = np.zeros(hop)
            if self._pending.shape[0]:
                fill[:self._pending.shape[0]] = self._pending
                self._pending = np.empty(0, dtype=np.float64)
            out = self._emit(self._process_hop(fill))
            out = out[:self._samples_in - self._samples_out]
            if out.shape[0]:
                self._samples_out += out.shape[0]
                blocks.append(out)
        if not blocks:
            return np.empty(0, dtype=np.float64)
        return np.concatenate(blocks)

    def _emit(self, out: np.ndarray) -> np.ndarray:
        if self._drop_left:
            d = min(self._drop_left, out.shape[0])
            self._drop_left -= d
            out = out[d:]
        return out

    def _process_hop(self, chunk: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class StreamEngine(HopStream):
    """Sample-stream FIR engine for ``deepfir`` mode.

    ``tap_transform`` is a test/instrumentation hook applied to the predicted
    taps before the optional min-phase conversion (e.g. to pin a known
    filter); ``track_group_delay=False`` skips the per-hop group-delay
    measurement when only audio output or timing is wanted.
    """

    def __init__(self, config: StreamConfig, weights: ModelWeights,
                 tap_transform: Callable[[np.ndarray], np.ndarray] | None = None,
                 track_group_delay: bool = True) -> None:
        if config.mode != "deepfir":
            raise InvalidArgument(f"StreamEngine drives deepfir mode, not {config.mode!r}")
        if weights.head != HEAD_TAPS:
            raise InvalidArgument("deepfir mode needs tap-head weights (head_tag 0)")
        if weights.feature_dim != features.FEATURE_DIM:
            raise InvalidArgument(
                f"weights expect {weights.feature_dim} features, front-end produces "
                f"{features.FEATURE_DIM}")
        if weights.out_dim != config.taps:
            raise InvalidArgument(
                f"weights predict {weights.out_dim} taps, config wants {config.taps}")
        self._init_stream(config)
        self.weights = weights
        self._tap_transform = tap_transform
        self._track_gd = track_group_delay
        self._minphase_nfft = 4 * config.taps
        self._ring = dsp.RingBuffer(config.analysis_window + config.taps)
        self._state = ModelState.zeros(weights.hidden)
        impulse = np.zeros(config.taps)
        impulse[0] = 1.0
        self._current = FirFilter(impulse.copy(), phase="minimum")
        self._previous = FirFilter(impulse.copy(), phase="minimum")
        self._rise, self._fall = dsp.hann_crossfade(config.hop)

    @property
    def current_filter(self) -> FirFilter:
        return self._current

    def _process_hop(self, chunk: np.ndarray) -> np.ndarray:
        cfg = self.config
        t0 = time.perf_counter()
        self._ring.push(chunk)
        feats = features.extract_features(self._ring.last(cfg.analysis_window))
        t1 = time.perf_counter()
        self._state, fir = predict_taps(self.weights, self._state, feats)
        if self._tap_transform is not None:
            fir = FirFilter(self._tap_transform(fir.taps), phase=fir.phase)
        if cfg.min_phase:
            fir = to_minimum_phase(fir, self._minphase_nfft)
        t2 = time.perf_counter()
        self._previous, self._current = self._current, fir
        history = self._ring.last(cfg.hop + cfg.taps - 1)
        y_new = np.convolve(history, self._current.taps, mode="valid")
        y_old = np.convolve(history, self._previous.taps, mode="valid")
        out = self._rise * y_new + self._fall * y_old
        t3 = time.perf_counter()

        self.trace.frontend_us.append((t1 - t0) * 1e6)
        self.trace.inference_us.append((t2 - t1) * 1e6)
        self.trace.synthesis_us.append((t3 - t2) * 1e6)
        if self._track_gd:
            self.trace.group_delay_ms.append(
                group_delay(self._current, self._minphase_nfft,
                            sample_rate=cfg.sample_rate).mean_ms)
        return out


def build_engine(config: StreamConfig, weights: ModelWeights, **kwargs):
    """Engine for any mode; the mask modes live in :mod:`deepfir.baselines`."""
    if config.mode == "deepfir":
        return StreamEngine(config, weights, **kwargs)
    from . import baselines  # deferred: baselines imports this module

    if config.mode == "ola":
        return baselines.OlaEngine(config, weights, **kwargs)
    return baselines.LstwEngine(config, weights, **kwargs)


def process_stream(config: StreamConfig, weights: ModelWeights, samples,
                   **kwargs) -> tuple[np.ndarray, EvalTrace]:
    """Run a whole signal through a fresh engine.

    The final partial hop is zero-padded and the output truncated, so the
    result always has exactly the input length (empty input gives empty
    output).
    """
    samples = np.asarray(samples, dtype=np.float64)
    engine = build_engine(config, weights, **kwargs)
    out = np.concatenate([engine.process(samples), engine.flush()])
    assert out.shape == samples.shape
    return out, engine.trace
