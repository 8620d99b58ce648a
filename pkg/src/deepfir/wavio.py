"""Mono 16-bit PCM WAV ingestion and emission.

Samples are normalized to [-1, 1] by 1/32768 on read; writing rounds back
to int16, so a read/write round trip of PCM16 data is bit-identical.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

from .errors import FormatError

__all__ = ["WavAudio", "read_wav", "write_wav"]

PCM_SCALE = 32768.0


@dataclass
class WavAudio:
    """Mono audio: float64 samples in [-1, 1] plus the sample rate."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration_s(self) -> float:
        return self.samples.shape[0] / self.sample_rate


def read_wav(path, expected_rate: int | None = 16000) -> WavAudio:
    """Read a mono PCM16 WAV file.

    Args:
        path: File path.
        expected_rate: Reject other sample rates (pass None to accept any);
            there is no resampling in this package.

    Raises:
        FormatError: not a RIFF/WAVE file, not PCM16, not mono, or an
            unexpected sample rate (the message names the offending value).
    """
    try:
        with wave.open(str(path), "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            frames = fh.readframes(fh.getnframes())
    except (wave.Error, EOFError) as exc:
        raise FormatError(f"{path}: not a readable WAV file ({exc})") from exc
    if channels != 1:
        raise FormatError(f"{path}: expected mono audio, got {channels} channels")
    if width != 2:
        raise FormatError(f"{path}: expected 16-bit PCM, got {8 * width}-bit samples")
    if expected_rate is not None and rate != expected_rate:
        raise FormatError(
            f"{path}: expected {expected_rate} Hz, got {rate} Hz (resampling is not supported)")
    samples = np.frombuffer(frames, dtype="<i2").astype(np.float64) / PCM_SCALE
    return WavAudio(samples, rate)


def write_wav(path, audio: WavAudio) -> None:
    """Write mono PCM16; samples are clipped to [-1, 1) range of int16."""
    pcm = np.clip(np.rint(audio.samples * PCM_SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(audio.sample_rate)
        fh.writeframes(pcm.tobytes())
