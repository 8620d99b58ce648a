"""Tests for WAV ingestion and emission."""

from __future__ import annotations

import struct
import wave

import numpy as np
import pytest
from numpy.testing import assert_allclose

from deepfir.errors import FormatError
from deepfir.wavio import WavAudio, read_wav, write_wav


def write_pcm16(path, pcm: np.ndarray, rate: int = 16000, channels: int = 1) -> None:
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(channels)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.astype("<i2").tobytes())


def test_round_trip_is_bit_identical(tmp_path, rng) -> None:
    pcm = rng.integers(-32768, 32768, 16000, dtype=np.int16)
    src = tmp_path / "in.wav"
    dst = tmp_path / "out.wav"
    write_pcm16(src, pcm)
    audio = read_wav(src)
    assert audio.sample_rate == 16000
    assert np.all(np.abs(audio.samples) <= 1.0)
    write_wav(dst, audio)
    assert np.array_equal(np.frombuffer(dst.read_bytes()[44:], dtype="<i2"), pcm)


def test_full_scale_values_survive(tmp_path) -> None:
    pcm = np.array([-32768, -1, 0, 1, 32767], dtype=np.int16)
    path = tmp_path / "edge.wav"
    write_pcm16(path, pcm)
    out = tmp_path / "edge2.wav"
    write_wav(out, read_wav(path))
    assert np.array_equal(np.frombuffer(out.read_bytes()[44:], dtype="<i2"), pcm)


def test_clipping_on_write(tmp_path) -> None:
    path = tmp_path / "clip.wav"
    write_wav(path, WavAudio(np.array([2.0, -2.0]), 16000))
    pcm = np.frombuffer(path.read_bytes()[44:], dtype="<i2")
    assert list(pcm) == [32767, -32768]


def test_wrong_rate_named_in_error(tmp_path, rng) -> None:
    path = tmp_path / "hi.wav"
    write_pcm16(path, rng.integers(-100, 100, 100, dtype=np.int16), rate=44100)
    with pytest.raises(FormatError, match="44100"):
        read_wav(path)
    assert read_wav(path, expected_rate=None).sample_rate == 44100


def test_stereo_rejected(tmp_path, rng) -> None:
    path = tmp_path / "st.wav"
    write_pcm16(path, rng.integers(-100, 100, 200, dtype=np.int16), channels=2)
    with pytest.raises(FormatError, match="channels"):
        read_wav(path)


def test_wrong_sample_width_rejected(tmp_path) -> None:
    path = tmp_path / "w8.wav"
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(1)
        fh.setframerate(16000)
        fh.writeframes(bytes(100))
    with pytest.raises(FormatError, match="16-bit"):
        read_wav(path)


def test_truncated_header_rejected(tmp_path) -> None:
    path = tmp_path / "trunc.wav"
    path.write_bytes(b"RIFF\x10\x00\x00\x00WAVE")
    with pytest.raises(FormatError):
        read_wav(path)


def test_non_wav_rejected(tmp_path) -> None:
    path = tmp_path / "not.wav"
    path.write_bytes(b"this is not audio at all, just bytes")
    with pytest.raises(FormatError):
        read_wav(path)


def test_non_pcm_format_rejected(tmp_path) -> None:
    # minimal IEEE-float WAV header (format tag 3), which wave refuses
    path = tmp_path / "float.wav"
    data = struct.pack("<4sI4s4sIHHIIHH4sI", b"RIFF", 36, b"WAVE", b"fmt ", 16,
                       3, 1, 16000, 64000, 4, 32, b"data", 0)
    path.write_bytes(data)
    with pytest.raises(FormatError):
        read_wav(path)


def test_normalization_scale(tmp_path) -> None:
    path = tmp_path / "one.wav"
    write_pcm16(path, np.array([16384], dtype=np.int16))
    assert_allclose(read_wav(path).samples, [0.5])
