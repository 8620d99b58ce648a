"""Synthetic speech-like mixtures for desk-scale training.

Clean signals are harmonic stacks with pitch drift and a syllabic amplitude
envelope; noise is white, pink, or high-band. This is a stand-in corpus:
it exercises the training loop and gives the network something learnable
(tonal low-frequency target vs broadband noise), not a speech dataset.
User-supplied WAV folders (clean/*.wav, noise/*.wav, mono PCM16 16 kHz)
can replace either side.
"""

from __future__ import annotations

import glob
import os
from dataclasses import dataclass

import numpy as np

__all__ = ["ConfigurationError", "MixtureExample", "mix_at_snr", "synthesize_dataset"]

SAMPLE_RATE = 16000


class ConfigurationError(ValueError):
    """Dataset options are unusable (e.g. an empty WAV folder)."""


@dataclass
class MixtureExample:
    """One training example: clean target, noise, and their mixture."""

    clean: np.ndarray
    noise: np.ndarray
    mixture: np.ndarray
    snr_db: float

    def measured_snr_db(self) -> float:
        scaled_noise = self.mixture - self.clean
        return 10.0 * np.log10(np.sum(self.clean ** 2) / np.sum(scaled_noise ** 2))


def mix_at_snr(clean: np.ndarray, noise: np.ndarray, snr_db: float) -> np.ndarray:
    """Scale the noise so the clean/noise power ratio hits ``snr_db`` exactly."""
    p_clean = np.sum(clean ** 2)
    p_noise = np.sum(noise ** 2)
    if p_clean == 0.0 or p_noise == 0.0:
        raise ConfigurationError("cannot set an SNR with a silent clean or noise signal")
    scale = np.sqrt(p_clean / (p_noise * 10.0 ** (snr_db / 10.0)))
    return clean + scale * noise


def _speechlike(rng: np.random.Generator, n: int) -> np.ndarray:
    """Harmonic stack with pitch drift, rolloff, and a syllabic envelope."""
    t = np.arange(n) / SAMPLE_RATE
    f0 = rng.uniform(100.0, 280.0)
    drift = 1.0 + 0.03 * np.sin(2.0 * np.pi * rng.uniform(2.0, 5.0) * t + rng.uniform(0, 2 * np.pi))
    phase0 = np.cumsum(f0 * drift) / SAMPLE_RATE
    out = np.zeros(n)
    max_harmonic = int(3000.0 / f0)
    for k in range(1, max_harmonic + 1):
        out += rng.uniform(0.5, 1.0) / k * np.sin(2.0 * np.pi * k * phase0
                                                  + rng.uniform(0, 2 * np.pi))
    envelope = 0.55 + 0.45 * np.sin(2.0 * np.pi * rng.uniform(2.0, 6.0) * t
                                    + rng.uniform(0, 2 * np.pi))
    out *= envelope
    return out / np.sqrt(np.mean(out ** 2)) * 0.1


def _noise(rng: np.random.Generator, n: int) -> np.ndarray:
    kind = rng.integers(0, 3)
    white = rng.normal(0.0, 1.0, n)
    if kind == 0:
        out = white
    else:
        spectrum = np.fft.rfft(white)
        freqs = np.fft.rfftfreq(n, 1.0 / SAMPLE_RATE)
        if kind == 1:  # pink
            spectrum /= np.sqrt(np.maximum(freqs, freqs[1]))
        else:  # high-band emphasis
            spectrum *= np.clip((freqs - 1500.0) / 2500.0, 0.05, 1.0)
        out = np.fft.irfft(spectrum, n)
    return out / np.sqrt(np.mean(out ** 2)) * 0.1


def _load_folder(folder: str) -> list[np.ndarray]:
    from deepfir.wavio import read_wav

    paths = sorted(glob.glob(os.path.join(folder, "*.wav")))
    if not paths:
        raise ConfigurationError(f"no .wav files in {folder}")
    return [read_wav(p).samples for p in paths]


def _draw(rng: np.random.Generator, pool: list[np.ndarray], n: int) -> np.ndarray:
    clip = pool[int(rng.integers(0, len(pool)))]
    if clip.shape[0] < n:
        reps = int(np.ceil(n / clip.shape[0]))
        clip = np.tile(clip, reps)
    start = int(rng.integers(0, clip.shape[0] - n + 1))
    return clip[start:start + n].copy()


def synthesize_dataset(seed: int, count: int, duration_s: float = 1.0,
                       snr_range: tuple[float, float] = (-10.0, 20.0),
                       clean_dir: str | None = None,
                       noise_dir: str | None = None) -> list[MixtureExample]:
    """Deterministic-per-seed list of mixtures at SNRs drawn from ``snr_range``."""
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * SAMPLE_RATE))
    clean_pool = _load_folder(clean_dir) if clean_dir else None
    noise_pool = _load_folder(noise_dir) if noise_dir else None

    examples = []
    for _ in range(count):
        clean = _draw(rng, clean_pool, n) if clean_pool else _speechlike(rng, n)
        noise = _draw(rng, noise_pool, n) if noise_pool else _noise(rng, n)
        snr = float(rng.uniform(*snr_range))
        mixture = mix_at_snr(clean, noise, snr)
        examples.append(MixtureExample(clean, noise, mixture, snr))
    return examples
