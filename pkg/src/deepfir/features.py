"""Per-hop feature front-end: compressed FFT magnitudes of the newest 16 ms.

One feature vector per hop, recomputed from scratch from the 256 newest
samples; there is no hidden state here.
"""

from __future__ import annotations

import numpy as np

from . import dsp
from .errors import InvalidArgument

__all__ = ["ANALYSIS_WINDOW", "COMPRESSION", "FEATURE_DIM", "extract_features"]

ANALYSIS_WINDOW = 256  # 16 ms at 16 kHz
FEATURE_DIM = ANALYSIS_WINDOW // 2 + 1
COMPRESSION = 0.3

_WINDOW = dsp.hamming(ANALYSIS_WINDOW)


def extract_features(frame: np.ndarray) -> np.ndarray:
    """Compressed magnitude spectrum ``|rfft(hamming * frame)| ** 0.3``.

    Args:
        frame: The newest 256 samples, oldest first.

    Returns:
        Float64 vector of 129 nonnegative values.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape != (ANALYSIS_WINDOW,):
        raise InvalidArgument(
            f"feature frame must have {ANALYSIS_WINDOW} samples, got shape {frame.shape}"
        )
    return np.abs(dsp.rfft(_WINDOW * frame)) ** COMPRESSION
