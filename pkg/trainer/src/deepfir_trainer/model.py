"""Trainable tap-prediction network and the DFW1 exporter.

The architecture mirrors the inference runtime: two LSTM layers, a ReLU
fully-connected layer, and a sigmoid output head. torch's LSTM uses the
same (input, forget, cell-candidate, output) gate-block order the DFW1
format pins, so export is a transpose plus a bias merge.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np
import torch
from torch import nn

__all__ = ["TapPredictor", "export_dfw1", "feature_frames", "parameter_count"]

FEATURE_DIM = 129
ANALYSIS_WINDOW = 256
COMPRESSION = 0.3

_DFW1_HEADER = struct.Struct("<4s7I")


class TapPredictor(nn.Module):
    """Per-hop filter (or mask) predictor: features -> sigmoid outputs."""

    def __init__(self, feature_dim: int = FEATURE_DIM, hidden: int = 200,
                 fc_dim: int = 128, out_dim: int = 128, head: int = 0) -> None:
        super().__init__()
        if head not in (0, 1):
            raise ValueError(f"head must be 0 (taps) or 1 (mask), got {head}")
        self.feature_dim = feature_dim
        self.hidden = hidden
        self.fc_dim = fc_dim
        self.out_dim = out_dim
        self.head = head
        self.lstm = nn.LSTM(feature_dim, hidden, num_layers=2, batch_first=True)
        self.fc1 = nn.Linear(hidden, fc_dim)
        self.fc2 = nn.Linear(fc_dim, out_dim)

    def forward(self, feats: torch.Tensor) -> torch.Tensor:
        """(batch, time, feature_dim) -> (batch, time, out_dim) in (0, 1)."""
        x, _ = self.lstm(feats)
        return torch.sigmoid(self.fc2(torch.relu(self.fc1(x))))


def parameter_count(model: TapPredictor) -> int:
    """Architecture parameter count by dimension arithmetic.

    torch's LSTM keeps two bias vectors per layer that the exported format
    merges into one, so this is ``sum(p.numel()) - 2 * 4 * hidden``.
    """
    f, h, fc, out = model.feature_dim, model.hidden, model.fc_dim, model.out_dim
    return 4 * h * (f + h + 1) + 4 * h * (2 * h + 1) + h * fc + fc + fc * out + out


def feature_frames(signal: torch.Tensor, hop: int) -> torch.Tensor:
    """Per-hop compressed magnitude features, matching the engine's front-end.

    The engine sees each new hop appended to a zero-initialized history and
    takes the newest 256 samples, so frame t covers samples
    ``[(t+1)*hop - 256, (t+1)*hop)`` with zeros before the stream start.
    ``signal`` length must be a multiple of ``hop``.

    Returns:
        (time, 129) float tensor; no gradients flow through the features.
    """
    if signal.ndim != 1 or signal.shape[0] % hop:
        raise ValueError("signal must be 1-D with a whole number of hops")
    with torch.no_grad():
        window = torch.hamming_window(ANALYSIS_WINDOW, periodic=False,
                                      dtype=signal.dtype)
        padded = torch.cat([signal.new_zeros(ANALYSIS_WINDOW - hop), signal])
        frames = padded.unfold(0, ANALYSIS_WINDOW, hop)  # (T, 256)
        spectrum = torch.fft.rfft(frames * window, dim=1)
        return spectrum.abs() ** COMPRESSION


def export_dfw1(model: TapPredictor, path) -> None:
    """Write the model as a DFW1 file (atomically: temp file + rename).

    Layout: "DFW1" magic, version 1, dims, layer count 2, head tag; then
    little-endian float32 arrays W_1, U_1, b_1, W_2, U_2, b_2, FC1_W, FC1_b,
    FC2_W, FC2_b with kernels row-major, rows = input dimension.
    """
    state = {name: tensor.detach().cpu().to(torch.float64).numpy()
             for name, tensor in model.state_dict().items()}
    arrays = []
    for layer in (0, 1):
        arrays.append(state[f"lstm.weight_ih_l{layer}"].T)  # (in, 4H)
        arrays.append(state[f"lstm.weight_hh_l{layer}"].T)  # (H, 4H)
        arrays.append(state[f"lstm.bias_ih_l{layer}"] + state[f"lstm.bias_hh_l{layer}"])
    arrays.append(state["fc1.weight"].T)
    arrays.append(state["fc1.bias"])
    arrays.append(state["fc2.weight"].T)
    arrays.append(state["fc2.bias"])

    header = _DFW1_HEADER.pack(b"DFW1", 1, model.feature_dim, model.hidden,
                               model.fc_dim, model.out_dim, 2, model.head)
    payload = header + b"".join(np.ascontiguousarray(a, dtype="<f4").tobytes()
                                for a in arrays)

    directory = os.path.dirname(os.path.abspath(str(path))) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".dfw1.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, str(path))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
