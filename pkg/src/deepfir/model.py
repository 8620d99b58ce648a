"""Recurrent filter-prediction runtime and the DFW1 weight file format.

The network is two stacked LSTM layers followed by a ReLU fully-connected
layer and a sigmoid output layer that emits either FIR taps (head 0) or
spectral mask gains (head 1). Weights are immutable after load and may be
shared across streams; each stream owns its own :class:`ModelState`.

DFW1 layout (all little-endian):

    magic "DFW1" | version u32=1 | feature_dim u32 | hidden u32 | fc_dim u32
    | out_dim u32 | num_layers u32=2 | head_tag u32 (0=taps, 1=mask)

followed by float32 arrays, kernels row-major with rows = input dimension:

    W_1 (feature_dim x 4H), U_1 (H x 4H), b_1 (4H),
    W_2 (H x 4H),           U_2 (H x 4H), b_2 (4H),
    FC1_W (H x fc_dim), FC1_b (fc_dim), FC2_W (fc_dim x out_dim), FC2_b (out_dim)

Gate blocks along the 4H axis are ordered (input, forget, cell-candidate,
output); this order is part of the format, not inherited from any training
framework.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InvalidArgument

__all__ = [
    "HEAD_MASK",
    "HEAD_TAPS",
    "FirFilter",
    "ModelState",
    "ModelWeights",
    "load_weights",
    "load_weights_file",
    "lstm_step",
    "predict_mask",
    "predict_taps",
]

MAGIC = b"DFW1"
VERSION = 1
NUM_LAYERS = 2
HEAD_TAPS = 0
HEAD_MASK = 1

_HEADER = struct.Struct("<4s7I")


@dataclass
class FirFilter:
    """A vector of real FIR taps plus the phase kind of its response.

    ``phase`` is "linear" for taps straight from the sigmoid head (the
    trained network approximates a linear-phase response) and "minimum"
    after homomorphic conversion.
    """

    taps: np.ndarray
    phase: str = "linear"

    def __post_init__(self) -> None:
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if self.taps.ndim != 1 or self.taps.shape[0] < 1:
            raise InvalidArgument("filter taps must be a nonempty 1-D vector")
        if not np.all(np.isfinite(self.taps)):
            raise InvalidArgument("filter taps must be finite")
        if self.phase not in ("linear", "minimum"):
            raise InvalidArgument(f"unknown phase kind {self.phase!r}")

    def __len__(self) -> int:
        return self.taps.shape[0]


@dataclass
class ModelState:
    """Per-stream recurrent state: hidden and cell vectors for both layers."""

    h1: np.ndarray
    c1: np.ndarray
    h2: np.ndarray
    c2: np.ndarray

    @classmethod
    def zeros(cls, hidden: int) -> "ModelState":
        return cls(*(np.zeros(hidden, dtype=np.float64) for _ in range(4)))


@dataclass(frozen=True)
class ModelWeights:
    """Immutable network parameters; see module docstring for the layout."""

    w1: np.ndarray
    u1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    u2: np.ndarray
    b2: np.ndarray
    fc1_w: np.ndarray
    fc1_b: np.ndarray
    fc2_w: np.ndarray
    fc2_b: np.ndarray
    head: int = HEAD_TAPS

    @property
    def feature_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.u1.shape[0]

    @property
    def fc_dim(self) -> int:
        return self.fc1_w.shape[1]

    @property
    def out_dim(self) -> int:
        return self.fc2_w.shape[1]

    @property
    def param_count(self) -> int:
        f, h, fc, out = self.feature_dim, self.hidden, self.fc_dim, self.out_dim
        return 4 * h * (f + h + 1) + 4 * h * (2 * h + 1) + h * fc + fc + fc * out + out

    def validate(self) -> None:
        f, h, fc, out = self.feature_dim, self.hidden, self.fc_dim, self.out_dim
        expected = {
            "w1": (f, 4 * h), "u1": (h, 4 * h), "b1": (4 * h,),
            "w2": (h, 4 * h), "u2": (h, 4 * h), "b2": (4 * h,),
            "fc1_w": (h, fc), "fc1_b": (fc,),
            "fc2_w": (fc, out), "fc2_b": (out,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise FormatError(f"array {name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise FormatError(f"array {name} contains non-finite values")
        if self.head not in (HEAD_TAPS, HEAD_MASK):
            raise FormatError(f"unknown head tag {self.head}")

    # -- serialization ------------------------------------------------------

    def _arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.u1, self.b1, self.w2, self.u2, self.b2,
                self.fc1_w, self.fc1_b, self.fc2_w, self.fc2_b)

    def to_bytes(self) -> bytes:
        self.validate()
        header = _HEADER.pack(MAGIC, VERSION, self.feature_dim, self.hidden,
                              self.fc_dim, self.out_dim, NUM_LAYERS, self.head)
        body = b"".join(np.ascontiguousarray(a, dtype="<f4").tobytes() for a in self._arrays())
        return header + body

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def _array_shapes(f: int, h: int, fc: int, out: int) -> list[tuple[int, ...]]:
    return [(f, 4 * h), (h, 4 * h), (4 * h,), (h, 4 * h), (h, 4 * h), (4 * h,),
            (h, fc), (fc,), (fc, out), (out,)]


def load_weights(data: bytes) -> ModelWeights:
    """Parse a DFW1 byte string into :class:`ModelWeights`.

    Raises :class:`FormatError` on bad magic, unsupported version, truncated
    or oversized payload, inconsistent dimensions, or non-finite values.
    """
    if len(data) < _HEADER.size:
        raise FormatError(f"file too short for header: {len(data)} bytes")
    magic, version, f, h, fc, out, layers, head = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if layers != NUM_LAYERS:
        raise FormatError(f"unsupported layer count {layers}, expected {NUM_LAYERS}")
    if head not in (HEAD_TAPS, HEAD_MASK):
        raise FormatError(f"unknown head tag {head}")
    if min(f, h, fc, out) < 1:
        raise FormatError(f"non-positive dimension in header: {(f, h, fc, out)}")

    shapes = _array_shapes(f, h, fc, out)
    total = sum(int(np.prod(s)) for s in shapes)
    expected_len = _HEADER.size + 4 * total
    if len(data) != expected_len:
        raise FormatError(f"payload is {len(data)} bytes, expected {expected_len}")

    flat = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).astype(np.float64)
    arrays, pos = [], 0
    for shape in shapes:
        n = int(np.prod(shape))
        arrays.append(flat[pos:pos + n].reshape(shape))
        pos += n
    weights = ModelWeights(*arrays, head=head)
    weights.validate()
    return weights


def load_weights_file(path) -> ModelWeights:
    with open(path, "rb") as fh:
        return load_weights(fh.read())


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _cell(x, h, c, w, u, b, hidden):
    z = x @ w + h @ u + b
    i = _sigmoid(z[:hidden])
    f = _sigmoid(z[hidden:2 * hidden])
    g = np.tanh(z[2 * hidden:3 * hidden])
    o = _sigmoid(z[3 * hidden:])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def lstm_step(weights: ModelWeights, state: ModelState, features: np.ndarray
              ) -> tuple[ModelState, np.ndarray]:
    """Advance both LSTM layers one step; returns (new state, top-layer output).

    Pure function of (weights, state, input); the passed-in state is not
    mutated.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (weights.feature_dim,):
        raise InvalidArgument(
            f"feature vector has shape {features.shape}, expected ({weights.feature_dim},)"
        )
    hidden = weights.hidden
    h1, c1 = _cell(features, state.h1, state.c1, weights.w1, weights.u1, weights.b1, hidden)
    h2, c2 = _cell(h1, state.h2, state.c2, weights.w2, weights.u2, weights.b2, hidden)
    return ModelState(h1, c1, h2, c2), h2


def _head_forward(weights: ModelWeights, state: ModelState, features: np.ndarray
                  ) -> tuple[ModelState, np.ndarray]:
    state, top = lstm_step(weights, state, features)
    hidden_fc = np.maximum(top @ weights.fc1_w + weights.fc1_b, 0.0)
    return state, _sigmoid(hidden_fc @ weights.fc2_w + weights.fc2_b)


def predict_taps(weights: ModelWeights, state: ModelState, features: np.ndarray
                 ) -> tuple[ModelState, FirFilter]:
    """One inference step of the tap head: features in, 128 sigmoid taps out."""
    if weights.head != HEAD_TAPS:
        raise InvalidArgument("weights carry a mask head; cannot predict FIR taps")
    state, out = _head_forward(weights, state, features)
    return state, FirFilter(out, phase="linear")


def predict_mask(weights: ModelWeights, state: ModelState, features: np.ndarray
                 ) -> tuple[ModelState, np.ndarray]:
    """One inference step of the mask head: features in, per-bin gains in [0, 1] out."""
    if weights.head != HEAD_MASK:
        raise InvalidArgument("weights carry a tap head; cannot predict a spectral mask")
    return _head_forward(weights, state, features)
