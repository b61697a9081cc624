"""Feed-forward ReLU networks: layers, model files, regions, concrete execution.

Shapes are tuples: ``(m,)`` for flat vectors, ``(rows, cols, channels)`` for
images.  Image tensors are flattened row-major, channels last, so flat index
of ``(i, j, k)`` is ``(i * cols + j) * channels + k``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ModelFormatError, ShapeMismatchError

Shape = tuple[int, ...]


def _size(shape: Shape) -> int:
    return int(np.prod(shape))


@dataclass(frozen=True, eq=False)
class FullyConnected:
    """``relu(W x + b)``; W has one row per output neuron.

    ``out_shape`` optionally reshapes the output (e.g. to feed a max-pool).
    """

    weight: np.ndarray
    bias: np.ndarray
    relu: bool = True
    out_shape: Shape | None = None

    def __post_init__(self):
        object.__setattr__(self, "weight", np.atleast_2d(np.asarray(self.weight, dtype=float)))
        object.__setattr__(self, "bias", np.asarray(self.bias, dtype=float).reshape(-1))
        if self.out_shape is not None:
            object.__setattr__(self, "out_shape", tuple(int(s) for s in self.out_shape))

    def output_shape(self, in_shape: Shape, index: int = 0) -> Shape:
        rows, cols = self.weight.shape
        if rows != self.bias.size:
            raise ShapeMismatchError(f"weight has {rows} rows but bias has {self.bias.size} entries", index)
        if cols != _size(in_shape):
            raise ShapeMismatchError(f"weight has {cols} columns, input has {_size(in_shape)} values", index)
        if self.out_shape is not None:
            if _size(self.out_shape) != rows:
                raise ShapeMismatchError(f"out_shape {self.out_shape} does not hold {rows} values", index)
            return self.out_shape
        return (rows,)

    def affine(self, in_shape: Shape) -> tuple[np.ndarray, np.ndarray]:
        return self.weight, self.bias

    def preact(self, x: np.ndarray, in_shape: Shape) -> np.ndarray:
        return x.reshape(x.shape[0], -1) @ self.weight.T + self.bias

    def forward(self, x: np.ndarray, in_shape: Shape) -> np.ndarray:
        y = self.preact(x, in_shape)
        return np.maximum(y, 0.0) if self.relu else y


@dataclass(frozen=True, eq=False)
class Convolutional:
    """``t`` filters of shape ``(p, q, r)``, stride 1, no padding.

    ``weights`` has shape ``(t, p, q, r)`` and ``biases`` shape ``(t,)``.
    """

    weights: np.ndarray
    biases: np.ndarray
    relu: bool = True

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 4:
            raise ShapeMismatchError("convolution weights must have shape (filters, p, q, r)")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", np.asarray(self.biases, dtype=float).reshape(-1))

    def output_shape(self, in_shape: Shape, index: int = 0) -> Shape:
        if len(in_shape) != 3:
            raise ShapeMismatchError(f"convolution needs a rows x cols x channels input, got {in_shape}", index)
        t, p, q, r = self.weights.shape
        if self.biases.size != t:
            raise ShapeMismatchError(f"{t} filters but {self.biases.size} biases", index)
        rows, cols, ch = in_shape
        if r != ch:
            raise ShapeMismatchError(f"filter depth {r} does not match {ch} input channels", index)
        if p > rows or q > cols:
            raise ShapeMismatchError(f"filter {p}x{q} larger than input {rows}x{cols}", index)
        return (rows - p + 1, cols - q + 1, t)

    def affine(self, in_shape: Shape) -> tuple[np.ndarray, np.ndarray]:
        """The equivalent dense ``(W, b)`` acting on flattened vectors."""
        rows, cols, ch = in_shape
        t, p, q, r = self.weights.shape
        orows, ocols = rows - p + 1, cols - q + 1
        W = np.zeros((orows * ocols * t, rows * cols * ch))
        b = np.tile(self.biases, orows * ocols)
        for i in range(orows):
            for j in range(ocols):
                for l in range(t):
                    out = (i * ocols + j) * t + l
                    for di in range(p):
                        start = ((i + di) * cols + j) * ch
                        W[out, start:start + q * ch] = self.weights[l, di].reshape(-1)
        return W, b

    def preact(self, x: np.ndarray, in_shape: Shape) -> np.ndarray:
        n = x.shape[0]
        t, p, q, r = self.weights.shape
        img = x.reshape((n,) + tuple(in_shape))
        win = sliding_window_view(img, (p, q), axis=(1, 2))  # n, oi, oj, r, p, q
        y = np.einsum("nijrpq,tpqr->nijt", win, self.weights) + self.biases
        return y.reshape(n, -1)

    def forward(self, x: np.ndarray, in_shape: Shape) -> np.ndarray:
        y = self.preact(x, in_shape)
        return np.maximum(y, 0.0) if self.relu else y


@dataclass(frozen=True, eq=False)
class MaxPool:
    """Max over disjoint ``p x q`` tiles, per channel."""

    p: int
    q: int

    def output_shape(self, in_shape: Shape, index: int = 0) -> Shape:
        if len(in_shape) != 3:
            raise ShapeMismatchError(f"max-pool needs a rows x cols x channels input, got {in_shape}", index)
        rows, cols, ch = in_shape
        if self.p < 1 or self.q < 1 or rows % self.p or cols % self.q:
            raise ShapeMismatchError(f"pool {self.p}x{self.q} does not tile {rows}x{cols}", index)
        return (rows // self.p, cols // self.q, ch)

    def windows(self, in_shape: Shape) -> list[list[int]]:
        """Flat input indices feeding each flat output index."""
        rows, cols, ch = in_shape
        out = []
        for i in range(rows // self.p):
            for j in range(cols // self.q):
                for k in range(ch):
                    out.append([((i * self.p + a) * cols + (j * self.q + b)) * ch + k
                                for a in range(self.p) for b in range(self.q)])
        return out

    def forward(self, x: np.ndarray, in_shape: Shape) -> np.ndarray:
        n = x.shape[0]
        rows, cols, ch = in_shape
        img = x.reshape(n, rows // self.p, self.p, cols // self.q, self.q, ch)
        return img.max(axis=(2, 4)).reshape(n, -1)


Layer = Union[FullyConnected, Convolutional, MaxPool]


@dataclass(frozen=True, eq=False)
class Network:
    input_shape: Shape
    layers: tuple[Layer, ...]
    shapes: tuple[Shape, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(s) for s in self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ShapeMismatchError("network has no layers")
        shapes = [self.input_shape]
        for k, layer in enumerate(self.layers):
            shapes.append(layer.output_shape(shapes[-1], k))
        object.__setattr__(self, "shapes", tuple(shapes))

    @property
    def input_dim(self) -> int:
        return _size(self.input_shape)

    @property
    def output_dim(self) -> int:
        return _size(self.shapes[-1])

    def to_dict(self) -> dict:
        layers = []
        for layer in self.layers:
            if isinstance(layer, FullyConnected):
                d = {"type": "fc", "w": layer.weight.tolist(), "b": layer.bias.tolist(), "relu": layer.relu}
                if layer.out_shape is not None:
                    d["out_shape"] = list(layer.out_shape)
            elif isinstance(layer, Convolutional):
                t, p, q, r = layer.weights.shape
                d = {"type": "conv", "p": p, "q": q, "r": r, "relu": layer.relu,
                     "filters": [{"w": layer.weights[l].tolist(), "b": float(layer.biases[l])}
                                 for l in range(t)]}
            else:
                d = {"type": "maxpool", "p": layer.p, "q": layer.q}
            layers.append(d)
        return {"input_shape": list(self.input_shape), "layers": layers}

    def sha256(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def network_from_dict(doc: dict) -> Network:
    try:
        input_shape = tuple(int(s) for s in doc["input_shape"])
        specs = doc["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"model needs 'input_shape' and 'layers': {exc}") from None
    layers: list[Layer] = []
    for k, spec in enumerate(specs):
        try:
            kind = spec["type"]
            if kind == "fc":
                layer = FullyConnected(spec["w"], spec["b"], bool(spec.get("relu", True)), spec.get("out_shape"))
            elif kind == "conv":
                filters = spec["filters"]
                w = np.asarray([f["w"] for f in filters], dtype=float)
                expected = (len(filters), int(spec["p"]), int(spec["q"]), int(spec["r"]))
                if w.shape != expected:
                    raise ShapeMismatchError(f"filter weights have shape {w.shape[1:]}, "
                                             f"declared {expected[1:]}", k)
                layer = Convolutional(w, [f["b"] for f in filters], bool(spec.get("relu", True)))
            elif kind == "maxpool":
                layer = MaxPool(int(spec["p"]), int(spec["q"]))
            else:
                raise ModelFormatError(f"layer {k}: unknown layer type {kind!r}")
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"layer {k}: malformed layer ({exc!r})") from None
        except ValueError as exc:
            if isinstance(exc, (ShapeMismatchError, ModelFormatError)):
                raise
            raise ShapeMismatchError(str(exc), k) from None
        layers.append(layer)
    return Network(input_shape, tuple(layers))


def load_network(path: str | Path) -> Network:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    return network_from_dict(doc)


def save_network(net: Network, path: str | Path) -> None:
    Path(path).write_text(json.dumps(net.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_input(path: str | Path) -> np.ndarray:
    """Read one CSV row of floats."""
    text = Path(path).read_text(encoding="utf-8").strip()
    try:
        return np.array([float(v) for v in text.splitlines()[0].split(",")])
    except (ValueError, IndexError):
        raise ModelFormatError(f"{path}: expected one row of comma-separated floats") from None


def _batch(net: Network, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = x.reshape(1, -1) if single else x.reshape(x.shape[0], -1)
    if x.shape[1] != net.input_dim:
        raise ShapeMismatchError(f"input has {x.shape[1]} values, network expects {net.input_dim}")
    return x, single


def forward_trace(net: Network, x) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-layer ``(pre_activation, post_activation)`` arrays, flattened.

    For max-pool layers and layers without ReLU both entries coincide.
    Accepts a single input vector or a batch (one row per input).
    """
    x, single = _batch(net, x)
    trace = []
    for layer, shape in zip(net.layers, net.shapes):
        if isinstance(layer, MaxPool):
            pre = post = layer.forward(x, shape)
        else:
            pre = layer.preact(x, shape)
            post = np.maximum(pre, 0.0) if layer.relu else pre
        trace.append((pre[0], post[0]) if single else (pre, post))
        x = post
    return trace


def concrete_forward(net: Network, x) -> np.ndarray:
    """Run the network on one input vector or a batch of them."""
    x, single = _batch(net, x)
    for layer, shape in zip(net.layers, net.shapes):
        x = layer.forward(x, shape)
    return x[0] if single else x


@dataclass(frozen=True, eq=False)
class InputRegion:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("region bounds differ in length")
        if np.any(lo > hi):
            raise ValueError("region has an empty side")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x)
        return np.all((x >= self.lo) & (x <= self.hi), axis=-1)


REGION_KINDS = ("linf", "brightness")


@dataclass(frozen=True, eq=False)
class RobustnessQuery:
    x0: np.ndarray
    delta: float
    region_kind: str = "linf"
    label: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(-1))
        if self.delta < 0:
            raise ValueError(f"negative delta {self.delta}")
        if self.region_kind not in REGION_KINDS:
            raise ValueError(f"unknown region kind {self.region_kind!r}")

    def resolved_label(self, net: Network) -> int:
        if self.label is None:
            return int(np.argmax(concrete_forward(net, self.x0)))
        if not 0 <= self.label < net.output_dim:
            raise ValueError(f"label {self.label} out of range for {net.output_dim} outputs")
        return self.label


def build_region(q: RobustnessQuery) -> InputRegion:
    """Box of admissible inputs for ``q``.

    ``brightness`` lets a coordinate grow up to 1 when it already lies
    within ``delta`` of 1, and pins it otherwise.
    """
    x, d = q.x0, float(q.delta)
    if q.region_kind == "linf":
        return InputRegion(x - d, x + d)
    near_white = x >= 1.0 - d
    return InputRegion(x.copy(), np.where(near_white, np.maximum(x, 1.0), x))
