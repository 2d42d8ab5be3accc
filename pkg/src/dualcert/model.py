"""Network representation, JSON I/O, exact evaluation and input gradients.

A network is an ordered list of affine layers. Every layer except the last
carries an S-curve activation; the last is purely affine ("linear"). Hidden
layers are indexed from 0, so ``preactivation(net, 0, r, x)`` is the input
to the r-th activation of the first hidden layer.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .activations import KINDS, derivative, value

NETWORK_FORMAT = "dualcert-net-v1"

_VALID_ACTIVATIONS = KINDS + ("linear",)


class NetworkFormatError(ValueError):
    """Malformed network file or inconsistent layer data."""


@dataclass(frozen=True)
class AffineLayer:
    """One affine map plus the activation applied to its output.

    weights has shape (out_neurons, in_neurons); bias has length out_neurons.
    """

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise NetworkFormatError(f"weights must be a matrix, got ndim={w.ndim}")
        if b.ndim != 1 or b.shape[0] != w.shape[0]:
            raise NetworkFormatError(
                f"bias length {b.shape} does not match weight rows {w.shape[0]}"
            )
        if self.activation not in _VALID_ACTIVATIONS:
            raise NetworkFormatError(
                f"unknown activation {self.activation!r}; expected one of {_VALID_ACTIVATIONS}"
            )
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise NetworkFormatError("non-finite entry in weights or bias")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class Network:
    """Fully-connected network: hidden S-curve layers followed by a linear layer."""

    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise NetworkFormatError("network needs at least one layer")
        for idx, layer in enumerate(layers):
            if not isinstance(layer, AffineLayer):
                raise NetworkFormatError(f"layer {idx} is not an AffineLayer")
            if idx > 0 and layer.in_dim != layers[idx - 1].out_dim:
                raise NetworkFormatError(
                    f"layer {idx}: weight columns {layer.in_dim} do not match "
                    f"layer {idx - 1} output size {layers[idx - 1].out_dim}"
                )
            expect_hidden = idx < len(layers) - 1
            if expect_hidden and layer.activation not in KINDS:
                raise NetworkFormatError(
                    f"layer {idx}: hidden layers need an S-curve activation, "
                    f"got {layer.activation!r}"
                )
            if not expect_hidden and layer.activation != "linear":
                raise NetworkFormatError(
                    f"layer {idx}: final layer must have activation 'linear', "
                    f"got {layer.activation!r}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def num_hidden(self) -> int:
        return len(self.layers) - 1

    @property
    def hidden_layers(self) -> tuple:
        return self.layers[:-1]

    @property
    def hidden_widths(self) -> tuple:
        return tuple(layer.out_dim for layer in self.hidden_layers)


@dataclass(frozen=True)
class InputRegion:
    """l-infinity ball around ``center`` with ``radius``, optionally clamped.

    The clamp, when present, is a global (lo, hi) interval applied to every
    coordinate, e.g. (0.0, 1.0) for normalized images.
    """

    center: np.ndarray
    radius: float
    clamp: Optional[tuple] = None

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.ndim != 1:
            raise ValueError("center must be a vector")
        if not np.isfinite(c).all():
            raise ValueError("non-finite center")
        r = float(self.radius)
        if not (r >= 0.0):
            raise ValueError(f"radius must be >= 0, got {r}")
        if self.clamp is not None:
            lo, hi = float(self.clamp[0]), float(self.clamp[1])
            if not lo < hi:
                raise ValueError(f"clamp lower bound {lo} must be below upper bound {hi}")
            if np.any(c < lo) or np.any(c > hi):
                raise ValueError("center lies outside the clamp interval")
            object.__setattr__(self, "clamp", (lo, hi))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def bounds(self):
        """Componentwise (lo, hi) arrays of the perturbation box."""
        lo = self.center - self.radius
        hi = self.center + self.radius
        if self.clamp is not None:
            lo = np.maximum(lo, self.clamp[0])
            hi = np.minimum(hi, self.clamp[1])
        return lo, hi

    def box_center_radii(self):
        """Box center and per-coordinate half-widths used for concretization."""
        if self.clamp is None:
            return self.center, np.full(self.dim, self.radius)
        lo, hi = self.bounds()
        return 0.5 * (lo + hi), 0.5 * (hi - lo)

    def clip(self, x: np.ndarray) -> np.ndarray:
        """Project x componentwise onto the perturbation box."""
        lo, hi = self.bounds()
        return np.clip(x, lo, hi)

    def contains(self, x: np.ndarray, slack: float = 1e-12) -> bool:
        lo, hi = self.bounds()
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= lo - slack) and np.all(x <= hi + slack))


def _as_vector(x, dim: int, what: str = "input") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise ValueError(f"{what} must be a vector of length {dim}, got shape {arr.shape}")
    return arr


def load_network(path) -> Network:
    """Load and validate a network from a dualcert-net-v1 JSON file.

    Raises NetworkFormatError with a layer index for shape mismatches,
    unknown activation names, or non-finite entries. Unknown top-level keys
    (e.g. converter metadata) are ignored.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or raw.get("format") != NETWORK_FORMAT:
        raise NetworkFormatError(
            f"{path}: expected format {NETWORK_FORMAT!r}, got {raw.get('format')!r}"
            if isinstance(raw, dict)
            else f"{path}: top-level JSON value must be an object"
        )
    try:
        input_dim = int(raw["input_dim"])
        entries = raw["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkFormatError(f"{path}: missing or invalid input_dim / layers") from exc
    if not isinstance(entries, list) or not entries:
        raise NetworkFormatError(f"{path}: layers must be a non-empty list")

    layers = []
    prev = input_dim
    for idx, entry in enumerate(entries):
        if not isinstance(entry, dict) or entry.get("type") != "dense":
            raise NetworkFormatError(f"{path}: layer {idx}: only type 'dense' is supported")
        try:
            w = np.asarray(entry["weights"], dtype=np.float64)
            b = np.asarray(entry["bias"], dtype=np.float64)
            act = entry["activation"]
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkFormatError(f"{path}: layer {idx}: {exc}") from exc
        try:
            layer = AffineLayer(weights=w, bias=b, activation=act)
        except NetworkFormatError as exc:
            raise NetworkFormatError(f"{path}: layer {idx}: {exc}") from exc
        if layer.in_dim != prev:
            raise NetworkFormatError(
                f"{path}: layer {idx}: weight columns {layer.in_dim} do not match "
                f"preceding width {prev}"
            )
        prev = layer.out_dim
        layers.append(layer)
    try:
        return Network(layers=tuple(layers))
    except NetworkFormatError as exc:
        raise NetworkFormatError(f"{path}: {exc}") from exc


def save_network(net: Network, path) -> None:
    """Write a network as dualcert-net-v1 JSON."""
    doc = {
        "format": NETWORK_FORMAT,
        "input_dim": net.input_dim,
        "layers": [
            {
                "type": "dense",
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            for layer in net.layers
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def forward(net: Network, x) -> np.ndarray:
    """Evaluate the network. Accepts a vector or a batch of row vectors."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] != net.input_dim:
        raise ValueError(
            f"input has {arr.shape[-1] if arr.ndim else 0} features, expected {net.input_dim}"
        )
    cur = arr
    for layer in net.layers:
        cur = cur @ layer.weights.T + layer.bias
        if layer.activation != "linear":
            cur = value(layer.activation, cur)
    return cur


def hidden_preactivations(net: Network, x) -> list:
    """Pre-activation vectors of every hidden layer (batch friendly)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] != net.input_dim:
        raise ValueError(f"input must have {net.input_dim} features, got {arr.shape[-1]}")
    zs = []
    cur = arr
    for layer in net.hidden_layers:
        z = cur @ layer.weights.T + layer.bias
        zs.append(z)
        cur = value(layer.activation, z)
    return zs


def preactivation(net: Network, layer: int, neuron: int, x) -> float:
    """Input to the activation of the given hidden neuron, z_r at layer i."""
    _check_hidden_index(net, layer, neuron)
    arr = _as_vector(x, net.input_dim)
    cur = arr
    for j in range(layer + 1):
        lyr = net.layers[j]
        z = lyr.weights @ cur + lyr.bias
        if j == layer:
            return float(z[neuron])
        cur = value(lyr.activation, z)
    raise AssertionError("unreachable")


def preactivation_gradient(net: Network, layer: int, neuron: int, x) -> np.ndarray:
    """Gradient of the hidden pre-activation with respect to the input.

    Reverse accumulation over the stored layer pre-activations; exact up to
    float rounding, no numerical differentiation involved.
    """
    _check_hidden_index(net, layer, neuron)
    arr = _as_vector(x, net.input_dim)
    zs = []
    cur = arr
    for j in range(layer):
        lyr = net.layers[j]
        z = lyr.weights @ cur + lyr.bias
        zs.append(z)
        cur = value(lyr.activation, z)
    grad = net.layers[layer].weights[neuron].copy()
    for j in range(layer - 1, -1, -1):
        lyr = net.layers[j]
        grad = (grad * np.asarray(derivative(lyr.activation, zs[j]))) @ lyr.weights
    return grad


def output_jacobian(net: Network, x) -> np.ndarray:
    """Jacobian of the network output at x, shape (output_dim, input_dim)."""
    arr = _as_vector(x, net.input_dim)
    zs = hidden_preactivations(net, arr)
    jac = net.layers[-1].weights.copy()
    for j in range(net.num_hidden - 1, -1, -1):
        lyr = net.layers[j]
        jac = (jac * np.asarray(derivative(lyr.activation, zs[j]))) @ lyr.weights
    return jac


def predict(net: Network, x) -> int:
    """Index of the maximal output; ties go to the lowest index."""
    out = forward(net, _as_vector(x, net.input_dim))
    return int(np.argmax(out))


def _check_hidden_index(net: Network, layer: int, neuron: int) -> None:
    if not 0 <= layer < net.num_hidden:
        raise IndexError(f"hidden layer index {layer} out of range [0, {net.num_hidden})")
    width = net.layers[layer].out_dim
    if not 0 <= neuron < width:
        raise IndexError(f"neuron index {neuron} out of range [0, {width}) at layer {layer}")
