"""Random benchmark networks and instances.

Used by the test suite, the acceptance experiments and the demo scripts in
place of exported trained models. Weights are drawn N(0, 1)/sqrt(fan_in) so
pre-activations stay in the interesting nonlinear range regardless of
width.
"""
from __future__ import annotations

import numpy as np

from .activations import KINDS
from .model import AffineLayer, Network


def random_network(
    seed: int,
    input_dim: int,
    hidden_widths,
    output_dim: int,
    activation: str = "sigmoid",
    bias_scale: float = 1.0,
    output_bias_scale: float = 0.0,
) -> Network:
    """Fully-connected network with scaled Gaussian weights.

    Output-layer biases default to zero so margins are driven by the inputs
    rather than by constant offsets, which keeps random classifiers from
    degenerating into constant ones.
    """
    if activation not in KINDS:
        raise ValueError(f"activation must be one of {KINDS}")
    rng = np.random.default_rng(seed)
    dims = [int(input_dim), *[int(w) for w in hidden_widths], int(output_dim)]
    layers = []
    for i in range(len(dims) - 1):
        fan_in, fan_out = dims[i], dims[i + 1]
        last = i == len(dims) - 2
        w = rng.normal(0.0, 1.0, size=(fan_out, fan_in)) / np.sqrt(fan_in)
        scale = output_bias_scale if last else bias_scale
        b = rng.normal(0.0, scale, size=fan_out) if scale > 0.0 else np.zeros(fan_out)
        layers.append(AffineLayer(weights=w, bias=b, activation="linear" if last else activation))
    return Network(layers=tuple(layers))


def random_inputs(seed: int, net: Network, count: int, low: float = 0.0, high: float = 1.0):
    """Uniform random inputs in [low, high]^n."""
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=(count, net.input_dim))
