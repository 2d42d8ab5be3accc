"""Witnessed under-estimates of hidden pre-activation domains.

Both strategies only ever record pre-activation values attained by concrete
inputs inside the perturbation box, so the resulting intervals are always
nested inside the true reachable domains. One witness input per recorded
bound is kept so soundness can be re-checked by direct evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .activations import derivative, value
from .model import InputRegion, Network, hidden_preactivations


@dataclass(frozen=True)
class UnderConfig:
    """Knobs for the under-approximation pass.

    Defaults follow the regime where the bounds stop improving: about a
    thousand samples, and a gradient step of 0.45 times the radius.
    """

    strategy: str = "sampling"  # sampling | gradient | both
    n_samples: int = 1000
    step_fraction: float = 0.45
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in ("sampling", "gradient", "both"):
            raise ValueError(f"unknown under-approximation strategy {self.strategy!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0.0 < self.step_fraction <= 1.0:
            raise ValueError("step_fraction must be in (0, 1]")


@dataclass
class UnderBounds:
    """Per hidden layer: witnessed lower/upper pre-activation bounds.

    lower[i][r] is attained by the input lower_witness[i][r], and likewise
    for the upper side.
    """

    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    lower_witness: list = field(default_factory=list)
    upper_witness: list = field(default_factory=list)

    @property
    def num_layers(self) -> int:
        return len(self.lower)

    def widths(self) -> tuple:
        return tuple(arr.shape[0] for arr in self.lower)


def sample_under(net: Network, region: InputRegion, n: int, seed: int) -> UnderBounds:
    """Track per-neuron min/max pre-activations over n box samples.

    Sample 0 is always the region center; the remaining n - 1 are drawn
    uniformly from the box. Deterministic given the seed, and the sample
    stream is a prefix of any longer run with the same seed.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    lo, hi = region.bounds()
    rng = np.random.default_rng(seed)
    xs = np.empty((n, region.dim))
    xs[0] = region.center
    if n > 1:
        xs[1:] = lo + rng.random((n - 1, region.dim)) * (hi - lo)

    out = UnderBounds()
    cur = xs
    for layer in net.hidden_layers:
        z = cur @ layer.weights.T + layer.bias
        imin = np.argmin(z, axis=0)
        imax = np.argmax(z, axis=0)
        cols = np.arange(z.shape[1])
        out.lower.append(z[imin, cols])
        out.upper.append(z[imax, cols])
        out.lower_witness.append(xs[imin])
        out.upper_witness.append(xs[imax])
        cur = value(layer.activation, z)
    return out


def gradient_under(net: Network, region: InputRegion, step_fraction: float) -> UnderBounds:
    """One signed-gradient step per neuron and direction.

    For each hidden neuron the input moves by step_fraction * radius along
    the negative (positive) sign of its pre-activation gradient at the
    center, is projected back onto the box, and the evaluation there is
    recorded as the lower (upper) bound. The center value is kept as a
    fallback so the interval is never empty; zero-gradient coordinates stay
    unperturbed.
    """
    if not 0.0 < step_fraction <= 1.0:
        raise ValueError("step_fraction must be in (0, 1]")
    x0 = region.center
    step = step_fraction * region.radius
    z0s = hidden_preactivations(net, x0)

    out = UnderBounds()
    jac = None
    for i, layer in enumerate(net.hidden_layers):
        if i == 0:
            jac = layer.weights.copy()
        else:
            prev = net.layers[i - 1]
            scale = np.asarray(derivative(prev.activation, z0s[i - 1]))
            jac = layer.weights @ (scale[:, None] * jac)
        eta = np.sign(jac)
        x_lower = region.clip(x0[None, :] - step * eta)
        x_upper = region.clip(x0[None, :] + step * eta)
        z_lower = _preact_diagonal(net, i, x_lower)
        z_upper = _preact_diagonal(net, i, x_upper)
        z_center = z0s[i]

        lower = np.minimum(z_lower, z_center)
        upper = np.maximum(z_upper, z_center)
        out.lower.append(lower)
        out.upper.append(upper)
        out.lower_witness.append(np.where((z_lower <= z_center)[:, None], x_lower, x0[None, :]))
        out.upper_witness.append(np.where((z_upper >= z_center)[:, None], x_upper, x0[None, :]))
    return out


def _preact_diagonal(net: Network, layer_index: int, xs: np.ndarray) -> np.ndarray:
    """z_r at ``layer_index`` for row r of xs (one tailored input per neuron)."""
    cur = xs
    for j in range(layer_index + 1):
        lyr = net.layers[j]
        z = cur @ lyr.weights.T + lyr.bias
        if j == layer_index:
            return np.einsum("ii->i", z).copy()
        cur = value(lyr.activation, z)
    raise AssertionError("unreachable")


def combine(a: UnderBounds, b: UnderBounds) -> UnderBounds:
    """Elementwise envelope of two witnessed bounds (min lower, max upper)."""
    if a.widths() != b.widths():
        raise ValueError(f"shape mismatch: {a.widths()} vs {b.widths()}")
    out = UnderBounds()
    for i in range(a.num_layers):
        take_a_low = a.lower[i] <= b.lower[i]
        take_a_up = a.upper[i] >= b.upper[i]
        out.lower.append(np.where(take_a_low, a.lower[i], b.lower[i]))
        out.upper.append(np.where(take_a_up, a.upper[i], b.upper[i]))
        out.lower_witness.append(
            np.where(take_a_low[:, None], a.lower_witness[i], b.lower_witness[i])
        )
        out.upper_witness.append(
            np.where(take_a_up[:, None], a.upper_witness[i], b.upper_witness[i])
        )
    return out


def compute_under(net: Network, region: InputRegion, cfg: UnderConfig) -> UnderBounds:
    """Run the configured under-approximation strategy."""
    if cfg.strategy == "sampling":
        return sample_under(net, region, cfg.n_samples, cfg.seed)
    if cfg.strategy == "gradient":
        return gradient_under(net, region, cfg.step_fraction)
    return combine(
        sample_under(net, region, cfg.n_samples, cfg.seed),
        gradient_under(net, region, cfg.step_fraction),
    )
