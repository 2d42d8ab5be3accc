"""Backward symbolic bound propagation over the input box.

Every hidden pre-activation (and any linear functional of the outputs) is
expressed as a pair of linear functions of the network input by repeatedly
replacing activation outputs with their relaxation lines: the upper line
where the accumulated coefficient is positive, the lower line where it is
negative. The exact extremum of the resulting linear function over the box
is then a sound bound. Hidden layers are processed in order because each
layer's relaxations feed the substitution for the next one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import InputRegion, Network
from .relaxation import LinearRelaxation, relax_arrays

STRATEGIES = ("dual", "single")


@dataclass(frozen=True)
class SymbolicBound:
    """Linear function of the network input: coeffs . x + offset."""

    coeffs: np.ndarray
    offset: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.ndim != 1:
            raise ValueError("coeffs must be a vector")
        if not (np.isfinite(c).all() and np.isfinite(self.offset)):
            raise ValueError("non-finite symbolic bound")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "offset", float(self.offset))


@dataclass
class LayerBounds:
    """Per hidden layer: over-domains, used under-domains, relaxation lines."""

    strategy: str
    l_over: list = field(default_factory=list)
    u_over: list = field(default_factory=list)
    l_under: list = field(default_factory=list)
    u_under: list = field(default_factory=list)
    alpha_l: list = field(default_factory=list)
    beta_l: list = field(default_factory=list)
    alpha_u: list = field(default_factory=list)
    beta_u: list = field(default_factory=list)

    @property
    def num_layers(self) -> int:
        return len(self.l_over)

    def relaxation(self, layer: int, neuron: int) -> LinearRelaxation:
        return LinearRelaxation(
            alpha_l=float(self.alpha_l[layer][neuron]),
            beta_l=float(self.beta_l[layer][neuron]),
            alpha_u=float(self.alpha_u[layer][neuron]),
            beta_u=float(self.beta_u[layer][neuron]),
            domain=(float(self.l_over[layer][neuron]), float(self.u_over[layer][neuron])),
        )


def concretize(sb: SymbolicBound, region: InputRegion, direction: str) -> float:
    """Exact extremum of a linear function over the perturbation box."""
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    if sb.coeffs.shape[0] != region.dim:
        raise ValueError(
            f"coefficient length {sb.coeffs.shape[0]} does not match region dim {region.dim}"
        )
    center, radii = region.box_center_radii()
    base = float(sb.coeffs @ center)
    span = float(np.abs(sb.coeffs) @ radii)
    if direction == "min":
        return base - span + sb.offset
    return base + span + sb.offset


def _substitute(net: Network, lb: LayerBounds, a_up, c_up, a_lo, c_lo, top_layer: int):
    """Push coefficient matrices over activations of layer ``top_layer`` down to the input."""
    for j in range(top_layer, -1, -1):
        al, bl = lb.alpha_l[j], lb.beta_l[j]
        au, bu = lb.alpha_u[j], lb.beta_u[j]

        pos = np.maximum(a_up, 0.0)
        neg = np.minimum(a_up, 0.0)
        c_up = c_up + pos @ bu + neg @ bl
        a_up = pos * au + neg * al

        pos = np.maximum(a_lo, 0.0)
        neg = np.minimum(a_lo, 0.0)
        c_lo = c_lo + pos @ bl + neg @ bu
        a_lo = pos * al + neg * au

        layer = net.layers[j]
        c_up = c_up + a_up @ layer.bias
        a_up = a_up @ layer.weights
        c_lo = c_lo + a_lo @ layer.bias
        a_lo = a_lo @ layer.weights
    return a_up, c_up, a_lo, c_lo


def _concretize_arrays(a, c, center, radii, direction: str):
    base = a @ center
    span = np.abs(a) @ radii
    if direction == "min":
        return base - span + c
    return base + span + c


def propagate(net: Network, region: InputRegion, under=None, strategy: str = "dual") -> LayerBounds:
    """Over-domains and relaxations for every hidden neuron, layer by layer."""
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    if (under is None) == (strategy == "dual"):
        raise ValueError("under-bounds are required exactly when strategy is 'dual'")
    if region.dim != net.input_dim:
        raise ValueError(f"region dim {region.dim} does not match network input {net.input_dim}")
    if under is not None and under.widths() != net.hidden_widths:
        raise ValueError(
            f"under-bounds widths {under.widths()} do not match network {net.hidden_widths}"
        )

    center, radii = region.box_center_radii()
    lb = LayerBounds(strategy=strategy)
    for i, layer in enumerate(net.hidden_layers):
        a_up = layer.weights.copy()
        c_up = layer.bias.copy()
        a_lo = layer.weights.copy()
        c_lo = layer.bias.copy()
        a_up, c_up, a_lo, c_lo = _substitute(net, lb, a_up, c_up, a_lo, c_lo, i - 1)
        u_over = _concretize_arrays(a_up, c_up, center, radii, "max")
        l_over = _concretize_arrays(a_lo, c_lo, center, radii, "min")
        u_over = np.maximum(u_over, l_over)

        if strategy == "dual":
            l_used = np.clip(under.lower[i], l_over, u_over)
            u_used = np.clip(under.upper[i], l_over, u_over)
            l_used = np.minimum(l_used, u_used)
        else:
            l_used, u_used = l_over, u_over

        alpha_l, beta_l, alpha_u, beta_u = relax_arrays(
            layer.activation, l_over, u_over, l_used, u_used
        )
        lb.l_over.append(l_over)
        lb.u_over.append(u_over)
        lb.l_under.append(l_used)
        lb.u_under.append(u_used)
        lb.alpha_l.append(alpha_l)
        lb.beta_l.append(beta_l)
        lb.alpha_u.append(alpha_u)
        lb.beta_u.append(beta_u)
    return lb


def margin_lower_bounds(net: Network, region: InputRegion, lb: LayerBounds, c: int) -> dict:
    """Sound lower bounds on min of F_c - F_ell, for every ell != c at once."""
    n_out = net.output_dim
    if not 0 <= c < n_out:
        raise ValueError(f"label must be in [0, {n_out}), got {c}")
    if lb.num_layers != net.num_hidden:
        raise ValueError("layer bounds do not match this network")
    others = [ell for ell in range(n_out) if ell != c]
    if not others:
        return {}
    final = net.layers[-1]
    a0 = final.weights[c][None, :] - final.weights[others]
    c0 = final.bias[c] - final.bias[others]
    _, _, a_lo, c_lo = _substitute(
        net, lb, a0.copy(), c0.copy(), a0.copy(), c0.copy(), net.num_hidden - 1
    )
    center, radii = region.box_center_radii()
    values = _concretize_arrays(a_lo, c_lo, center, radii, "min")
    return {ell: float(v) for ell, v in zip(others, values)}


def output_margin_lower_bound(
    net: Network, region: InputRegion, lb: LayerBounds, c: int, ell: int
) -> float:
    """Sound lower bound on min over the box of F_c(x) - F_ell(x)."""
    n_out = net.output_dim
    if not (0 <= c < n_out and 0 <= ell < n_out):
        raise ValueError(f"labels must be in [0, {n_out}), got c={c}, ell={ell}")
    if c == ell:
        raise ValueError("margin labels must differ")
    if lb.num_layers != net.num_hidden:
        raise ValueError("layer bounds do not match this network")

    final = net.layers[-1]
    a0 = (final.weights[c] - final.weights[ell])[None, :]
    c0 = np.array([final.bias[c] - final.bias[ell]])
    _, _, a_lo, c_lo = _substitute(
        net, lb, a0.copy(), c0.copy(), a0.copy(), c0.copy(), net.num_hidden - 1
    )
    center, radii = region.box_center_radii()
    return float(_concretize_arrays(a_lo, c_lo, center, radii, "min")[0])
