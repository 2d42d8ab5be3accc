"""S-curve scalar functions and tangent-line constructions.

Only bounded, strictly increasing activations with a single inflection
point at 0 are supported: sigmoid, tanh and arctan. Each is convex on
(-inf, 0] and concave on [0, inf), which is what the relaxation case
analysis relies on. Everything here is elementwise and accepts floats or
numpy arrays; float inputs give float outputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("sigmoid", "tanh", "arctan")

# Interval widths below this are treated as a point (chord -> derivative).
DEGENERATE_WIDTH = 1e-9
# Accepted residual of the crossing-tangent defect at the returned point.
ROOT_TOL = 1e-10
_MAX_BISECT = 200


class NoSignChangeError(ValueError):
    """The bracket handed to crossing_tangent does not straddle a root.

    This signals a logic bug in the caller (a bracket on the wrong side of
    the inflection), not bad user input.
    """


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"unknown activation kind {kind!r}; expected one of {KINDS}")


def value(kind: str, x):
    """Evaluate the activation elementwise.

    The sigmoid uses the sign-split form exp(-|x|) so it never overflows,
    even for |x| in the hundreds.
    """
    _check_kind(kind)
    xs = np.asarray(x, dtype=np.float64)
    if kind == "sigmoid":
        e = np.exp(-np.abs(xs))
        out = np.where(xs >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    elif kind == "tanh":
        out = np.tanh(xs)
    else:
        out = np.arctan(xs)
    return float(out) if out.ndim == 0 else out


def derivative(kind: str, x):
    """First derivative of the activation, elementwise."""
    _check_kind(kind)
    xs = np.asarray(x, dtype=np.float64)
    if kind == "sigmoid":
        s = np.asarray(value(kind, xs))
        out = s * (1.0 - s)
    elif kind == "tanh":
        t = np.tanh(xs)
        out = 1.0 - t * t
    else:
        out = 1.0 / (1.0 + xs * xs)
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def chord_slope(kind: str, l, u):
    """Slope of the chord from (l, f(l)) to (u, f(u)), elementwise.

    Near-degenerate intervals (u - l < 1e-9) fall back to the midpoint
    derivative, the continuous limit of the chord.
    """
    _check_kind(kind)
    la = np.asarray(l, dtype=np.float64)
    ua = np.asarray(u, dtype=np.float64)
    width = ua - la
    mid_slope = np.asarray(derivative(kind, 0.5 * (la + ua)))
    with np.errstate(divide="ignore", invalid="ignore"):
        chord = (np.asarray(value(kind, ua)) - np.asarray(value(kind, la))) / width
    out = np.where(width < DEGENERATE_WIDTH, mid_slope, chord)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TangentLine:
    """Line y = slope * x + intercept tangent to the curve at ``point``."""

    point: float
    slope: float
    intercept: float

    def __call__(self, x):
        return self.slope * x + self.intercept


def tangent_at(kind: str, d: float) -> TangentLine:
    """Tangent line of the activation at abscissa d."""
    s = float(derivative(kind, d))
    return TangentLine(point=float(d), slope=s, intercept=float(value(kind, d)) - s * float(d))


def crossing_defect(kind: str, d, anchor):
    """Signed gap between the tangent at d, evaluated at ``anchor``, and the curve.

    g(d) = f'(d) (anchor - d) + f(d) - f(anchor). A root of g is a tangency
    point whose tangent passes through (anchor, f(anchor)); those roots mark
    the boundary between sound and unsound endpoint tangents.
    """
    return (
        np.asarray(derivative(kind, d)) * (np.asarray(anchor) - np.asarray(d))
        + np.asarray(value(kind, d))
        - np.asarray(value(kind, anchor))
    )


def crossing_tangent(kind: str, anchor: float, search_lo: float, search_hi: float) -> TangentLine:
    """Tangent whose line passes through (anchor, f(anchor)).

    Bisects the crossing defect on [search_lo, search_hi] until the residual
    is below 1e-10 (at most 200 iterations). A root sitting on a bracket
    edge is accepted as-is. Raises NoSignChangeError when the defect has the
    same sign at both ends of the bracket.
    """
    _check_kind(kind)
    lo = float(search_lo)
    hi = float(search_hi)
    if lo > hi:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    g_lo = float(crossing_defect(kind, lo, anchor))
    g_hi = float(crossing_defect(kind, hi, anchor))
    if abs(g_lo) <= ROOT_TOL:
        return tangent_at(kind, lo)
    if abs(g_hi) <= ROOT_TOL:
        return tangent_at(kind, hi)
    if (g_lo < 0.0) == (g_hi < 0.0):
        raise NoSignChangeError(
            f"crossing defect has no sign change on [{lo}, {hi}] (anchor {anchor}, kind {kind})"
        )
    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        g_mid = float(crossing_defect(kind, mid, anchor))
        if abs(g_mid) <= ROOT_TOL:
            return tangent_at(kind, mid)
        if (g_mid < 0.0) == (g_lo < 0.0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return tangent_at(kind, mid)
