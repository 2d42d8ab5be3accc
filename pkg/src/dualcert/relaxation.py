"""Sound linear bounds for S-curve activations on an interval.

Every hidden neuron gets a pair of lines that sandwich its activation on an
overestimated pre-activation domain [l_over, u_over]. When a witnessed
underestimated domain [l_under, u_under] is available it guides where the
tangent lines touch the curve: the tangency points move from the
over-domain endpoints toward the under-domain endpoints, which tightens the
bounds where the reachable values actually live. Soundness on the full
over-domain is preserved by the crossing-tangent threshold tests and a grid
audit backstop.

Case split, with k the chord slope of the over-domain and f' the activation
derivative:

* Case I   (f'(l_over) < k < f'(u_over)): chord on top, tangent below.
* Case II  (f'(l_over) > k > f'(u_over)): chord below, tangent on top.
* Case III (both endpoint slopes < k): tangents on both sides.

A tangent anchored at an under-domain endpoint is only sound up to the
crossing point d where the tangent through the opposite over-domain
endpoint touches the curve; past d the construction falls back to that
crossing tangent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import (
    DEGENERATE_WIDTH,
    crossing_defect,
    derivative,
    value,
)

AUDIT_GRID = 2001
AUDIT_PAD = 1e-12
# Endpoint slopes this close to the chord slope get Case III treatment.
_EQ_SLOPE_TOL = 1e-12
_BISECT_ITERS = 70


@dataclass(frozen=True)
class LinearRelaxation:
    """Lower line alpha_l x + beta_l and upper line alpha_u x + beta_u.

    Sound on ``domain``: lower(x) <= f(x) <= upper(x) for every x in it.
    """

    alpha_l: float
    beta_l: float
    alpha_u: float
    beta_u: float
    domain: tuple

    def lower(self, x):
        return self.alpha_l * x + self.beta_l

    def upper(self, x):
        return self.alpha_u * x + self.beta_u


@dataclass(frozen=True)
class DualDomain:
    """Over-domain [l_over, u_over] enclosing a witnessed under-domain.

    The under-domain is clamped into the over-domain on construction, so
    l_over <= l_under <= u_under <= u_over always holds afterwards; sampling
    noise that grazes the over-domain is absorbed rather than rejected.
    """

    l_over: float
    u_over: float
    l_under: float
    u_under: float

    def __post_init__(self):
        lo = float(self.l_over)
        uo = float(self.u_over)
        if not np.isfinite([lo, uo]).all() or lo > uo:
            raise ValueError(f"invalid over-domain [{lo}, {uo}]")
        lu = float(min(max(self.l_under, lo), uo))
        uu = float(min(max(self.u_under, lo), uo))
        if lu > uu:
            lu = uu = 0.5 * (lu + uu)
        object.__setattr__(self, "l_over", lo)
        object.__setattr__(self, "u_over", uo)
        object.__setattr__(self, "l_under", lu)
        object.__setattr__(self, "u_under", uu)


def _bisect_crossing(kind, lo, hi, anchor, iters=_BISECT_ITERS):
    """Vectorized bisection for the crossing-defect root; assumes a bracket."""
    g_lo = np.asarray(crossing_defect(kind, lo, anchor))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        g_mid = np.asarray(crossing_defect(kind, mid, anchor))
        move_lo = (g_mid < 0.0) == (g_lo < 0.0)
        lo = np.where(move_lo, mid, lo)
        g_lo = np.where(move_lo, g_mid, g_lo)
        hi = np.where(move_lo, hi, mid)
    return 0.5 * (lo + hi)


def _lower_tangent_points(kind, l, u, l_under):
    """Tangency abscissas for lower lines, elementwise.

    On a domain inside the convex region any tangent stays below the curve,
    so the under-guided point is used directly. When the domain crosses the
    inflection the point may slide at most to the crossing point d of the
    tangent through (u_over, f(u_over)).
    """
    pt = np.array(l_under, dtype=np.float64, copy=True)
    need = (l < 0.0) & (u > 0.0)
    if np.any(need):
        ln, un, lun = l[need], u[need], pt[need]
        g_l = np.asarray(crossing_defect(kind, ln, un))
        d = np.where(
            g_l >= 0.0,
            ln,
            _bisect_crossing(kind, ln, np.zeros_like(ln), un),
        )
        pt[need] = np.where(lun < d, lun, d)
    return pt


def _upper_tangent_points(kind, l, u, u_under):
    """Mirror of _lower_tangent_points for upper lines (concave side)."""
    pt = np.array(u_under, dtype=np.float64, copy=True)
    need = (l < 0.0) & (u > 0.0)
    if np.any(need):
        ln, un, uun = l[need], u[need], pt[need]
        g_u = np.asarray(crossing_defect(kind, un, ln))
        d = np.where(
            g_u <= 0.0,
            un,
            _bisect_crossing(kind, np.zeros_like(un), un, ln),
        )
        pt[need] = np.where(uun > d, uun, d)
    return pt


def _tangent_coeffs(kind, pts):
    slope = np.asarray(derivative(kind, pts))
    intercept = np.asarray(value(kind, pts)) - slope * pts
    return slope, intercept


def _audit_repair(kind, l, u, alpha_u, beta_u, alpha_l, beta_l):
    """Grid-check both lines on [l, u]; shift offsets past any violation."""
    t = np.linspace(0.0, 1.0, AUDIT_GRID)[:, None]
    xs = l[None, :] * (1.0 - t) + u[None, :] * t
    fx = np.asarray(value(kind, xs))
    viol_u = np.max(fx - (alpha_u[None, :] * xs + beta_u[None, :]), axis=0)
    beta_u = np.where(viol_u > 0.0, beta_u + viol_u + AUDIT_PAD, beta_u)
    viol_l = np.max((alpha_l[None, :] * xs + beta_l[None, :]) - fx, axis=0)
    beta_l = np.where(viol_l > 0.0, beta_l - viol_l - AUDIT_PAD, beta_l)
    return beta_u, beta_l


def relax_arrays(kind, l_over, u_over, l_under, u_under):
    """Vectorized relaxation of one layer's neurons.

    All four inputs are arrays of equal length; under-domains are clamped
    into the over-domains. Returns (alpha_l, beta_l, alpha_u, beta_u).
    """
    l = np.asarray(l_over, dtype=np.float64)
    u = np.asarray(u_over, dtype=np.float64)
    if l.shape != u.shape:
        raise ValueError("over-domain arrays must have matching shapes")
    lu = np.clip(np.asarray(l_under, dtype=np.float64), l, u)
    uu = np.clip(np.asarray(u_under, dtype=np.float64), l, u)
    lu = np.minimum(lu, uu)

    sl = np.asarray(derivative(kind, l))
    su = np.asarray(derivative(kind, u))
    k = np.asarray(_chord(kind, l, u))
    f_l = np.asarray(value(kind, l))
    f_u = np.asarray(value(kind, u))

    degenerate = (u - l) < DEGENERATE_WIDTH
    near_eq = (np.abs(sl - k) <= _EQ_SLOPE_TOL) | (np.abs(su - k) <= _EQ_SLOPE_TOL)
    case1 = ~degenerate & ~near_eq & (sl < k) & (su > k)
    case2 = ~degenerate & ~near_eq & (sl > k) & (su < k)
    case3 = ~degenerate & (near_eq | ((sl < k) & (su < k)))
    if not np.all(degenerate | case1 | case2 | case3):
        raise AssertionError("chord slope below both endpoint slopes: not an S-curve")

    alpha_u = np.empty_like(l)
    beta_u = np.empty_like(l)
    alpha_l = np.empty_like(l)
    beta_l = np.empty_like(l)

    # Chord sides: through both endpoints, anchored per case for symmetry.
    alpha_u[case1] = k[case1]
    beta_u[case1] = (f_u - k * u)[case1]
    alpha_l[case2] = k[case2]
    beta_l[case2] = (f_l - k * l)[case2]

    tangent_up = case2 | case3
    if np.any(tangent_up):
        pts = _upper_tangent_points(kind, l[tangent_up], u[tangent_up], uu[tangent_up])
        alpha_u[tangent_up], beta_u[tangent_up] = _tangent_coeffs(kind, pts)
    tangent_lo = case1 | case3
    if np.any(tangent_lo):
        pts = _lower_tangent_points(kind, l[tangent_lo], u[tangent_lo], lu[tangent_lo])
        alpha_l[tangent_lo], beta_l[tangent_lo] = _tangent_coeffs(kind, pts)

    if np.any(degenerate):
        mid = 0.5 * (l + u)
        slope_mid, icpt_mid = _tangent_coeffs(kind, mid)
        alpha_u = np.where(degenerate, slope_mid, alpha_u)
        beta_u = np.where(degenerate, icpt_mid, beta_u)
        alpha_l = np.where(degenerate, slope_mid, alpha_l)
        beta_l = np.where(degenerate, icpt_mid, beta_l)

    beta_u, beta_l = _audit_repair(kind, l, u, alpha_u, beta_u, alpha_l, beta_l)
    return alpha_l, beta_l, alpha_u, beta_u


def _chord(kind, l, u):
    width = u - l
    mid_slope = np.asarray(derivative(kind, 0.5 * (l + u)))
    with np.errstate(divide="ignore", invalid="ignore"):
        chord = (np.asarray(value(kind, u)) - np.asarray(value(kind, l))) / width
    return np.where(width < DEGENERATE_WIDTH, mid_slope, chord)


def relax_dual(kind: str, dd: DualDomain) -> LinearRelaxation:
    """Relaxation guided by both the over-domain and the under-domain."""
    al, bl, au, bu = relax_arrays(
        kind,
        np.array([dd.l_over]),
        np.array([dd.u_over]),
        np.array([dd.l_under]),
        np.array([dd.u_under]),
    )
    return LinearRelaxation(
        alpha_l=float(al[0]),
        beta_l=float(bl[0]),
        alpha_u=float(au[0]),
        beta_u=float(bu[0]),
        domain=(dd.l_over, dd.u_over),
    )


def relax_single(kind: str, l: float, u: float) -> LinearRelaxation:
    """Baseline relaxation that only knows the over-domain."""
    return relax_dual(kind, DualDomain(l_over=l, u_over=u, l_under=l, u_under=u))
