"""How a witnessed under-domain tightens the linear bounds of one neuron.

Walks through the three interval regimes (convex side, concave side, and
spanning the inflection) and prints the lines picked with and without
under-domain guidance. Pass --plot to also write relaxation_lines.png.

Run: python demos/01_relaxation_lines.py [--plot]
"""
import sys

import numpy as np

from dualcert import DualDomain, chord_slope, derivative, relax_dual, relax_single, value

CASES = [
    ("convex side (chord on top)", "sigmoid", (-3.0, -1.0), (-2.6, -1.4)),
    ("concave side (chord below)", "sigmoid", (1.0, 3.0), (1.4, 2.6)),
    ("spanning the inflection", "sigmoid", (-3.0, 3.0), (-2.0, 2.0)),
    ("tanh, spanning", "tanh", (-2.0, 1.5), (-1.2, 0.9)),
]


def describe(kind, l, u):
    k = chord_slope(kind, l, u)
    sl, su = derivative(kind, l), derivative(kind, u)
    if sl < k < su:
        return "f'(l) < chord < f'(u)"
    if sl > k > su:
        return "f'(l) > chord > f'(u)"
    return "chord above both endpoint slopes"


def main():
    plot = "--plot" in sys.argv
    panels = []
    for title, kind, (l, u), (lu, uu) in CASES:
        single = relax_single(kind, l, u)
        dual = relax_dual(kind, DualDomain(l, u, lu, uu))
        print(f"\n== {title}:  {kind} on [{l}, {u}], witnessed [{lu}, {uu}]")
        print(f"   regime: {describe(kind, l, u)}")
        print(f"   single: lower {single.alpha_l:+.4f}x{single.beta_l:+.4f}   "
              f"upper {single.alpha_u:+.4f}x{single.beta_u:+.4f}")
        print(f"   dual:   lower {dual.alpha_l:+.4f}x{dual.beta_l:+.4f}   "
              f"upper {dual.alpha_u:+.4f}x{dual.beta_u:+.4f}")
        xs = np.linspace(lu, uu, 401)
        gap_single = np.mean(single.upper(xs) - single.lower(xs))
        gap_dual = np.mean(dual.upper(xs) - dual.lower(xs))
        print(f"   mean band width on the witnessed part: "
              f"single {gap_single:.4f} -> dual {gap_dual:.4f} "
              f"({(1 - gap_dual / gap_single) * 100:+.1f}% narrower)")
        panels.append((title, kind, l, u, lu, uu, single, dual))

    if plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(2, 2, figsize=(11, 8))
        for ax, (title, kind, l, u, lu, uu, single, dual) in zip(axes.flat, panels):
            xs = np.linspace(l, u, 400)
            ax.plot(xs, np.asarray(value(kind, xs)), "k", lw=2, label=kind)
            ax.plot(xs, single.upper(xs), "g--", label="single")
            ax.plot(xs, single.lower(xs), "g--")
            ax.plot(xs, dual.upper(xs), "r", label="dual")
            ax.plot(xs, dual.lower(xs), "r")
            ax.axvspan(lu, uu, color="0.9", label="witnessed")
            ax.set_title(title, fontsize=9)
            ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig("relaxation_lines.png", dpi=120)
        print("\nwrote relaxation_lines.png")


if __name__ == "__main__":
    main()
