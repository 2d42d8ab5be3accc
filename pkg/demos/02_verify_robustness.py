"""Verify a single input at growing radii until the proof breaks.

Builds a small random tanh classifier, then sweeps the radius and shows the
per-label margin lower bounds, the first radius where the proof fails, and
the falsifying input once one exists.

Run: python demos/02_verify_robustness.py
"""
import numpy as np

from dualcert import (
    UnderConfig,
    VerifierConfig,
    forward,
    predict,
    random_inputs,
    random_network,
    verify_at,
)


def main():
    net = random_network(seed=8, input_dim=16, hidden_widths=[12, 10], output_dim=4,
                         activation="tanh")
    x0 = random_inputs(9, net, 1)[0]
    label = predict(net, x0)
    print(f"network: 16 -> 12 -> 10 -> 4 (tanh), predicted label {label}")
    print(f"outputs at x0: {np.round(forward(net, x0), 4)}\n")

    cfg = VerifierConfig(strategy="dual-sample", under=UnderConfig(n_samples=1000, seed=1))
    for eps in (0.01, 0.05, 0.1, 0.2, 0.4, 0.8):
        out = verify_at(net, x0, eps, cfg)
        worst = min(out.margins, key=out.margins.get)
        print(f"eps = {eps:<5}: {out.status:10s} "
              f"(worst margin bound {out.margins[worst]:+.5f} vs label {worst})")
        if out.counterexample is not None:
            adv = out.counterexample
            print(f"          counterexample found: predicted {predict(net, adv)}, "
                  f"|adv - x0|_inf = {np.max(np.abs(adv - x0)):.4f}")


if __name__ == "__main__":
    main()
