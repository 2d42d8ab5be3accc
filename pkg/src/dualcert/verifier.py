"""Top-level robustness queries: fixed-radius checks, radius search, datasets.

A query is decided by propagating bounds for every competitor label: all
margin lower bounds positive proves robustness. When a bound is not
positive the verdict is either a concrete counterexample (found by
re-using the sampled inputs plus one signed-gradient step on the margin)
or "unknown", since a failed bound alone cannot distinguish true fragility
from over-approximation slack.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .model import InputRegion, Network, forward, output_jacobian, predict
from .propagation import margin_lower_bounds, propagate
from .underapprox import UnderConfig, combine, gradient_under, sample_under

STRATEGIES = ("dual-sample", "dual-grad", "dual-both", "single")

ROBUST = "robust"
UNKNOWN = "unknown"
FALSIFIED = "falsified"


@dataclass(frozen=True)
class VerifierConfig:
    strategy: str = "dual-sample"
    under: UnderConfig = field(default_factory=UnderConfig)
    eps_max: float = 1.0
    search_tol: float = 1e-4
    max_search_iters: int = 30
    falsify: bool = True
    clamp: Optional[tuple] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if not self.eps_max > 0.0:
            raise ValueError("eps_max must be positive")
        if not self.search_tol > 0.0:
            raise ValueError("search_tol must be positive")


@dataclass(frozen=True)
class VerifyOutcome:
    status: str
    margins: dict
    counterexample: Optional[np.ndarray] = None


@dataclass(frozen=True)
class CertifyResult:
    epsilon: float
    iterations: int
    at_cap: bool


def _under_bounds(net: Network, region: InputRegion, cfg: VerifierConfig):
    if cfg.strategy == "single":
        return None
    if cfg.strategy == "dual-sample":
        return sample_under(net, region, cfg.under.n_samples, cfg.under.seed)
    if cfg.strategy == "dual-grad":
        return gradient_under(net, region, cfg.under.step_fraction)
    return combine(
        sample_under(net, region, cfg.under.n_samples, cfg.under.seed),
        gradient_under(net, region, cfg.under.step_fraction),
    )


def _falsify(net: Network, region: InputRegion, label: int, cfg: VerifierConfig):
    """Deterministic counterexample search: gradient corners, then samples."""
    x0 = region.center
    jac = output_jacobian(net, x0)
    candidates = []
    for ell in range(net.output_dim):
        if ell == label:
            continue
        direction = np.sign(jac[label] - jac[ell])
        candidates.append(region.clip(x0 - region.radius * direction))
    lo, hi = region.bounds()
    rng = np.random.default_rng(cfg.under.seed)
    n = max(cfg.under.n_samples, 1)
    samples = lo + rng.random((n, region.dim)) * (hi - lo)
    xs = np.vstack([np.asarray(candidates), samples]) if candidates else samples
    outputs = forward(net, xs)
    preds = np.argmax(outputs, axis=1)
    hits = np.nonzero(preds != label)[0]
    if hits.size:
        return xs[hits[0]].copy()
    return None


def verify_at(net: Network, x0, eps: float, cfg: VerifierConfig) -> VerifyOutcome:
    """Check robustness of the prediction at x0 within radius eps."""
    if eps < 0.0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    x0 = np.asarray(x0, dtype=np.float64)
    region = InputRegion(center=x0, radius=float(eps), clamp=cfg.clamp)
    label = predict(net, x0)

    under = _under_bounds(net, region, cfg)
    strategy = "single" if cfg.strategy == "single" else "dual"
    lb = propagate(net, region, under, strategy)
    margins = margin_lower_bounds(net, region, lb, label)
    if all(m > 0.0 for m in margins.values()):
        return VerifyOutcome(status=ROBUST, margins=margins)
    if cfg.falsify:
        witness = _falsify(net, region, label, cfg)
        if witness is not None:
            return VerifyOutcome(status=FALSIFIED, margins=margins, counterexample=witness)
    return VerifyOutcome(status=UNKNOWN, margins=margins)


def certify(net: Network, x0, cfg: VerifierConfig) -> CertifyResult:
    """Largest verified radius, by exponential bracketing then bisection.

    Only radii that verified as robust are ever returned, so the result is
    a certified lower bound by construction. Each probe re-runs the
    under-approximation at its own radius.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    out = forward(net, x0)
    label = int(np.argmax(out))
    competitors = np.delete(out, label)
    if competitors.size and np.max(competitors) >= out[label]:
        return CertifyResult(epsilon=0.0, iterations=0, at_cap=False)

    calls = 0

    def robust_at(eps: float) -> bool:
        nonlocal calls
        calls += 1
        return verify_at(net, x0, eps, cfg).status == ROBUST

    lo = 0.0
    eps = cfg.eps_max / 1024.0
    hi = None
    while True:
        if robust_at(eps):
            lo = eps
            if eps >= cfg.eps_max:
                return CertifyResult(epsilon=cfg.eps_max, iterations=calls, at_cap=True)
            eps = min(2.0 * eps, cfg.eps_max)
        else:
            hi = eps
            break

    for _ in range(cfg.max_search_iters):
        if (hi - lo) <= cfg.search_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if robust_at(mid):
            lo = mid
        else:
            hi = mid
    return CertifyResult(epsilon=lo, iterations=calls, at_cap=False)


@dataclass(frozen=True)
class InstanceResult:
    index: int
    label: int
    predicted: int
    misclassified: bool
    certified: Optional[CertifyResult]
    runtime_s: float


@dataclass(frozen=True)
class DatasetSummary:
    rows: tuple
    mean_bound: Optional[float]
    median_bound: Optional[float]
    total_runtime_s: float

    @property
    def certified_rows(self) -> tuple:
        return tuple(r for r in self.rows if not r.misclassified)

    @property
    def misclassified_rows(self) -> tuple:
        return tuple(r for r in self.rows if r.misclassified)


def instance_seed(base_seed: int, index: int) -> int:
    """Stable per-instance seed, independent of scheduling order."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(index,))
    return int(ss.generate_state(2, dtype=np.uint64)[0])


def certify_dataset(net: Network, instances, cfg: VerifierConfig, workers: int = 1) -> DatasetSummary:
    """Certify each (label, input) pair; misclassified inputs are excluded
    from the aggregates and reported separately."""
    instances = list(instances)
    if not instances:
        raise ValueError("empty instance list")

    def run(idx_inst):
        idx, (label, x) = idx_inst
        x = np.asarray(x, dtype=np.float64)
        start = time.perf_counter()
        pred = predict(net, x)
        if pred != int(label):
            return InstanceResult(idx, int(label), pred, True, None, time.perf_counter() - start)
        cfg_i = replace(cfg, under=replace(cfg.under, seed=instance_seed(cfg.under.seed, idx)))
        res = certify(net, x, cfg_i)
        return InstanceResult(idx, int(label), pred, False, res, time.perf_counter() - start)

    t0 = time.perf_counter()
    work = list(enumerate(instances))
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, work))
    else:
        rows = [run(item) for item in work]
    rows.sort(key=lambda r: r.index)
    total = time.perf_counter() - t0

    bounds = [r.certified.epsilon for r in rows if not r.misclassified]
    mean = float(np.mean(bounds)) if bounds else None
    median = float(np.median(bounds)) if bounds else None
    return DatasetSummary(rows=tuple(rows), mean_bound=mean, median_bound=median, total_runtime_s=total)
