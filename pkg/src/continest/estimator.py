"""Sketch-based influence estimation.

Two nested Monte-Carlo loops: n outer draws of all edge transmission
times, and per draw m independent label assignments. For each (draw,
labeling) pair the least label over the sources' distance-T neighborhood
is Exp(|N|)-distributed, so (m-1)/sum over the m minima estimates the
neighborhood size unbiasedly, and averaging over draws estimates
influence.

Randomness discipline: sample l uses stream (seed, tau, l), label set
(l, u) uses stream (seed, label, l, u). Streams depend on neither the
sources nor T, so runs that differ only in those reuse identical
randomness; that upgrades the usual statistical monotonicity in T and in
the source set to exact per-sample monotonicity, and makes results
bitwise reproducible at any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ValidationError
from .graph import DiffusionNetwork, validate_sources
from .neighborhood import draw_labels, first_least_labels
from .oracle import draw_sample
from .streams import label_stream, tau_stream


@dataclass(frozen=True)
class EstimatorConfig:
    n: int
    m: int
    T: float
    master_seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.m < 3:
            raise ConfigError(f"m must be >= 3 (the size estimate needs it), got {self.m}")
        if not self.T >= 0.0:
            raise ConfigError(f"T must be >= 0, got {self.T}")
        if self.master_seed < 0:
            raise ConfigError(f"master_seed must be >= 0, got {self.master_seed}")


@dataclass(frozen=True)
class InfluenceEstimate:
    """Estimated influence plus per-sample diagnostics.

    `value` is the plain mean of `per_sample_values`; the per-sample
    map (m-1)/sum is unbounded above, so noise can push the mean outside
    [|sources|, node_count] - `outside_bounds` flags that.
    """

    value: float
    per_sample_values: np.ndarray
    sources: tuple[int, ...]
    config: EstimatorConfig
    node_count: int

    @property
    def outside_bounds(self) -> bool:
        return not (len(self.sources) <= self.value <= self.node_count)


@dataclass(frozen=True)
class VarianceReport:
    variance: float
    stderr: float


def per_sample_estimate(net: DiffusionNetwork, tau, src, cfg: EstimatorConfig, l: int) -> float:
    """One outer sample's estimate: m least-label minima mapped through (m-1)/sum."""
    total = 0.0
    for u in range(cfg.m):
        labels = draw_labels(label_stream(cfg.master_seed, l, u), net.node_count)
        ans = first_least_labels(net, tau, labels, cfg.T, targets=src)
        total += float(ans[list(src)].min())
    return (cfg.m - 1) / total


def estimate_influence(net: DiffusionNetwork, sources, cfg: EstimatorConfig, threads: int = 1) -> InfluenceEstimate:
    """Run the full two-loop estimator for one source set."""
    src = validate_sources(net, sources)
    values = np.empty(cfg.n)

    def run_range(lo: int, hi: int):
        for l in range(lo, hi):
            tau = draw_sample(net, tau_stream(cfg.master_seed, l))
            values[l] = per_sample_estimate(net, tau, src, cfg, l)

    if threads <= 1 or cfg.n == 1:
        run_range(0, cfg.n)
    else:
        step = -(-cfg.n // threads)
        spans = [(lo, min(lo + step, cfg.n)) for lo in range(0, cfg.n, step)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda span: run_range(*span), spans))

    value = float(np.mean(values))
    return InfluenceEstimate(
        value=value,
        per_sample_values=values,
        sources=src,
        config=cfg,
        node_count=net.node_count,
    )


def sample_bound(epsilon: float, delta: float, C: float, Lambda: float, node_count: int) -> int:
    """Outer samples sufficient for a uniform epsilon guarantee: ceil((C*Lambda/eps^2) * ln(2V/delta))."""
    if not (epsilon > 0 and C > 0 and Lambda > 0 and node_count > 0):
        raise ValidationError("epsilon, C, Lambda, node_count must all be positive")
    if not (0 < delta < 1):
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil((C * Lambda / (epsilon * epsilon)) * math.log(2.0 * node_count / delta))


def variance_report(estimate: InfluenceEstimate) -> VarianceReport:
    """Unbiased variance of the raw per-sample values and the standard error of their mean."""
    vals = estimate.per_sample_values
    if vals.size < 2:
        raise ConfigError("variance needs n >= 2")
    var = float(np.var(vals, ddof=1))
    return VarianceReport(variance=var, stderr=math.sqrt(var / vals.size))
