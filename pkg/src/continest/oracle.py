"""Exact per-sample infection times and the naive sampling estimator.

One transmission sample fixes a weight for every edge; infection times
are then plain multi-source shortest-path distances, and influence at
horizon T is the expected count of nodes within distance T. The naive
estimator averages that count over independent samples. It is slow but
unbiased and structurally independent of the sketch machinery, which is
exactly what makes it a trustworthy ground truth.

Shortest paths are delegated to scipy's compiled Dijkstra. Note its CSR
convention: +inf weights act as absent edges (which matches the
never-transmits sentinel), and an explicitly stored 0.0 weight would be
ambiguous, which is why samples lift zero draws to the smallest positive
double.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import ValidationError
from .graph import DiffusionNetwork, validate_sources
from .streams import naive_stream
from .transmission import Exponential, KernelHazard, Rayleigh, Weibull

_TINY = 5e-324

# TransmissionSample: float array with one sampled time per edge, indexed
# by position in net.edges. +inf marks an edge that never transmits.
TransmissionSample = np.ndarray


def _sampling_plan(net: DiffusionNetwork):
    """Group edges by model so one uniform vector converts in a few array ops."""
    plan = net.__dict__.get("_sampling_plan")
    if plan is not None:
        return plan
    exp_ids, exp_rates = [], []
    ray_ids, ray_rates = [], []
    wei_ids, wei_scales, wei_shapes = [], [], []
    kernel_groups: dict[KernelHazard, list[int]] = {}
    for eid, e in enumerate(net.edges):
        mod = e.model
        if isinstance(mod, Exponential):
            exp_ids.append(eid)
            exp_rates.append(mod.rate)
        elif isinstance(mod, Rayleigh):
            ray_ids.append(eid)
            ray_rates.append(mod.scale)
        elif isinstance(mod, Weibull):
            wei_ids.append(eid)
            wei_scales.append(mod.scale)
            wei_shapes.append(mod.shape)
        else:
            kernel_groups.setdefault(mod, []).append(eid)
    plan = {
        "exp": (np.array(exp_ids, dtype=np.int64), np.array(exp_rates)),
        "ray": (np.array(ray_ids, dtype=np.int64), np.array(ray_rates)),
        "wei": (np.array(wei_ids, dtype=np.int64), np.array(wei_scales), np.array(wei_shapes)),
        "kern": [(np.array(ids, dtype=np.int64), mod) for mod, ids in kernel_groups.items()],
    }
    net.__dict__["_sampling_plan"] = plan
    return plan


def draw_sample(net: DiffusionNetwork, rng: np.random.Generator) -> TransmissionSample:
    """One independent waiting-time draw per edge.

    Consumes exactly one uniform per edge, in edge order, whatever the
    model mix; the uniforms go through each model's quantile.
    """
    plan = _sampling_plan(net)
    u = rng.random(net.edge_count)
    tau = np.empty(net.edge_count)
    ids, rates = plan["exp"]
    if ids.size:
        tau[ids] = -np.log1p(-u[ids]) / rates
    ids, rates = plan["ray"]
    if ids.size:
        tau[ids] = np.sqrt(-2.0 * np.log1p(-u[ids]) / rates)
    ids, scales, shapes = plan["wei"]
    if ids.size:
        # overflow to +inf is fine: the delay is beyond any horizon
        with np.errstate(over="ignore"):
            tau[ids] = scales * (-np.log1p(-u[ids])) ** (1.0 / shapes)
    for ids, mod in plan["kern"]:
        tau[ids] = mod.quantile(u[ids])
    # 0.0 weights would read as absent edges in CSR backends
    return np.maximum(tau, _TINY, out=tau)


@dataclass(frozen=True)
class InfectionTimes:
    """Per-node infection time for one sample; +inf when unreachable."""

    times: np.ndarray
    sources: tuple[int, ...]


@dataclass(frozen=True)
class NaiveEstimate:
    value: float
    per_sample_counts: np.ndarray
    sources: tuple[int, ...]
    T: float
    n: int

    def stderr(self) -> float:
        if self.per_sample_counts.size < 2:
            raise ValidationError("standard error needs at least 2 samples")
        return float(np.sqrt(np.var(self.per_sample_counts, ddof=1) / self.per_sample_counts.size))


def _weighted_csr(net: DiffusionNetwork, tau: np.ndarray) -> csr_matrix:
    V = net.node_count
    return csr_matrix((tau[net.out_eid], net.out_dst, net.out_indptr), shape=(V, V))


def shortest_infection_times(net: DiffusionNetwork, tau: TransmissionSample, sources) -> InfectionTimes:
    """Multi-source Dijkstra: every source seeded at time 0 in a single run."""
    src = validate_sources(net, sources)
    tau = np.asarray(tau, dtype=np.float64)
    if tau.shape != (net.edge_count,):
        raise ValidationError(f"need one time per edge, got shape {tau.shape}")
    times = dijkstra(_weighted_csr(net, tau), directed=True, indices=list(src), min_only=True)
    return InfectionTimes(times=times, sources=src)


def naive_influence(net: DiffusionNetwork, sources, T: float, n: int, seed: int, threads: int = 1) -> NaiveEstimate:
    """Ground-truth influence: average |{i : t_i <= T}| over n fresh samples.

    Sample l draws from a stream keyed by (seed, l), so the result is
    deterministic for any thread count.
    """
    src = validate_sources(net, sources)
    if not T >= 0.0:
        raise ValidationError(f"T must be >= 0, got {T}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    counts = np.empty(n, dtype=np.int64)
    src_list = list(src)
    # scipy includes distances equal to the limit, matching t <= T
    limit = float(T)

    def run_range(lo: int, hi: int):
        graph = _weighted_csr(net, np.zeros(net.edge_count))
        for l in range(lo, hi):
            tau = draw_sample(net, naive_stream(seed, l))
            graph.data[:] = tau[net.out_eid]
            t = dijkstra(graph, directed=True, indices=src_list, min_only=True, limit=limit)
            counts[l] = int((t <= T).sum())

    if threads <= 1 or n == 1:
        run_range(0, n)
    else:
        step = -(-n // threads)
        spans = [(lo, min(lo + step, n)) for lo in range(0, n, step)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda span: run_range(*span), spans))
    return NaiveEstimate(
        value=float(counts.mean()),
        per_sample_counts=counts,
        sources=src,
        T=float(T),
        n=int(n),
    )
