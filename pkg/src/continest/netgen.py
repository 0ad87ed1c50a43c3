"""Synthetic network generation from 2x2 Kronecker seed matrices.

Edges are realized by ball dropping: each ball picks one of the four
quadrants per level, weighted by the (unnormalized) seed entries, and the
level choices concatenate into (src, dst) bit strings. Self-loops and
repeats are rejected until exactly ceil(density * 2^power) distinct edges
land. Every edge gets an independent Weibull model with scale and shape
uniform on (low, high]; the low end is excluded so parameters stay
strictly positive.

Ball coordinates and edge parameters come from two separate substreams
of rng_seed, so the output is a pure function of the spec regardless of
internal batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GenerationError, ValidationError
from .graph import DiffusionNetwork, EdgeRecord
from .transmission import Weibull

PRESETS = {
    "core-periphery": ((0.9, 0.5), (0.5, 0.3)),
    "random": ((0.5, 0.5), (0.5, 0.5)),
    "hierarchical": ((0.9, 0.1), (0.1, 0.9)),
}

_MAX_ATTEMPT_FACTOR = 100


def preset(name: str) -> tuple[tuple[float, float], tuple[float, float]]:
    """Named 2x2 seed matrix: core-periphery, random, or hierarchical."""
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class KroneckerSpec:
    seed_matrix: tuple[tuple[float, float], tuple[float, float]]
    power: int
    density: float
    parameter_range: tuple[float, float] = (0.0, 10.0)
    rng_seed: int = 0

    def __post_init__(self):
        flat = [v for row in self.seed_matrix for v in row]
        if len(flat) != 4:
            raise ValidationError("seed_matrix must be 2x2")
        if not all(0.0 <= v <= 1.0 for v in flat):
            raise ValidationError(f"seed matrix entries must lie in [0, 1], got {flat}")
        if sum(flat) <= 0.0:
            raise ValidationError("seed matrix must have positive total weight")
        if self.power < 1:
            raise ValidationError(f"power must be >= 1, got {self.power}")
        if not self.density > 0.0:
            raise ValidationError(f"density must be > 0, got {self.density}")
        nodes = 1 << self.power
        if self.target_edges > nodes * (nodes - 1):
            raise ValidationError(
                f"density {self.density} asks for {self.target_edges} edges; "
                f"a {nodes}-node loopless digraph holds at most {nodes * (nodes - 1)}"
            )
        low, high = self.parameter_range
        if not (0.0 <= low < high):
            raise ValidationError(f"parameter_range must satisfy 0 <= low < high, got {self.parameter_range}")
        if self.rng_seed < 0:
            raise ValidationError(f"rng_seed must be >= 0, got {self.rng_seed}")

    @property
    def node_count(self) -> int:
        return 1 << self.power

    @property
    def target_edges(self) -> int:
        return math.ceil(self.density * (1 << self.power))


def generate(spec: KroneckerSpec) -> DiffusionNetwork:
    """Realize a spec into a network; deterministic in rng_seed."""
    k = spec.power
    target = spec.target_edges
    weights = np.array([v for row in spec.seed_matrix for v in row], dtype=np.float64)
    cum = np.cumsum(weights / weights.sum())
    bit_weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
    ball_rng = np.random.default_rng(np.random.SeedSequence(spec.rng_seed, spawn_key=(0,)))
    param_rng = np.random.default_rng(np.random.SeedSequence(spec.rng_seed, spawn_key=(1,)))

    seen: set[tuple[int, int]] = set()
    pairs: list[tuple[int, int]] = []
    attempts = 0
    max_attempts = _MAX_ATTEMPT_FACTOR * target
    while len(pairs) < target and attempts < max_attempts:
        chunk = min(2 * (target - len(pairs)) + 32, max_attempts - attempts)
        quad = np.searchsorted(cum, ball_rng.random((chunk, k)), side="right")
        srcs = (quad >> 1) @ bit_weights
        dsts = (quad & 1) @ bit_weights
        for s, d in zip(srcs, dsts):
            attempts += 1
            if s == d:
                continue
            key = (int(s), int(d))
            if key in seen:
                continue
            seen.add(key)
            pairs.append(key)
            if len(pairs) == target:
                break
    if len(pairs) < target:
        raise GenerationError(
            f"placed only {len(pairs)}/{target} edges after {attempts} balls; "
            "the seed matrix concentrates too much mass on rejected cells"
        )

    low, high = spec.parameter_range
    span = high - low
    scales = low + span * (1.0 - param_rng.random(target))
    shapes = low + span * (1.0 - param_rng.random(target))
    edges = [
        EdgeRecord(s, d, Weibull(scale=float(a), shape=float(b)))
        for (s, d), a, b in zip(pairs, scales, shapes)
    ]
    return DiffusionNetwork(spec.node_count, edges)
