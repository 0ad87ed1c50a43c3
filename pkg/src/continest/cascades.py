"""Observed cascades and empirical influence.

A cascade is one recorded diffusion: a source plus (node, time) events,
the source itself at time 0. The empirical influence of a node u at
horizon T is the number of distinct nodes seen at time <= T across all
cascades that started at u; the source counts itself. Nodes with no
recorded cascades are reported as having no data rather than influence
zero, and the two must not be conflated downstream.

File format, one cascade per line:

    <source_id>;<node>:<time>,<node>:<time>,...
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class Cascade:
    source: int
    events: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if self.source < 0:
            raise ValidationError(f"source id must be >= 0, got {self.source}")
        nodes = [n for n, _ in self.events]
        if len(nodes) != len(set(nodes)):
            raise ValidationError(f"cascade from {self.source} lists a node twice")
        for n, t in self.events:
            if n < 0:
                raise ValidationError(f"node id must be >= 0, got {n}")
            if not (t >= 0.0 and np.isfinite(t)):
                raise ValidationError(f"infection time must be finite and >= 0, got {t}")
        by_node = dict(self.events)
        if by_node.get(self.source) != 0.0:
            raise ValidationError(f"source {self.source} must appear in events at time 0")


@dataclass(frozen=True)
class CascadeSet:
    cascades: tuple[Cascade, ...]

    def __len__(self):
        return len(self.cascades)

    def __iter__(self):
        return iter(self.cascades)

    def sources(self) -> tuple[int, ...]:
        return tuple(sorted({c.source for c in self.cascades}))


def load_cascades(path: str, node_count: int | None = None) -> CascadeSet:
    """Parse a cascade file; `node_count`, when given, bounds legal node ids."""
    cascades: list[Cascade] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            head, sep, body = line.partition(";")
            if not sep:
                raise ParseError("expected `<source>;<node>:<time>,...`", str(path), lineno)
            try:
                source = int(head)
            except ValueError:
                raise ParseError(f"bad source id {head!r}", str(path), lineno) from None
            events = []
            for item in body.split(","):
                node_s, sep2, time_s = item.partition(":")
                if not sep2:
                    raise ParseError(f"bad event {item!r}", str(path), lineno)
                try:
                    events.append((int(node_s), float(time_s)))
                except ValueError:
                    raise ParseError(f"bad event {item!r}", str(path), lineno) from None
            if node_count is not None:
                for n, _ in events:
                    if n >= node_count:
                        raise ParseError(f"node {n} outside the {node_count}-node universe", str(path), lineno)
            try:
                cascades.append(Cascade(source, tuple(events)))
            except ValidationError as exc:
                raise ParseError(str(exc), str(path), lineno) from None
    return CascadeSet(tuple(cascades))


def save_cascades(cs: CascadeSet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in cs.cascades:
            body = ",".join(f"{n}:{t!r}" for n, t in c.events)
            fh.write(f"{c.source};{body}\n")


def empirical_influence(cs: CascadeSet, node: int, T: float) -> tuple[int, bool]:
    """(distinct nodes infected by T over all cascades from `node`, has-data flag)."""
    if not T >= 0.0:
        raise ValidationError(f"T must be >= 0, got {T}")
    mine = [c for c in cs.cascades if c.source == node]
    if not mine:
        return 0, False
    infected = {n for c in mine for n, t in c.events if t <= T}
    return len(infected), True


def mae(estimates: Mapping[int, float], truths: Mapping[int, float]) -> float:
    """Mean absolute error over the nodes present in both mappings."""
    common = sorted(set(estimates) & set(truths))
    if not common:
        raise ValidationError("estimate and truth node sets are disjoint")
    return float(np.mean([abs(estimates[k] - truths[k]) for k in common]))


def split_cascades(cs: CascadeSet, train_fraction: float = 0.8, seed: int = 0) -> tuple[CascadeSet, CascadeSet]:
    """Seeded random split by cascade (not by node)."""
    if not (0.0 < train_fraction < 1.0):
        raise ValidationError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    order = np.random.default_rng(seed).permutation(len(cs.cascades))
    cut = int(round(train_fraction * len(cs.cascades)))
    train = tuple(cs.cascades[i] for i in order[:cut])
    test = tuple(cs.cascades[i] for i in order[cut:])
    return CascadeSet(train), CascadeSet(test)
