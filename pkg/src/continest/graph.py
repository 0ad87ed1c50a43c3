"""Directed diffusion networks and their on-disk format.

A network is a node count plus a list of directed edges, each carrying its
own transmission model. Edge identity is positional: algorithms refer to
edge i meaning `net.edges[i]`, and a vector of sampled transmission times
is indexed the same way.

File format, whitespace-separated, written with tabs:

    <node_count> <edge_count>
    <src> <dst> <model_tag> <param> [<param> ...]

Kernel-hazard edges carry a path to their parameter file, resolved
relative to the network file's directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .transmission import TransmissionModel, model_from_fields, model_to_fields


@dataclass(frozen=True)
class EdgeRecord:
    src: int
    dst: int
    model: TransmissionModel


class DiffusionNetwork:
    """Immutable directed graph with per-edge transmission models."""

    def __init__(self, node_count: int, edges):
        if node_count < 1:
            raise ValidationError(f"node_count must be >= 1, got {node_count}")
        edges = tuple(edges)
        seen: set[tuple[int, int]] = set()
        for i, e in enumerate(edges):
            if not (0 <= e.src < node_count and 0 <= e.dst < node_count):
                raise ValidationError(f"edge {i} endpoint out of range: {e.src}->{e.dst}")
            if e.src == e.dst:
                raise ValidationError(f"edge {i} is a self loop at node {e.src}")
            if (e.src, e.dst) in seen:
                raise ValidationError(f"duplicate edge {e.src}->{e.dst}")
            seen.add((e.src, e.dst))
        self.node_count = int(node_count)
        self.edges = edges
        self.edge_count = len(edges)
        self._adj: dict[str, np.ndarray] | None = None

    # -- adjacency in CSR form, built once on first use --

    def _ensure_adj(self):
        if self._adj is not None:
            return self._adj
        V, E = self.node_count, self.edge_count
        src = np.fromiter((e.src for e in self.edges), dtype=np.int64, count=E)
        dst = np.fromiter((e.dst for e in self.edges), dtype=np.int64, count=E)
        out_eid = np.argsort(src, kind="stable")
        in_eid = np.argsort(dst, kind="stable")
        out_indptr = np.zeros(V + 1, dtype=np.int64)
        in_indptr = np.zeros(V + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=V), out=out_indptr[1:])
        np.cumsum(np.bincount(dst, minlength=V), out=in_indptr[1:])
        self._adj = {
            "out_indptr": out_indptr,
            "out_dst": dst[out_eid],
            "out_eid": out_eid,
            "in_indptr": in_indptr,
            "in_src": src[in_eid],
            "in_eid": in_eid,
        }
        return self._adj

    @property
    def out_indptr(self) -> np.ndarray:
        return self._ensure_adj()["out_indptr"]

    @property
    def out_dst(self) -> np.ndarray:
        return self._ensure_adj()["out_dst"]

    @property
    def out_eid(self) -> np.ndarray:
        return self._ensure_adj()["out_eid"]

    @property
    def in_indptr(self) -> np.ndarray:
        return self._ensure_adj()["in_indptr"]

    @property
    def in_src(self) -> np.ndarray:
        return self._ensure_adj()["in_src"]

    @property
    def in_eid(self) -> np.ndarray:
        return self._ensure_adj()["in_eid"]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def reverse(self) -> "DiffusionNetwork":
        """Same nodes and models with every edge flipped; edge order kept."""
        flipped = tuple(EdgeRecord(e.dst, e.src, e.model) for e in self.edges)
        return DiffusionNetwork(self.node_count, flipped)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffusionNetwork):
            return NotImplemented
        return self.node_count == other.node_count and self.edges == other.edges

    def __hash__(self):
        return hash((self.node_count, self.edges))

    def __repr__(self):
        return f"DiffusionNetwork(nodes={self.node_count}, edges={self.edge_count})"


def highest_out_degree_node(net: DiffusionNetwork) -> int:
    """Node with the most outgoing edges; ties go to the lowest id."""
    return int(np.argmax(net.out_degrees()))


def validate_sources(net: DiffusionNetwork, sources) -> tuple[int, ...]:
    """Normalize a source collection: sorted, unique, in range, non-empty."""
    ids = sorted({int(s) for s in sources})
    if not ids:
        raise ValidationError("source set must be non-empty")
    if ids[0] < 0 or ids[-1] >= net.node_count:
        raise ValidationError(f"source out of range for {net.node_count} nodes: {ids}")
    return tuple(ids)


def load_network(path: str) -> DiffusionNetwork:
    base_dir = os.path.dirname(os.path.abspath(path))
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    header_seen = False
    node_count = edge_count = 0
    edges: list[EdgeRecord] = []
    for lineno, raw in enumerate(lines, start=1):
        parts = raw.split()
        if not parts:
            continue
        if not header_seen:
            if len(parts) != 2:
                raise ParseError("expected header `<node_count> <edge_count>`", path, lineno)
            try:
                node_count, edge_count = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"bad header {raw.strip()!r}", path, lineno) from None
            header_seen = True
            continue
        if len(parts) < 3:
            raise ParseError("edge line needs `<src> <dst> <model> <params...>`", path, lineno)
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"bad edge endpoints {parts[:2]}", path, lineno) from None
        try:
            model = model_from_fields(parts[2], parts[3:], base_dir)
        except ValidationError as exc:
            raise ParseError(str(exc), path, lineno) from None
        edges.append(EdgeRecord(src, dst, model))
    if not header_seen:
        raise ParseError("empty network file", path)
    if len(edges) != edge_count:
        raise ParseError(f"header promises {edge_count} edges, found {len(edges)}", path)
    try:
        return DiffusionNetwork(node_count, edges)
    except ValidationError as exc:
        raise ParseError(str(exc), path) from None


def save_network(net: DiffusionNetwork, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{net.node_count}\t{net.edge_count}\n")
        for e in net.edges:
            tag, fields = model_to_fields(e.model)
            fh.write("\t".join([str(e.src), str(e.dst), tag] + fields) + "\n")
