"""Least-label-list sketches over one sampled set of edge times.

Construction: assign every node an i.i.d. unit-exponential label, process
nodes in ascending label order, and run a truncated Dijkstra from each
over the *reversed* graph. Node s appends an entry (d, r_i) when the
current label node i sits at forward distance d from s and d is strictly
smaller than every distance s has recorded so far. Each list therefore
has strictly decreasing distances ending at 0 and strictly increasing
labels, and "smallest label within distance T of s" is a binary search.

Why this is fast: a per-node best-distance array persists across the
outer label loop, and any heap pop whose distance is not a strict
improvement is pruned together with its whole subtree, so total work
stays near-linear in edges for the whole sketch set.

The minimum label over a node's distance-T neighborhood is the minimum
of |N| unit exponentials, i.e. Exp(|N|); averaging m independent such
minima through (m-1)/sum gives an unbiased neighborhood-size estimate.

One numba kernel serves two access patterns: full list construction
(`build_lists`) and a first-answer-only mode (`first_least_labels`) that
stops as soon as every node in a target set has its least label, which
is what the influence estimator's inner loop needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError, ParseError, ValidationError
from .graph import DiffusionNetwork

_TINY = 5e-324  # smallest positive double


def draw_labels(rng: np.random.Generator, count: int) -> np.ndarray:
    """Unit-exponential label per node; zero draws lifted to the smallest positive double."""
    return np.maximum(rng.standard_exponential(count), _TINY)


@njit(cache=True, nogil=True)
def _traverse(in_indptr, in_src, in_eid, tau, labels, order, max_dist, first_only, targets, remaining):
    """Ascending-label reverse-graph traversal.

    Returns parallel entry arrays (node, distance, label) in append order:
    grouped by label round, distances strictly decreasing within a node.
    In first_only mode only a node's first (least-label) entry is kept and
    the walk stops once `remaining` target nodes have one.
    """
    V = in_indptr.shape[0] - 1
    E = tau.shape[0]
    best = np.full(V, np.inf)
    dist = np.zeros(V)
    stamp = np.zeros(V, np.int64)
    hd = np.empty(E + 8)
    hn = np.empty(E + 8, np.int64)
    cap = 4 * V + 64
    ent_node = np.empty(cap, np.int64)
    ent_dist = np.empty(cap)
    ent_label = np.empty(cap)
    cnt = 0
    done = False
    for it in range(V):
        i = order[it]
        if best[i] == 0.0:
            # a smaller label sits at distance 0 from i, hence at least as
            # close to every node as i is: this run can never append
            continue
        run = it + 1
        r_i = labels[i]
        hd[0] = 0.0
        hn[0] = i
        hsize = 1
        dist[i] = 0.0
        stamp[i] = run
        while hsize > 0:
            d = hd[0]
            s = hn[0]
            # pop-min: move last element to the root and sift down
            hsize -= 1
            if hsize > 0:
                md = hd[hsize]
                mn = hn[hsize]
                pos = 0
                while True:
                    child = 2 * pos + 1
                    if child >= hsize:
                        break
                    if child + 1 < hsize and hd[child + 1] < hd[child]:
                        child += 1
                    if hd[child] >= md:
                        break
                    hd[pos] = hd[child]
                    hn[pos] = hn[child]
                    pos = child
                hd[pos] = md
                hn[pos] = mn
            if stamp[s] == run and d > dist[s]:
                continue  # stale heap copy
            if d >= best[s]:
                continue  # an earlier label reached s at least this close: prune subtree
            fresh = best[s] == np.inf
            best[s] = d
            if fresh or not first_only:
                if cnt == cap:
                    cap = 2 * cap
                    tmp_n = np.empty(cap, np.int64)
                    tmp_n[:cnt] = ent_node[:cnt]
                    ent_node = tmp_n
                    tmp_d = np.empty(cap)
                    tmp_d[:cnt] = ent_dist[:cnt]
                    ent_dist = tmp_d
                    tmp_l = np.empty(cap)
                    tmp_l[:cnt] = ent_label[:cnt]
                    ent_label = tmp_l
                ent_node[cnt] = s
                ent_dist[cnt] = d
                ent_label[cnt] = r_i
                cnt += 1
                if first_only and fresh and targets[s]:
                    remaining -= 1
                    if remaining == 0:
                        done = True
                        break
            for k in range(in_indptr[s], in_indptr[s + 1]):
                j = in_src[k]
                nd = d + tau[in_eid[k]]
                if nd > max_dist or nd == np.inf:
                    continue
                if nd >= best[j]:
                    continue
                if stamp[j] == run and dist[j] <= nd:
                    continue
                dist[j] = nd
                stamp[j] = run
                # push (nd, j): sift up from the end
                pos = hsize
                hsize += 1
                while pos > 0:
                    parent = (pos - 1) // 2
                    if hd[parent] <= nd:
                        break
                    hd[pos] = hd[parent]
                    hn[pos] = hn[parent]
                    pos = parent
                hd[pos] = nd
                hn[pos] = j
        if done:
            break
    return ent_node[:cnt], ent_dist[:cnt], ent_label[:cnt]


def _check_inputs(net: DiffusionNetwork, tau, labels, max_dist: float):
    tau = np.ascontiguousarray(tau, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.float64)
    if tau.shape != (net.edge_count,):
        raise ValidationError(f"need one time per edge: expected {net.edge_count}, got {tau.shape}")
    if labels.shape != (net.node_count,):
        raise ValidationError(f"need one label per node: expected {net.node_count}, got {labels.shape}")
    if not np.all(labels > 0.0):
        raise ValidationError("labels must be strictly positive")
    if np.any(tau < 0.0):
        raise ValidationError("edge times must be non-negative")
    if not max_dist >= 0.0:
        raise ValidationError(f"max_dist must be >= 0, got {max_dist}")
    return tau, labels


@dataclass(frozen=True)
class LeastLabelList:
    """One node's (distance, label) entries.

    Distances strictly decrease and end at 0; labels strictly increase.
    Reading: the label at index l is the smallest within every radius
    from dists[l] up to (but excluding) dists[l-1].
    """

    dists: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        d, r = self.dists, self.labels
        if d.shape != r.shape or d.ndim != 1 or d.size == 0:
            raise ValidationError("entry arrays must be non-empty and parallel")
        if d[-1] != 0.0:
            raise ValidationError("last entry must sit at distance 0")
        if d.size > 1 and not (np.all(np.diff(d) < 0.0) and np.all(np.diff(r) > 0.0)):
            raise ValidationError("entries must have strictly decreasing distances and increasing labels")

    def __len__(self):
        return int(self.dists.size)

    def query(self, T: float) -> float:
        """Smallest label among nodes within distance T (binary search)."""
        if not T >= 0.0:
            raise ValidationError(f"query time must be >= 0, got {T}")
        asc = self.dists[::-1]
        pos = int(np.searchsorted(asc, T, side="right")) - 1
        return float(self.labels[::-1][pos])


@dataclass(frozen=True)
class SketchSet:
    """All nodes' least-label lists for one (edge-time sample, labeling) pair.

    Valid for queries at any T <= max_dist (the truncation radius the
    lists were built with).
    """

    lists: tuple[LeastLabelList, ...]
    max_dist: float

    @property
    def node_count(self) -> int:
        return len(self.lists)

    def _check_T(self, T: float):
        if not T >= 0.0:
            raise ValidationError(f"query time must be >= 0, got {T}")
        if T > self.max_dist:
            raise ValidationError(f"sketch truncated at {self.max_dist}; cannot answer T={T}")

    def query(self, node: int, T: float) -> float:
        self._check_T(T)
        return self.lists[node].query(T)

    def multi_source(self, sources, T: float) -> float:
        self._check_T(T)
        ids = list(sources)
        if not ids:
            raise ValidationError("source set must be non-empty")
        return min(self.lists[int(s)].query(T) for s in ids)


def build_lists(net: DiffusionNetwork, tau, labels, max_dist: float = np.inf) -> SketchSet:
    """Construct every node's least-label list for one sample and labeling."""
    tau, labels = _check_inputs(net, tau, labels, max_dist)
    order = np.argsort(labels, kind="stable")
    no_targets = np.zeros(net.node_count, dtype=np.bool_)
    nodes, dists, labs = _traverse(
        net.in_indptr, net.in_src, net.in_eid, tau, labels, order,
        float(max_dist), False, no_targets, np.int64(-1),
    )
    by_node = np.argsort(nodes, kind="stable")
    nodes_sorted = nodes[by_node]
    dists_sorted = dists[by_node]
    labs_sorted = labs[by_node]
    offsets = np.searchsorted(nodes_sorted, np.arange(net.node_count + 1))
    lists = tuple(
        LeastLabelList(dists_sorted[offsets[s]:offsets[s + 1]], labs_sorted[offsets[s]:offsets[s + 1]])
        for s in range(net.node_count)
    )
    return SketchSet(lists, float(max_dist))


def first_least_labels(net: DiffusionNetwork, tau, labels, T: float, targets=None) -> np.ndarray:
    """Least label within distance T, per node, without materializing lists.

    Returns a node-indexed array; when `targets` (an iterable of node ids)
    is given, the walk stops once all of them are answered and other slots
    may be left at +inf.
    """
    tau, labels = _check_inputs(net, tau, labels, T)
    order = np.argsort(labels, kind="stable")
    if targets is None:
        mask = np.ones(net.node_count, dtype=np.bool_)
        remaining = net.node_count
    else:
        mask = np.zeros(net.node_count, dtype=np.bool_)
        for t in targets:
            mask[int(t)] = True
        remaining = int(mask.sum())
        if remaining == 0:
            raise ValidationError("target set must be non-empty")
    nodes, _, labs = _traverse(
        net.in_indptr, net.in_src, net.in_eid, tau, labels, order,
        float(T), True, mask, np.int64(remaining),
    )
    out = np.full(net.node_count, np.inf)
    out[nodes] = labs
    return out


def query_least_label(lst: LeastLabelList, T: float) -> float:
    """Smallest label within distance T of the list's node."""
    return lst.query(T)


def multi_source_least_label(sketch: SketchSet, sources, T: float) -> float:
    """Smallest label within distance T of any source: min over per-source queries."""
    return sketch.multi_source(sources, T)


def estimate_size(least_labels) -> float:
    """Neighborhood-size estimate (m-1)/sum from m least labels."""
    r = np.asarray(least_labels, dtype=np.float64)
    if r.ndim != 1 or r.size < 3:
        raise ConfigError(f"need at least 3 least labels for a stable estimate, got {r.size}")
    if not np.all(r > 0.0):
        raise ValidationError("least labels must be strictly positive")
    return float((r.size - 1) / np.sum(r))


# -- binary sketch cache --

_MAGIC = b"LLLSKTCH"
_CACHE_VERSION = 1


def save_sketch_set(sketch: SketchSet, path: str) -> None:
    """Write a sketch set as a small versioned binary file."""
    lengths = np.fromiter((len(l) for l in sketch.lists), dtype=np.int64, count=sketch.node_count)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(np.array([_CACHE_VERSION], dtype="<u4").tobytes())
        fh.write(np.array([sketch.node_count], dtype="<i8").tobytes())
        fh.write(np.array([sketch.max_dist], dtype="<f8").tobytes())
        fh.write(lengths.astype("<i8").tobytes())
        fh.write(np.concatenate([l.dists for l in sketch.lists]).astype("<f8").tobytes())
        fh.write(np.concatenate([l.labels for l in sketch.lists]).astype("<f8").tobytes())


def load_sketch_set(path: str) -> SketchSet:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != _MAGIC:
        raise ParseError("not a sketch cache file", str(path))
    if len(blob) < 28:
        raise ParseError("truncated sketch cache header", str(path))
    ver = int(np.frombuffer(blob, dtype="<u4", count=1, offset=8)[0])
    if ver != _CACHE_VERSION:
        raise ParseError(f"sketch cache version {ver} not supported", str(path))
    node_count = int(np.frombuffer(blob, dtype="<i8", count=1, offset=12)[0])
    max_dist = float(np.frombuffer(blob, dtype="<f8", count=1, offset=20)[0])
    if node_count < 1 or len(blob) < 28 + 8 * node_count:
        raise ParseError("truncated sketch cache", str(path))
    lengths = np.frombuffer(blob, dtype="<i8", count=node_count, offset=28)
    if (lengths < 1).any():
        raise ParseError("corrupt sketch cache: empty per-node list", str(path))
    total = int(lengths.sum())
    base = 28 + 8 * node_count
    if len(blob) < base + 16 * total:
        raise ParseError("truncated sketch cache payload", str(path))
    dists = np.frombuffer(blob, dtype="<f8", count=total, offset=base)
    labels = np.frombuffer(blob, dtype="<f8", count=total, offset=base + 8 * total)
    offsets = np.zeros(node_count + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    try:
        lists = tuple(
            LeastLabelList(dists[offsets[s]:offsets[s + 1]].copy(), labels[offsets[s]:offsets[s + 1]].copy())
            for s in range(node_count)
        )
    except ValidationError as exc:
        raise ParseError(f"corrupt sketch cache: {exc}", str(path)) from None
    return SketchSet(lists, max_dist)
