"""Shared fixtures: hand-built networks, random-network helper, acceptance log."""

import numpy as np
import pytest

from continest.graph import DiffusionNetwork, EdgeRecord
from continest.transmission import Exponential


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance(request):
    """record(num, name, ok, detail) -> logs one summary line, then asserts ok."""
    lines = request.config._acceptance_lines

    def record(num: int, name: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        suffix = f" [{detail}]" if detail else ""
        lines.append(f"criterion {num}: {status} - {name}{suffix}")
        assert ok, f"criterion {num} ({name}) failed{suffix}"

    return record


def make_chain_net():
    """Seven nodes wired so every pairwise distance differs; used with fixed taus."""
    e = Exponential(1.0)
    edges = (
        EdgeRecord(2, 0, e),
        EdgeRecord(0, 1, e),
        EdgeRecord(1, 4, e),
        EdgeRecord(4, 3, e),
        EdgeRecord(4, 5, e),
        EdgeRecord(5, 6, e),
    )
    return DiffusionNetwork(node_count=7, edges=edges)


CHAIN_TAU = np.array([0.5, 0.5, 1.0, 0.5, 1.0, 1.5])
CHAIN_LABELS = np.array([1.5, 0.3, 1.8, 0.4, 0.2, 3.7, 2.2])


@pytest.fixture
def chain_net():
    return make_chain_net()


def random_exp_net(node_count: int, edge_count: int, rng: np.random.Generator) -> DiffusionNetwork:
    """Random simple digraph with unit-rate exponential edges."""
    max_pairs = node_count * (node_count - 1)
    if edge_count > max_pairs:
        raise ValueError("too many edges requested")
    seen = set()
    edges = []
    model = Exponential(1.0)
    while len(edges) < edge_count:
        s = int(rng.integers(node_count))
        d = int(rng.integers(node_count))
        if s == d or (s, d) in seen:
            continue
        seen.add((s, d))
        edges.append(EdgeRecord(s, d, model))
    return DiffusionNetwork(node_count=node_count, edges=tuple(edges))


def neighborhood_by_dijkstra(net: DiffusionNetwork, tau: np.ndarray, sources, T: float) -> np.ndarray:
    """Boolean mask of nodes within distance T of the source set (oracle path)."""
    from continest.oracle import shortest_infection_times

    times = shortest_infection_times(net, tau, sources)
    return times.times <= T
