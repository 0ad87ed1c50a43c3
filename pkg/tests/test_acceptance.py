"""End-to-end acceptance suite.

Each numbered test exercises one release gate at desk scale and logs a
one-line verdict through the `acceptance` fixture (summarized at the end
of the pytest run). Workloads that several gates share - the 1,024-node
reference network and its naive ground truth - are built once per module
and memoized.

Statistical gates run on frozen seeds. Where a tolerance sits within a
couple of standard errors of the measured noise (the m=5 variance ratio,
the error-decay ladders) the seeds were checked for typicality against a
wider sweep rather than picked to pass; decay checks average over five
master seeds so a single lucky draw cannot invert the trend.
"""

import csv
import itertools
import os
import time

import numpy as np
import pytest

import continest as ct
from continest.cli import main
from continest.estimator import EstimatorConfig
from continest.maximize import GreedyConfig, SketchBank, greedy_select
from continest.neighborhood import build_lists, draw_labels, first_least_labels
from continest.oracle import shortest_infection_times
from continest.streams import label_stream, substream, tau_stream

from conftest import neighborhood_by_dijkstra, random_exp_net

SEEDS = range(5)


# -- shared reference workload: 1,024-node core-periphery Weibull network --


@pytest.fixture(scope="module")
def reference(request):
    """Reference network, naive truth, and a memoized estimate cache."""
    t0 = time.perf_counter()
    net = ct.generate(
        ct.KroneckerSpec(seed_matrix=ct.preset("core-periphery"), power=10, density=2.0, rng_seed=7)
    )
    source = ct.highest_out_degree_node(net)
    truth = ct.naive_influence(net, [source], 10.0, 100_000, 101)
    setup_s = time.perf_counter() - t0

    cache: dict[tuple[int, int, int], float] = {}

    def rel_err(n: int, m: int, seed: int) -> float:
        key = (n, m, seed)
        if key not in cache:
            cfg = EstimatorConfig(n=n, m=m, T=10.0, master_seed=seed)
            est = ct.estimate_influence(net, [source], cfg)
            cache[key] = abs(est.value - truth.value) / truth.value
        return cache[key]

    return {"net": net, "source": source, "truth": truth, "rel_err": rel_err, "setup_s": setup_s}


def test_criterion_1_accuracy_vs_naive_oracle(reference, acceptance):
    t0 = time.perf_counter()
    err = reference["rel_err"](10_000, 5, 0)
    elapsed = reference["setup_s"] + (time.perf_counter() - t0)
    ok = err < 0.03 and elapsed < 600.0
    acceptance(
        1,
        "sketch estimate matches naive oracle on 1,024-node network",
        ok,
        f"rel err {err:.4f} < 0.03, {elapsed:.0f}s < 600s",
    )


def test_criterion_2_error_decay_in_n_and_m(reference, acceptance):
    rel_err = reference["rel_err"]
    # average over master seeds so one lucky small-n draw cannot invert the trend
    n_curve = [float(np.mean([rel_err(n, 5, s) for s in SEEDS])) for n in (100, 1_000, 10_000)]
    m_curve = [float(np.mean([rel_err(10_000, m, s) for s in SEEDS])) for m in (3, 5, 10)]
    slack = 1.10
    ok_n = all(n_curve[i + 1] < n_curve[i] * slack for i in range(len(n_curve) - 1))
    ok_m = all(m_curve[i + 1] < m_curve[i] * slack for i in range(len(m_curve) - 1))
    fmt = lambda xs: "->".join(f"{x:.4f}" for x in xs)
    acceptance(
        2,
        "error decays along n (m=5) and along m (n=10^4)",
        ok_n and ok_m,
        f"avg |rel err| over 5 seeds; n: {fmt(n_curve)}; m: {fmt(m_curve)}",
    )


def test_criterion_3_size_estimate_mean_and_variance(acceptance):
    # one fixed edge-time sample on a 64-node network; truth from Dijkstra
    net = ct.generate(
        ct.KroneckerSpec(seed_matrix=ct.preset("random"), power=6, density=2.5, rng_seed=11)
    )
    s = ct.highest_out_degree_node(net)
    tau = ct.draw_sample(net, tau_stream(42, 0))
    T = 5.0
    mask = shortest_infection_times(net, tau, [s]).times <= T
    size = int(mask.sum())
    assert size >= 2

    draws, chunk = 10_000, 2_500
    details, ok = [], True
    for m in (5, 10, 20):
        rng = substream(0, 1, m)
        mins = np.empty((draws, m))
        for lo in range(0, draws, chunk):
            labels = np.maximum(rng.standard_exponential((chunk, m, net.node_count)), 5e-324)
            if lo == 0 and m == 5:
                # spot-check the vectorized oracle against the sketch path
                for d, u in itertools.product(range(2), range(m)):
                    sketch_val = first_least_labels(net, tau, labels[d, u], T)[s]
                    assert sketch_val == labels[d, u][mask].min()
            mins[lo : lo + chunk] = labels[:, :, mask].min(axis=2)
        est = (m - 1) / mins.sum(axis=1)
        mean_dev = abs(float(est.mean()) - size) / size
        mse_ratio = float(np.mean((est - size) ** 2)) / (size * size / (m - 2))
        ok = ok and mean_dev < 0.02 and abs(mse_ratio - 1.0) < 0.10
        details.append(f"m={m}: mean dev {mean_dev:.4f}, mse/expected {mse_ratio:.3f}")
    acceptance(
        3,
        "size estimate unbiased with variance S^2/(m-2)",
        ok,
        f"S={size}; " + "; ".join(details),
    )


def test_criterion_4_sketch_equals_brute_force(acceptance):
    rng = np.random.default_rng(4)
    mismatches = 0
    for case in range(200):
        v = int(rng.integers(4, 129))
        e = int(min(rng.integers(v, 3 * v), v * (v - 1)))
        net = random_exp_net(v, e, rng)
        tau = ct.draw_sample(net, tau_stream(case, 0))
        labels = draw_labels(label_stream(case, 0, 0), v)
        sketch = build_lists(net, tau, labels)
        T = float(rng.uniform(0.1, 3.0))
        s = int(rng.integers(v))
        sources = [int(i) for i in rng.choice(v, size=int(rng.integers(1, 4)), replace=False)]

        expect_s = labels[neighborhood_by_dijkstra(net, tau, [s], T)].min()
        expect_a = labels[neighborhood_by_dijkstra(net, tau, sources, T)].min()
        if ct.query_least_label(sketch.lists[s], T) != expect_s:
            mismatches += 1
        if ct.multi_source_least_label(sketch, sources, T) != expect_a:
            mismatches += 1
    acceptance(
        4,
        "sketch queries equal Dijkstra brute force on 200 random cases",
        mismatches == 0,
        f"{mismatches} mismatches in 400 exact comparisons",
    )


def test_criterion_5_greedy_near_optimal(acceptance):
    rng = np.random.default_rng(55)
    budget, instances = 3, 20
    t0 = time.perf_counter()
    worst_margin = np.inf
    failures = 0
    for idx in range(instances):
        net = random_exp_net(10, 20, rng)
        cfg = EstimatorConfig(n=50_000, m=5, T=2.0, master_seed=idx)
        bank = SketchBank(net, cfg)
        res = greedy_select(net, GreedyConfig(budget=budget, estimator=cfg), bank=bank)
        greedy_val = res.prefix_estimates[-1]

        best, max_se = -np.inf, 0.0
        for combo in itertools.combinations(range(net.node_count), budget):
            val, per_sample = bank.evaluate(combo)
            max_se = max(max_se, float(np.sqrt(np.var(per_sample, ddof=1) / per_sample.size)))
            best = max(best, val)
        bound = (1.0 - 1.0 / np.e) * best - 2 * budget * (3.0 * max_se)
        worst_margin = min(worst_margin, greedy_val - bound)
        if greedy_val < bound:
            failures += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 900.0
    acceptance(
        5,
        "greedy beats (1-1/e) of exhaustive best on 20 networks",
        ok,
        f"0 of 20 below bound, worst margin {worst_margin:.3f}, {elapsed:.0f}s < 900s"
        if failures == 0
        else f"{failures} of 20 below bound",
    )


def test_criterion_6_per_sample_monotonicity(acceptance):
    rng = np.random.default_rng(66)
    violations = 0
    for _ in range(100):
        v = int(rng.integers(5, 65))
        e = int(min(rng.integers(v, 3 * v), v * (v - 1)))
        net = random_exp_net(v, e, rng)
        t_lo, t_hi = sorted(rng.uniform(0.2, 4.0, size=2))
        if t_lo == t_hi:
            t_hi += 0.5
        big = sorted(int(i) for i in rng.choice(v, size=int(rng.integers(2, 4)), replace=False))
        small = big[:1]

        def per_sample(sources, T):
            cfg = EstimatorConfig(n=200, m=3, T=float(T), master_seed=7)
            return ct.estimate_influence(net, sources, cfg).per_sample_values

        if not np.all(per_sample(small, t_lo) <= per_sample(small, t_hi)):
            violations += 1
        if not np.all(per_sample(small, t_hi) <= per_sample(big, t_hi)):
            violations += 1
    acceptance(
        6,
        "exact per-sample monotonicity in T and in the source set",
        violations == 0,
        f"{violations} violations in 200 elementwise checks",
    )


def test_criterion_7_near_linear_scaling(acceptance):
    def wall_seconds(power: int, density: float) -> tuple[int, float]:
        spec = ct.KroneckerSpec(
            seed_matrix=ct.preset("core-periphery"), power=power, density=density, rng_seed=3
        )
        net = ct.generate(spec)
        src = ct.highest_out_degree_node(net)
        warm = EstimatorConfig(n=10, m=5, T=10.0, master_seed=0)
        ct.estimate_influence(net, [src], warm)
        cfg = EstimatorConfig(n=1_000, m=5, T=10.0, master_seed=0)
        t0 = time.perf_counter()
        ct.estimate_influence(net, [src], cfg)
        return net.node_count, time.perf_counter() - t0

    points = [wall_seconds(p, 1.5) for p in (7, 10, 13)]
    slope = float(
        np.polyfit(np.log([n for n, _ in points]), np.log([t for _, t in points]), 1)[0]
    )
    _, t_sparse = wall_seconds(10, 1.5)
    _, t_dense = wall_seconds(10, 3.0)
    ratio = t_dense / t_sparse
    ok = slope <= 1.3 and ratio <= 2.5
    acceptance(
        7,
        "wall time near linear in nodes; mild in edge density",
        ok,
        f"log-log slope {slope:.2f} <= 1.3 over 128..8192 nodes, density x2 ratio {ratio:.2f} <= 2.5",
    )


# -- criterion 8: replay determinism across thread counts --


def _rows(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _same_bytes(a: str, b: str) -> bool:
    with open(a, "rb") as fa, open(b, "rb") as fb:
        return fa.read() == fb.read()


def _same_columns(a: str, b: str, keep: list[str]) -> bool:
    head_a, rows_a = _rows(a)
    head_b, rows_b = _rows(b)
    if head_a != head_b or len(rows_a) != len(rows_b):
        return False
    idx = [head_a.index(c) for c in keep]
    return all(
        [ra[i] for i in idx] == [rb[i] for i in idx] for ra, rb in zip(rows_a, rows_b)
    )


def test_criterion_8_replay_determinism(tmp_path, acceptance):
    run = lambda *argv: main([str(a) for a in argv])
    base = tmp_path / "base"
    base.mkdir()
    net_path = base / "net.tsv"
    assert run("generate", "--preset", "core-periphery", "--power", "5", "--density", "2.0",
               "--seed", "1", "--out", net_path) == 0

    net = ct.load_network(str(net_path))
    casc_rng = np.random.default_rng(9)
    cascades = []
    for l in range(50):
        src = int(casc_rng.integers(net.node_count))
        tau = ct.draw_sample(net, tau_stream(900 + l, 0))
        times = shortest_infection_times(net, tau, [src]).times
        events = tuple((i, float(t)) for i, t in enumerate(times) if np.isfinite(t) and t <= 10.0)
        cascades.append(ct.Cascade(source=src, events=events))
    casc_path = base / "cascades.txt"
    ct.save_cascades(ct.CascadeSet(tuple(cascades)), str(casc_path))

    assert run("estimate", "--graph", net_path, "--sources", "0,3", "--T", "2", "--n", "500",
               "--m", "5", "--seed", "3", "--threads", "1", "--out", base / "est.csv") == 0
    assert run("estimate", "--graph", net_path, "--sources", "0", "--method", "naive", "--T", "2",
               "--n", "400", "--seed", "3", "--threads", "1", "--out", base / "naive.csv") == 0
    assert run("maximize", "--graph", net_path, "--budget", "3", "--T", "2", "--n", "400",
               "--seed", "2", "--threads", "1", "--out", base / "max.csv") == 0
    assert run("eval-cascades", "--cascades", casc_path, "--graph", net_path, "--T", "2",
               "--n", "300", "--seed", "4", "--threads", "1", "--out", base / "eval.csv") == 0
    bench = {
        "accuracy": ("--power", "4", "--n-values", "50,100", "--truth-n", "2000", "--T", "2",
                     "--m", "4", "--seed", "2"),
        "scaling-size": ("--powers", "4,5", "--n", "100", "--T", "2"),
        "scaling-density": ("--power", "4", "--densities", "1.5,3.0", "--n", "100", "--T", "2"),
        "sources": ("--power", "4", "--budget", "3", "--n", "300", "--T", "2"),
    }
    for suite, extra in bench.items():
        assert run("benchmark", "--suite", suite, *extra, "--threads", "1",
                   "--out-dir", base / suite) == 0

    # timing measurements are data, not reproducible output: benchmark
    # comparisons keep only the value columns, byte-exact everywhere else
    deterministic = ["net.tsv", "est.csv", "naive.csv", "max.csv", "eval.csv"]
    bench_keep = {
        "accuracy": ["x", "y", "stderr"],
        "scaling-size": ["x", "stderr"],
        "scaling-density": ["x", "stderr"],
        "sources": ["x", "y", "stderr"],
    }

    checks = []
    for threads, name in ((3, "net.tsv"), (4, "est.csv"), (2, "naive.csv"), (5, "max.csv"),
                          (2, "eval.csv")):
        rb = tmp_path / f"rb-{name.split('.')[0]}-{threads}"
        rb.mkdir()
        assert run("replay", f"{base / name}.manifest", "--out-dir", rb, "--threads", threads) == 0
        checks.append(_same_bytes(str(base / name), str(rb / name)))
    for suite, keep in bench_keep.items():
        rb = tmp_path / f"rb-{suite}"
        assert run("replay", base / suite / f"{suite}.csv.manifest", "--out-dir", rb,
                   "--threads", "3") == 0
        checks.append(_same_columns(str(base / suite / f"{suite}.csv"),
                                    str(rb / f"{suite}.csv"), keep))
    assert "net.tsv" in deterministic  # guard against dropping the graph check above
    acceptance(
        8,
        "every CLI command replays byte-identically across thread counts",
        all(checks),
        f"{sum(checks)}/{len(checks)} outputs matched (benchmark timing columns excluded)",
    )


def test_criterion_9_full_scale_claims_stated_not_reproduced(acceptance):
    # desk-scale stand-ins only: cascade bookkeeping must behave lawfully
    net = ct.generate(
        ct.KroneckerSpec(seed_matrix=ct.preset("core-periphery"), power=6, density=2.0, rng_seed=14)
    )
    rng = np.random.default_rng(91)
    cascades = []
    for l in range(300):
        src = int(rng.integers(net.node_count))
        tau = ct.draw_sample(net, tau_stream(500 + l, 0))
        times = shortest_infection_times(net, tau, [src]).times
        events = tuple((i, float(t)) for i, t in enumerate(times) if np.isfinite(t) and t <= 10.0)
        cascades.append(ct.Cascade(source=src, events=events))
    cs = ct.CascadeSet(tuple(cascades))

    top = max(cs.sources(), key=lambda s: sum(1 for c in cs if c.source == s))
    curve = []
    ok = True
    for T in (0.0, 1.0, 2.0, 5.0, 10.0):
        value, has_data = ct.empirical_influence(cs, top, T)
        ok = ok and has_data
        curve.append(value)
    ok = ok and all(curve[i] <= curve[i + 1] for i in range(len(curve) - 1))

    truths = {int(s): ct.empirical_influence(cs, s, 5.0)[0] for s in cs.sources()[:10]}
    ok = ok and ct.mae(truths, truths) == 0.0
    shifted = {k: v + 0.25 for k, v in truths.items()}
    ok = ok and abs(ct.mae(shifted, truths) - 0.25) < 1e-12
    perm = dict(reversed(list(truths.items())))
    ok = ok and ct.mae(perm, truths) == ct.mae(truths, truths)

    acceptance(
        9,
        "million-node and real-cascade benchmarks not reproduced at desk scale; "
        "covered by the scaling gate and cascade property checks",
        ok,
        f"empirical influence monotone over {len(curve)} horizons; MAE identity/shift/permutation hold",
    )
