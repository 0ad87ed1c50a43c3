"""Command-line front end.

Commands: generate, estimate, maximize, eval-cascades, benchmark, replay.
Every command that writes a CSV also writes `<csv>.manifest`, a key-value
file echoing the full configuration. `replay <manifest> --out-dir D`
reruns the recorded command into D; because all randomness derives from
recorded seeds, replayed CSVs are byte-identical at any --threads.
Wall-clock timings live in the manifest (keys marked timing.*) rather
than in the deterministic CSVs; benchmark CSVs are the exception, since
there the measured time is the data.

Exit codes: 0 success, 2 invalid input or configuration, 3 runtime
failure.
"""

from __future__ import annotations

import csv
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .cascades import empirical_influence, load_cascades, mae
from .errors import ConfigError, ContinestError, GenerationError, ParseError, ValidationError
from .estimator import EstimatorConfig, estimate_influence, variance_report
from .graph import DiffusionNetwork, highest_out_degree_node, load_network, save_network
from .maximize import GreedyConfig, SketchBank, greedy_select
from .netgen import PRESETS, KroneckerSpec, generate, preset
from .oracle import naive_influence

_MANIFEST_VERSION = 1
_DEFAULT_MAX_NODES = 16384


def _default_threads() -> int:
    return os.cpu_count() or 1


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_manifest(path: str, command: str, args, outputs: dict[str, str], extras: dict[str, object]) -> None:
    lines = [f"continest-manifest: {_MANIFEST_VERSION}", f"command: {command}", f"version: {__version__}"]
    for dest, value in sorted(vars(args).items()):
        if dest in ("command", "func") or value is None:
            continue
        lines.append(f"arg.{dest}: {_fmt(value)}")
    for key, value in outputs.items():
        lines.append(f"output.{key}: {os.path.basename(value)}")
    for key, value in extras.items():
        lines.append(f"{key}: {_fmt(value)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_manifest(path: str) -> dict[str, str]:
    kv: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            key, sep, value = line.partition(": ")
            if not sep:
                raise ParseError("expected `key: value`", path, lineno)
            kv[key] = value
    if kv.get("continest-manifest") != str(_MANIFEST_VERSION):
        raise ParseError("not a recognized manifest", path)
    return kv


def _parse_sources(net: DiffusionNetwork, spec: str) -> list[int]:
    """Comma-separated ids, or a path to a whitespace-separated id file."""
    txt = spec
    if not all(part.strip().isdigit() for part in spec.split(",") if part.strip()):
        with open(spec, "r", encoding="utf-8") as fh:
            txt = ",".join(fh.read().split())
    ids = [int(part) for part in txt.split(",") if part.strip()]
    if not ids:
        raise ValidationError(f"no source ids in {spec!r}")
    return ids


def _parse_int_list(spec: str) -> list[int]:
    return [int(p) for p in spec.split(",") if p.strip()]


def _parse_float_list(spec: str) -> list[float]:
    return [float(p) for p in spec.split(",") if p.strip()]


def _parse_matrix(spec: str):
    vals = _parse_float_list(spec)
    if len(vals) != 4:
        raise ValidationError(f"--matrix needs 4 comma-separated entries, got {len(vals)}")
    return ((vals[0], vals[1]), (vals[2], vals[3]))


def _kron_spec(args, power: int, density: float) -> KroneckerSpec:
    if getattr(args, "matrix", None):
        matrix = _parse_matrix(args.matrix)
    else:
        matrix = preset(args.preset)
    return KroneckerSpec(
        seed_matrix=matrix,
        power=power,
        density=density,
        parameter_range=(args.param_low, args.param_high),
        rng_seed=args.seed,
    )


def _max_nodes_guard() -> int:
    raw = os.environ.get("CONTINEST_MAX_NODES", "")
    try:
        return int(raw) if raw else _DEFAULT_MAX_NODES
    except ValueError:
        raise ConfigError(f"CONTINEST_MAX_NODES must be an integer, got {raw!r}") from None


def _guard_nodes(nodes: int, n: int, m: int) -> None:
    guard = _max_nodes_guard()
    if nodes > guard:
        est_min = nodes * n * m * 2e-7 / 60.0
        raise ConfigError(
            f"suite point needs {nodes} nodes, above the CONTINEST_MAX_NODES guard of {guard}; "
            f"rough estimate if run anyway: ~{est_min:.1f} min. Raise the env var to proceed."
        )


# -- commands --


def cmd_generate(args) -> int:
    spec = _kron_spec(args, args.power, args.density)
    t0 = time.perf_counter()
    net = generate(spec)
    save_network(net, args.out)
    _write_manifest(
        args.out + ".manifest", "generate", args,
        outputs={"graph": args.out},
        extras={
            "result.nodes": net.node_count,
            "result.edges": net.edge_count,
            "timing.total-ms": (time.perf_counter() - t0) * 1e3,
        },
    )
    print(f"generate: {net.node_count} nodes, {net.edge_count} edges -> {args.out}")
    return 0


def cmd_estimate(args) -> int:
    net = load_network(args.graph)
    sources = _parse_sources(net, args.sources)
    t0 = time.perf_counter()
    if args.method == "continest":
        cfg = EstimatorConfig(n=args.n, m=args.m, T=args.T, master_seed=args.seed)
        est = estimate_influence(net, sources, cfg, threads=args.threads)
        value = est.value
        stderr = variance_report(est).stderr if args.n >= 2 else float("nan")
        m_cell: object = args.m
        src = est.sources
    else:
        est = naive_influence(net, sources, args.T, args.n, args.seed, threads=args.threads)
        value = est.value
        stderr = est.stderr() if args.n >= 2 else float("nan")
        m_cell = ""
        src = est.sources
    wall_ms = (time.perf_counter() - t0) * 1e3
    row = ["|".join(str(s) for s in src), args.T, args.n, m_cell, value, stderr]
    _write_csv(args.out, ["source_set", "T", "n", "m", "estimate", "stderr"], [row])
    _write_manifest(
        args.out + ".manifest", "estimate", args,
        outputs={"csv": args.out},
        extras={"result.estimate": value, "result.stderr": stderr, "timing.total-ms": wall_ms},
    )
    print(f"estimate[{args.method}]: sigma({row[0]}, T={args.T}) ~ {value:.4f} -> {args.out}")
    return 0


def cmd_maximize(args) -> int:
    net = load_network(args.graph)
    cfg = GreedyConfig(
        budget=args.budget,
        estimator=EstimatorConfig(n=args.n, m=args.m, T=args.T, master_seed=args.seed),
        lazy=(args.lazy == "true"),
    )
    t0 = time.perf_counter()
    res = greedy_select(net, cfg, threads=args.threads)
    wall_ms = (time.perf_counter() - t0) * 1e3
    rows = [
        [k + 1, node, gain, prefix]
        for k, (node, gain, prefix) in enumerate(zip(res.selected, res.gain_trace, res.prefix_estimates))
    ]
    _write_csv(args.out, ["rank", "node", "marginal_gain", "cumulative_estimate"], rows)
    _write_manifest(
        args.out + ".manifest", "maximize", args,
        outputs={"csv": args.out},
        extras={
            "result.selected": "|".join(str(s) for s in res.selected),
            "result.estimate": res.prefix_estimates[-1],
            "timing.total-ms": wall_ms,
        },
    )
    print(f"maximize: picked {list(res.selected)} (sigma ~ {res.prefix_estimates[-1]:.4f}) -> {args.out}")
    return 0


def cmd_eval_cascades(args) -> int:
    cs = load_cascades(args.cascades)
    nodes = _parse_int_list(args.nodes) if args.nodes else list(cs.sources())
    net = load_network(args.graph) if args.graph else None
    t0 = time.perf_counter()
    rows = []
    estimates: dict[int, float] = {}
    truths: dict[int, float] = {}
    for u in nodes:
        count, has_data = empirical_influence(cs, u, args.T)
        est_cell: object = ""
        err_cell: object = ""
        if net is not None:
            cfg = EstimatorConfig(n=args.n, m=args.m, T=args.T, master_seed=args.seed)
            value = estimate_influence(net, [u], cfg, threads=args.threads).value
            est_cell = value
            if has_data:
                estimates[u] = value
                truths[u] = float(count)
                err_cell = abs(value - count)
        rows.append([u, int(has_data), count, est_cell, err_cell])
    extras: dict[str, object] = {"timing.total-ms": (time.perf_counter() - t0) * 1e3}
    if truths:
        extras["result.mae"] = mae(estimates, truths)
        print(f"eval-cascades: MAE over {len(truths)} nodes = {extras['result.mae']:.4f}")
    _write_csv(args.out, ["node", "has_data", "empirical", "estimate", "abs_error"], rows)
    _write_manifest(args.out + ".manifest", "eval-cascades", args, outputs={"csv": args.out}, extras=extras)
    print(f"eval-cascades: {len(rows)} nodes -> {args.out}")
    return 0


def _bench_estimate_point(net, source, T, n, m, seed, threads):
    cfg = EstimatorConfig(n=n, m=m, T=T, master_seed=seed)
    t0 = time.perf_counter()
    est = estimate_influence(net, [source], cfg, threads=threads)
    wall_ms = (time.perf_counter() - t0) * 1e3
    return est, wall_ms


def cmd_benchmark(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, f"{args.suite}.csv")
    rows: list[list] = []
    extras: dict[str, object] = {}
    t0 = time.perf_counter()

    if args.suite == "accuracy":
        n_values = _parse_int_list(args.n_values)
        _guard_nodes(1 << args.power, max(n_values), args.m)
        net = generate(_kron_spec(args, args.power, args.density))
        source = highest_out_degree_node(net)
        truth = naive_influence(net, [source], args.T, args.truth_n, args.seed, threads=args.threads)
        extras["result.truth"] = truth.value
        extras["result.source"] = source
        for n in n_values:
            est, wall_ms = _bench_estimate_point(net, source, args.T, n, args.m, args.seed, args.threads)
            rel_err = abs(est.value - truth.value) / truth.value
            rel_se = (variance_report(est).stderr if n >= 2 else float("nan")) / truth.value
            rows.append([n, rel_err, rel_se, wall_ms])

    elif args.suite == "scaling-size":
        powers = _parse_int_list(args.powers)
        for p in powers:
            _guard_nodes(1 << p, args.n, args.m)
        xs, ys = [], []
        for p in powers:
            net = generate(_kron_spec(args, p, args.density))
            source = highest_out_degree_node(net)
            est, wall_ms = _bench_estimate_point(net, source, args.T, args.n, args.m, args.seed, args.threads)
            se = variance_report(est).stderr if args.n >= 2 else float("nan")
            rows.append([net.node_count, wall_ms, se, wall_ms])
            xs.append(math.log(net.node_count))
            ys.append(math.log(wall_ms))
        slope = float(np.polyfit(xs, ys, 1)[0])
        extras["result.loglog-slope"] = slope
        print(f"benchmark[scaling-size]: log-log slope {slope:.3f}")

    elif args.suite == "scaling-density":
        _guard_nodes(1 << args.power, args.n, args.m)
        walls = []
        for d in _parse_float_list(args.densities):
            net = generate(_kron_spec(args, args.power, d))
            source = highest_out_degree_node(net)
            est, wall_ms = _bench_estimate_point(net, source, args.T, args.n, args.m, args.seed, args.threads)
            se = variance_report(est).stderr if args.n >= 2 else float("nan")
            rows.append([d, wall_ms, se, wall_ms])
            walls.append(wall_ms)
        if len(walls) >= 2:
            extras["result.max-ratio"] = max(walls[i + 1] / walls[i] for i in range(len(walls) - 1))

    elif args.suite == "sources":
        _guard_nodes(1 << args.power, args.n, args.m)
        net = generate(_kron_spec(args, args.power, args.density))
        est_cfg = EstimatorConfig(n=args.n, m=args.m, T=args.T, master_seed=args.seed)
        bank = SketchBank(net, est_cfg, threads=args.threads)
        res = greedy_select(net, GreedyConfig(budget=args.budget, estimator=est_cfg), threads=args.threads, bank=bank)
        total_ms = (time.perf_counter() - t0) * 1e3
        for k in range(args.budget):
            se = bank.stderr(res.selected[: k + 1])
            rows.append([k + 1, res.prefix_estimates[k], se, total_ms])
        extras["result.selected"] = "|".join(str(s) for s in res.selected)

    else:
        raise ConfigError(f"unknown suite {args.suite!r}")

    extras["timing.total-ms"] = (time.perf_counter() - t0) * 1e3
    _write_csv(out, ["x", "y", "stderr", "wall_ms"], rows)
    _write_manifest(out + ".manifest", "benchmark", args, outputs={"csv": out}, extras=extras)
    print(f"benchmark[{args.suite}]: {len(rows)} rows -> {out}")
    return 0


_NO_THREADS = {"generate"}


def cmd_replay(args) -> int:
    kv = _read_manifest(args.manifest)
    command = kv.get("command", "")
    argv: list[str] = [command]
    for key, value in kv.items():
        if not key.startswith("arg."):
            continue
        dest = key[len("arg."):]
        if dest == "threads":
            continue
        if dest == "out":
            os.makedirs(args.out_dir, exist_ok=True)
            value = os.path.join(args.out_dir, os.path.basename(value))
        elif dest == "out_dir":
            value = args.out_dir
        argv += ["--" + dest.replace("_", "-"), value]
    if command not in _NO_THREADS:
        argv += ["--threads", str(args.threads if args.threads is not None else _default_threads())]
    print(f"replay: {' '.join(argv)}")
    return _run(argv)


# -- wiring --


def _add_kron_flags(p, power_default: int | None, density_default: float | None, preset_default: str = "random"):
    p.add_argument("--preset", choices=sorted(PRESETS), default=preset_default)
    p.add_argument("--matrix", help="four comma-separated 2x2 entries, overrides --preset")
    if power_default is not None:
        p.add_argument("--power", type=int, default=power_default)
    if density_default is not None:
        p.add_argument("--density", type=float, default=density_default)
    p.add_argument("--param-low", type=float, default=0.0)
    p.add_argument("--param-high", type=float, default=10.0)


def _add_estimator_flags(p, n_default: int):
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--n", type=int, default=n_default)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())


def _build_parser():
    import argparse

    root = argparse.ArgumentParser(prog="continest", description=__doc__.splitlines()[0])
    root.add_argument("--version", action="version", version=f"continest {__version__}")
    sub = root.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a Kronecker network file")
    _add_kron_flags(p, power_default=10, density_default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate", help="estimate influence of a source set")
    p.add_argument("--graph", required=True)
    p.add_argument("--sources", required=True, help="comma-separated ids or a file of ids")
    p.add_argument("--method", choices=["continest", "naive"], default="continest")
    _add_estimator_flags(p, n_default=10000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("maximize", help="greedy source-set selection")
    p.add_argument("--graph", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--lazy", choices=["true", "false"], default="true")
    _add_estimator_flags(p, n_default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_maximize)

    p = sub.add_parser("eval-cascades", help="empirical influence from cascade data")
    p.add_argument("--cascades", required=True)
    p.add_argument("--nodes", help="comma-separated ids; default: all observed sources")
    p.add_argument("--graph", help="network file; when given, estimates and MAE are added")
    _add_estimator_flags(p, n_default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_cascades)

    p = sub.add_parser("benchmark", help="curve suites: accuracy, scaling, sources")
    p.add_argument("--suite", choices=["accuracy", "scaling-size", "scaling-density", "sources"], required=True)
    _add_kron_flags(p, power_default=10, density_default=2.0, preset_default="core-periphery")
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--n-values", default="100,1000,10000", help="accuracy suite sample counts")
    p.add_argument("--truth-n", type=int, default=100000)
    p.add_argument("--powers", default="7,10,13", help="scaling-size suite node-count exponents")
    p.add_argument("--densities", default="1.5,3.0", help="scaling-density suite densities")
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("replay", help="rerun a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_replay)

    return root


def _run(argv: list[str]) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        return _run(list(argv))
    except SystemExit as exc:  # argparse
        code = exc.code
        return code if isinstance(code, int) else 2
    except (ValidationError, ConfigError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ContinestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
