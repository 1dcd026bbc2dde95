"""Command line entry point: ``netinfer <subcommand> ...``.

Exit status is 0 on success, 1 for bad parameters or usage, 2 for runtime
and numerical failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from netinfer.clustering import extract_pair_values, infer_topology
from netinfer.errors import NetInferError, ParameterError
from netinfer.estimators import estimate
from netinfer.graph import generate_ba, generate_er, laplacian_combination, spectral_radius
from netinfer.harness import (
    ExperimentConfig,
    GraphModel,
    draw_instance,
    run_experiment,
    stream_moments,
    write_csv,
)
from netinfer.metrics import run_metrics
from netinfer.moments import accumulate
from netinfer.plotting import emit_plot, emit_scatter
from netinfer.sampling import (
    NoiseSource,
    ObservationMask,
    observe,
    read_trajectory,
    select_observed,
    simulate_var,
    write_trajectory,
)

log = logging.getLogger("netinfer")
DEFAULT_SEED = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed(args) -> int:
    if args.seed is None:
        args.seed = DEFAULT_SEED
        print(f"seed: {DEFAULT_SEED} (default)", file=sys.stderr)
    return args.seed


def _int_list(text: str) -> list[int]:
    return [int(float(x)) for x in text.split(",") if x]


def _str_list(text: str) -> list[str]:
    return [x for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="netinfer", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="random graph and its combination matrix (.npz)")
    g.add_argument("--model", choices=("er", "ba"), default="er")
    g.add_argument("--n-nodes", type=int, default=200)
    g.add_argument("--p", type=float, default=0.1)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--lam", type=float, default=0.99)
    g.add_argument("--mu", type=float, default=0.1)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)

    s = sub.add_parser("simulate", help="VAR trajectory dump from a generated graph")
    s.add_argument("--graph", required=True, help=".npz written by 'generate'")
    s.add_argument("--horizon", "-T", type=int, required=True, help="last time index T (writes y_0..y_T)")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)

    i = sub.add_parser("infer", help="estimate and cluster one trajectory")
    i.add_argument("--trajectory", required=True)
    i.add_argument("--mu", type=float, default=0.1)
    i.add_argument("--n", type=int, help="sample count (default: all, T - 2)")
    group = i.add_mutually_exclusive_group()
    group.add_argument("--xi", type=float, help="observe a random fraction of nodes (uses --seed)")
    group.add_argument("--observed", type=_int_list, help="comma-separated observed node indices")
    i.add_argument("--estimator", default="proposed", choices=("proposed", "granger", "one_lag", "residual"))
    i.add_argument("--clustering", default="gmm", choices=("gmm", "kmeans"))
    i.add_argument("--graph", help="ground-truth .npz to score the prediction against")
    i.add_argument("--seed", type=int)
    i.add_argument("--out", required=True, help="JSON result path")

    e = sub.add_parser("experiment", help="Monte Carlo sweep from a JSON config")
    e.add_argument("--config")
    e.add_argument("--runs", type=int)
    e.add_argument("--seed", type=int, help="master seed")
    e.add_argument("--n-nodes", type=int)
    e.add_argument("--p", type=float)
    e.add_argument("--xi", type=float)
    e.add_argument("--mu", type=float)
    e.add_argument("--lam", type=float)
    e.add_argument("--sample-sizes", type=_int_list)
    e.add_argument("--estimators", type=_str_list)
    e.add_argument("--clustering", type=_str_list)
    e.add_argument("--mask-mode", choices=("fixed", "per_run"))
    e.add_argument("--graph-mode", choices=("fixed", "per_run"))
    e.add_argument("--output-dir")
    e.add_argument("--workers", type=int)
    e.add_argument("--no-timing", action="store_true", help="write 0 for wall_time_ms")
    e.add_argument("--no-plots", action="store_true")

    pl = sub.add_parser("plot", help="SVG line chart from aggregate.csv")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--x", default="n")
    pl.add_argument("--y", default="error_rate_mean")
    pl.add_argument("--series", default="estimator")
    pl.add_argument("--where", action="append", default=[], metavar="FIELD=VALUE")
    pl.add_argument("--log-x", action="store_true")
    pl.add_argument("--out", required=True)

    sc = sub.add_parser("scatter", help="pair-value scatter/histograms of the proposed estimate")
    sc.add_argument("--n-nodes", type=int, default=200)
    sc.add_argument("--p", type=float, default=0.1)
    sc.add_argument("--xi", type=float, default=0.2)
    sc.add_argument("--mu", type=float, default=0.1)
    sc.add_argument("--lam", type=float, default=0.99)
    sc.add_argument("--n", type=_int_list, default=[10_000, 100_000])
    sc.add_argument("--estimator", default="proposed", choices=("proposed", "granger", "one_lag", "residual"))
    sc.add_argument("--seed", type=int)
    sc.add_argument("--out", required=True)
    return p


def cmd_generate(args) -> None:
    seed = _seed(args)
    if args.model == "er":
        G = generate_er(args.n_nodes, args.p, seed)
    else:
        G = generate_ba(args.n_nodes, args.m, seed)
    A = laplacian_combination(G, args.lam, args.mu)
    np.savez(args.out, G=G, A=A.matrix, mu=A.mu, lam=A.lam, seed=np.uint64(seed))
    print(f"{args.out}: N={args.n_nodes} edges={int(G.sum()) // 2} rho(A)={spectral_radius(A):.6f}")


def _load_graph(path):
    try:
        with np.load(path) as z:
            return z["G"], z["A"], float(z["mu"])
    except (OSError, KeyError, ValueError) as exc:
        raise ParameterError(f"{path}: not a graph file written by 'generate' ({exc})") from exc


def cmd_simulate(args) -> None:
    seed = _seed(args)
    _, A, mu = _load_graph(args.graph)
    traj = simulate_var(A, mu, args.horizon, NoiseSource(seed))
    write_trajectory(args.out, traj)
    print(f"{args.out}: N={traj.shape[1]} T={traj.shape[0] - 1}")


def cmd_infer(args) -> None:
    traj = read_trajectory(args.trajectory)
    N = traj.shape[1]
    if args.observed is not None:
        mask = ObservationMask(N, np.array(sorted(args.observed)))
    elif args.xi is not None:
        mask = select_observed(N, args.xi, _seed(args))
    else:
        mask = ObservationMask.full(N)
    n = args.n if args.n is not None else traj.shape[0] - 3
    moments = accumulate(observe(traj, mask), n)
    est = estimate(args.estimator, moments, args.mu)
    pred = infer_topology(est, args.clustering)
    out = {
        "observed": mask.indices.tolist(),
        "n": n,
        "estimator": args.estimator,
        "clustering": args.clustering,
        "degenerate": pred.degenerate,
        "estimate": est.matrix.tolist(),
        "prediction": pred.matrix.tolist(),
    }
    if args.graph:
        G, _, _ = _load_graph(args.graph)
        m = run_metrics(pred, G[np.ix_(mask.indices, mask.indices)])
        out.update(error_rate=m.error_rate, fn_score=m.fn_score, fp_score=m.fp_score)
    Path(args.out).write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
    summary = f", error_rate={out['error_rate']:.4f}" if "error_rate" in out else ""
    print(f"{args.out}: |S|={mask.size} n={n}{summary}")


def cmd_experiment(args) -> None:
    config = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    overrides = {
        "runs": args.runs, "n_nodes": args.n_nodes, "xi": args.xi, "mu": args.mu, "lam": args.lam,
        "sample_sizes": args.sample_sizes, "estimators": args.estimators, "clustering": args.clustering,
        "mask_mode": args.mask_mode, "graph_mode": args.graph_mode, "output_dir": args.output_dir,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    elif not args.config:
        overrides["master_seed"] = _seed(args)
    if args.p is not None:
        overrides["graph_model"] = GraphModel(kind="er", p=args.p)
    if args.no_timing:
        overrides["record_timing"] = False
    config = replace(config, **overrides)
    print(f"seed: {config.master_seed}", file=sys.stderr)
    result = run_experiment(config, workers=args.workers)
    runs_path, agg_path = write_csv(result)
    if not args.no_plots and config.clustering:
        for clu in config.clustering:
            for metric in ("error_rate", "fn_score"):
                emit_plot(agg_path, "n", f"{metric}_mean", "estimator",
                          Path(config.output_dir) / f"{metric}_{clu}.svg",
                          where={"clustering": clu}, log_x=True, title=f"{metric} ({clu})")
    failed = sum(r.failed for r in result.records)
    print(f"{runs_path}, {agg_path}: {len(result.records)} records, {failed} failed")


def cmd_plot(args) -> None:
    where = {}
    for item in args.where:
        if "=" not in item:
            raise ParameterError(f"--where expects FIELD=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        where[k] = v
    counts = emit_plot(args.csv, args.x, args.y, args.series, args.out, where=where, log_x=args.log_x)
    print(f"{args.out}: {len(counts)} series")


def cmd_scatter(args) -> None:
    seed = _seed(args)
    config = ExperimentConfig(graph_model=GraphModel("er", args.p), n_nodes=args.n_nodes, xi=args.xi,
                              mu=args.mu, lam=args.lam, sample_sizes=tuple(sorted(args.n)), runs=1,
                              master_seed=seed)
    inst = draw_instance(config, 0)
    moments = stream_moments(inst.combination, config.mu, inst.mask, config.sample_sizes, NoiseSource(inst.noise_seed))
    _, truth = extract_pair_values(inst.truth_g)
    panels = []
    for n in config.sample_sizes:
        _, values = extract_pair_values(estimate(args.estimator, moments[n], config.mu))
        panels.append((f"N={config.n_nodes}, xi={config.xi}, n={n}", values, truth))
    emit_scatter(panels, args.out)
    print(f"{args.out}: {len(panels)} panels")


COMMANDS = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "infer": cmd_infer,
    "experiment": cmd_experiment,
    "plot": cmd_plot,
    "scatter": cmd_scatter,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"netinfer: error: {exc}", file=sys.stderr)
        return 1
    except (NetInferError, OSError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"netinfer: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
