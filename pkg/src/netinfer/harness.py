"""Seeded Monte Carlo sweeps over estimators, clustering methods and sample sizes.

Each run derives independent graph/mask/noise seeds from ``(master_seed, run)``,
simulates one trajectory up to ``max(sample_sizes) + 2`` and snapshots the
streaming moments at every requested ``n``. Runs are independent, so results
do not depend on how they are scheduled across workers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from netinfer._rng import FIXED_RUN, derive_seed
from netinfer.clustering import infer_topology
from netinfer.errors import NetInferError, ParameterError
from netinfer.estimators import EstimatorKind, estimate
from netinfer.graph import generate_ba, generate_er, laplacian_combination
from netinfer.metrics import RunMetrics, Summary, bias_variance, run_metrics, summarize
from netinfer.moments import MomentAccumulator, SampleMoments
from netinfer.sampling import NoiseSource, ObservationMask, iter_var, select_observed

log = logging.getLogger(__name__)

WORKERS_ENV = "NETINFER_WORKERS"
ESTIMATORS = ("proposed", "granger", "one_lag", "residual")
CLUSTERING = ("gmm", "kmeans")
MODES = ("fixed", "per_run")

RUN_COLUMNS = [
    "experiment_id", "estimator", "clustering", "N", "p_or_m", "xi", "mu", "lambda",
    "n", "run", "seed", "error_rate", "fn_score", "fp_score", "degenerate", "wall_time_ms",
]
CELL_KEYS = ["experiment_id", "estimator", "clustering", "N", "p_or_m", "xi", "mu", "lambda", "n"]
METRIC_NAMES = ("error_rate", "fn_score", "fp_score")
AGGREGATE_COLUMNS = (
    CELL_KEYS
    + [f"{m}_{s}" for m in METRIC_NAMES for s in ("mean", "std", "ci_low", "ci_high")]
    + ["bias", "variance", "runs", "failed_runs", "degenerate_runs"]
)


@dataclass(frozen=True)
class GraphModel:
    kind: str = "er"
    p: float | None = 0.1
    m: int | None = None

    def __post_init__(self):
        if self.kind == "er":
            if self.p is None or not 0.0 < self.p < 1.0:
                raise ParameterError(f"ER graph needs p in (0, 1), got {self.p}")
        elif self.kind == "ba":
            if self.m is None or self.m < 1:
                raise ParameterError(f"BA graph needs m >= 1, got {self.m}")
        else:
            raise ParameterError(f"unknown graph model {self.kind!r}")

    @property
    def param(self):
        return self.p if self.kind == "er" else self.m

    def generate(self, n_nodes: int, seed: int) -> np.ndarray:
        if self.kind == "er":
            return generate_er(n_nodes, self.p, seed)
        return generate_ba(n_nodes, self.m, seed)

    def to_dict(self) -> dict:
        return {"kind": "er", "p": self.p} if self.kind == "er" else {"kind": "ba", "m": self.m}

    @classmethod
    def from_dict(cls, d: dict) -> "GraphModel":
        d = dict(d)
        kind = d.pop("kind", "er")
        allowed = {"er": {"p"}, "ba": {"m"}}.get(kind, set())
        unknown = set(d) - allowed
        if unknown:
            raise ParameterError(f"unknown graph_model fields for {kind!r}: {sorted(unknown)}")
        if kind == "ba":
            return cls(kind="ba", p=None, m=d.get("m", 2))
        return cls(kind=kind, p=d.get("p", 0.1), m=None)


@dataclass(frozen=True)
class ExperimentConfig:
    graph_model: GraphModel = field(default_factory=GraphModel)
    n_nodes: int = 400
    xi: float = 0.2
    mu: float = 0.1
    lam: float = 0.99
    sample_sizes: tuple[int, ...] = (1000, 5000, 20000)
    estimators: tuple[str, ...] = ESTIMATORS
    clustering: tuple[str, ...] = ("gmm", "kmeans")
    runs: int = 50
    master_seed: int = 0
    mask_mode: str = "per_run"
    graph_mode: str = "per_run"
    output_dir: str = "results"
    record_timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "clustering", tuple(self.clustering))
        if self.n_nodes < 2:
            raise ParameterError("n_nodes must be >= 2")
        if not 0.0 < self.xi <= 1.0 or round(self.xi * self.n_nodes) < 2:
            raise ParameterError(f"xi={self.xi} must observe at least 2 of {self.n_nodes} nodes")
        if not 0.0 < self.mu < 1.0:
            raise ParameterError(f"mu must lie in (0, 1), got {self.mu}")
        if not 0.0 < self.lam <= 1.0:
            raise ParameterError(f"lambda must lie in (0, 1], got {self.lam}")
        if not self.sample_sizes or min(self.sample_sizes) < 1:
            raise ParameterError("sample_sizes must be a nonempty list of positive integers")
        if list(self.sample_sizes) != sorted(set(self.sample_sizes)):
            raise ParameterError("sample_sizes must be strictly ascending")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ParameterError(f"unknown estimator {e!r}; choose from {ESTIMATORS}")
        for c in self.clustering:
            if c not in CLUSTERING:
                raise ParameterError(f"unknown clustering {c!r}; choose from {CLUSTERING}")
        if not self.estimators:
            raise ParameterError("at least one estimator is required")
        if self.runs < 1:
            raise ParameterError("runs must be positive")
        if self.mask_mode not in MODES or self.graph_mode not in MODES:
            raise ParameterError(f"mask_mode/graph_mode must be one of {MODES}")

    @property
    def s_size(self) -> int:
        return int(round(self.xi * self.n_nodes))

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["graph_model"] = self.graph_model.to_dict()
        d["lambda"] = d.pop("lam")
        for k in ("sample_sizes", "estimators", "clustering"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown config fields: {sorted(unknown)}")
        if "graph_model" in d and isinstance(d["graph_model"], dict):
            d["graph_model"] = GraphModel.from_dict(d["graph_model"])
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ParameterError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def experiment_id(self) -> str:
        d = self.to_dict()
        for k in ("output_dir", "record_timing"):
            d.pop(k)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class RunRecord:
    experiment_id: str
    estimator: str
    clustering: str
    n: int
    run: int
    seed: int
    metrics: RunMetrics | None
    wall_time_ms: float = 0.0
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.metrics is None

    def sort_key(self):
        return (self.estimator, self.clustering, self.n, self.run)


@dataclass(frozen=True)
class RunInstance:
    """Everything drawn for one run before any signal is simulated."""

    run: int
    adjacency: np.ndarray
    combination: np.ndarray
    mask: ObservationMask
    noise_seed: int

    @property
    def truth_a(self) -> np.ndarray:
        return self.combination[np.ix_(self.mask.indices, self.mask.indices)]

    @property
    def truth_g(self) -> np.ndarray:
        return self.adjacency[np.ix_(self.mask.indices, self.mask.indices)]


@dataclass
class RunOutput:
    run: int
    records: list[RunRecord]
    estimates: dict[tuple[str, int], np.ndarray]
    truth_a: np.ndarray


@dataclass(frozen=True)
class CellAggregate:
    estimator: str
    clustering: str
    n: int
    error_rate: Summary | None
    fn_score: Summary | None
    fp_score: Summary | None
    bias: float | None
    variance: float | None
    runs: int
    failed_runs: int
    degenerate_runs: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[RunRecord]
    aggregates: list[CellAggregate]
    estimates: dict[tuple[str, int], list[np.ndarray]]
    truths: list[np.ndarray]

    def cell(self, estimator: str, clustering: str, n: int) -> CellAggregate:
        for a in self.aggregates:
            if (a.estimator, a.clustering, a.n) == (estimator, clustering, n):
                return a
        raise KeyError((estimator, clustering, n))


def draw_instance(config: ExperimentConfig, run: int) -> RunInstance:
    graph_key = run if config.graph_mode == "per_run" else FIXED_RUN
    mask_key = run if config.mask_mode == "per_run" else FIXED_RUN
    G = config.graph_model.generate(config.n_nodes, derive_seed(config.master_seed, graph_key, "graph"))
    A = laplacian_combination(G, config.lam, config.mu)
    mask = select_observed(config.n_nodes, config.xi, derive_seed(config.master_seed, mask_key, "mask"))
    return RunInstance(run, G, A.matrix, mask, derive_seed(config.master_seed, run, "noise"))


def stream_moments(A, mu: float, mask: ObservationMask, sample_sizes, noise: NoiseSource) -> dict[int, SampleMoments]:
    """Moments at each ``n`` from a single trajectory ``y_0 .. y_{max(n)+2}``."""
    targets = sorted(set(int(n) for n in sample_sizes))
    acc = MomentAccumulator(mask.size)
    out: dict[int, SampleMoments] = {}
    pending = iter(targets)
    target = next(pending)
    for block in iter_var(A, mu, targets[-1] + 2, noise):
        block = block[:, mask.indices]
        while block.shape[0]:
            take = target + 3 - acc.rows_seen
            acc.push(block[:take])
            block = block[take:]
            if acc.rows_seen == target + 3:
                out[target] = acc.snapshot(target)
                target = next(pending, None)
                if target is None:
                    return out
    return out


def run_single(config: ExperimentConfig, run: int) -> RunOutput:
    inst = draw_instance(config, run)
    exp_id = config.experiment_id()
    moments = stream_moments(inst.combination, config.mu, inst.mask, config.sample_sizes, NoiseSource(inst.noise_seed))
    truth_g = inst.truth_g
    records: list[RunRecord] = []
    estimates: dict[tuple[str, int], np.ndarray] = {}
    for est_name in config.estimators:
        for n in config.sample_sizes:
            t0 = time.perf_counter()
            try:
                est = estimate(est_name, moments[n], config.mu)
            except NetInferError as exc:
                for clu in config.clustering:
                    records.append(RunRecord(exp_id, est_name, clu, n, run, inst.noise_seed, None, error=str(exc)))
                continue
            est_ms = (time.perf_counter() - t0) * 1e3
            estimates[(est_name, n)] = est.matrix
            for clu in config.clustering:
                t1 = time.perf_counter()
                try:
                    pred = infer_topology(est, clu)
                    metrics = run_metrics(pred, truth_g)
                    error = None
                except NetInferError as exc:
                    metrics, error = None, str(exc)
                wall = est_ms + (time.perf_counter() - t1) * 1e3 if config.record_timing else 0.0
                records.append(RunRecord(exp_id, est_name, clu, n, run, inst.noise_seed, metrics, round(wall, 3), error))
    return RunOutput(run, records, estimates, inst.truth_a)


def resolve_workers(flag: int | None = None) -> int:
    """CLI flag, then ``NETINFER_WORKERS``, then 1."""
    if flag is not None:
        workers = flag
    else:
        env = os.environ.get(WORKERS_ENV)
        try:
            workers = int(env) if env else 1
        except ValueError as exc:
            raise ParameterError(f"{WORKERS_ENV}={env!r} is not an integer") from exc
    if workers < 1:
        raise ParameterError(f"worker count must be >= 1, got {workers}")
    return workers


def _run_chunk(config: ExperimentConfig, runs: list[int]) -> list[RunOutput]:
    return [run_single(config, r) for r in runs]


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    workers = resolve_workers(workers)
    runs = list(range(config.runs))
    if workers == 1:
        outputs = _run_chunk(config, runs)
    else:
        chunks = [runs[i::workers * 4] for i in range(min(len(runs), workers * 4))]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = [o for part in pool.map(_run_chunk, [config] * len(chunks), chunks) for o in part]
    outputs.sort(key=lambda o: o.run)
    return collect(config, outputs)


def collect(config: ExperimentConfig, outputs: list[RunOutput]) -> ExperimentResult:
    records = sorted((r for o in outputs for r in o.records), key=RunRecord.sort_key)
    estimates: dict[tuple[str, int], list[np.ndarray]] = {}
    est_truths: dict[tuple[str, int], list[np.ndarray]] = {}
    for o in outputs:
        for key, E in o.estimates.items():
            estimates.setdefault(key, []).append(E)
            est_truths.setdefault(key, []).append(o.truth_a)

    by_cell: dict[tuple[str, str, int], list[RunRecord]] = {}
    for r in records:
        by_cell.setdefault((r.estimator, r.clustering, r.n), []).append(r)

    aggregates = []
    for est_name in config.estimators:
        for n in config.sample_sizes:
            key = (est_name, n)
            bias = variance = None
            if len(estimates.get(key, [])) >= 2:
                bias, variance = bias_variance(estimates[key], np.stack(est_truths[key]))
            if not config.clustering:
                ok = len(estimates.get(key, []))
                aggregates.append(CellAggregate(est_name, "none", n, None, None, None, bias, variance,
                                                ok, config.runs - ok, 0))
                continue
            for clu in config.clustering:
                cell = by_cell.get((est_name, clu, n), [])
                ok = [r.metrics for r in cell if r.metrics is not None]
                aggregates.append(CellAggregate(
                    est_name, clu, n,
                    summarize([m.error_rate for m in ok]),
                    summarize([m.fn_score for m in ok]),
                    summarize([m.fp_score for m in ok]),
                    bias, variance, len(ok), len(cell) - len(ok), sum(m.degenerate for m in ok),
                ))
    truths = [o.truth_a for o in outputs]
    return ExperimentResult(config, records, aggregates, estimates, truths)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def _common(config: ExperimentConfig) -> dict:
    return {
        "experiment_id": config.experiment_id(),
        "N": config.n_nodes,
        "p_or_m": config.graph_model.param,
        "xi": config.xi,
        "mu": config.mu,
        "lambda": config.lam,
    }


def runs_csv_text(result: ExperimentResult) -> str:
    base = _common(result.config)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_COLUMNS)
    for r in result.records:
        m = r.metrics
        row = dict(base, estimator=r.estimator, clustering=r.clustering, n=r.n, run=r.run, seed=r.seed,
                   error_rate=m.error_rate if m else None, fn_score=m.fn_score if m else None,
                   fp_score=m.fp_score if m else None, degenerate=m.degenerate if m else None,
                   wall_time_ms=float(r.wall_time_ms))
        w.writerow([_fmt(row[c]) for c in RUN_COLUMNS])
    return buf.getvalue()


def aggregate_csv_text(result: ExperimentResult) -> str:
    base = _common(result.config)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_COLUMNS)
    for a in result.aggregates:
        row = dict(base, estimator=a.estimator, clustering=a.clustering, n=a.n, bias=a.bias,
                   variance=a.variance, runs=a.runs, failed_runs=a.failed_runs,
                   degenerate_runs=a.degenerate_runs)
        for name in METRIC_NAMES:
            s = getattr(a, name)
            for part in ("mean", "std", "ci_low", "ci_high"):
                row[f"{name}_{part}"] = getattr(s, part) if s is not None else None
        w.writerow([_fmt(row[c]) for c in AGGREGATE_COLUMNS])
    return buf.getvalue()


def write_csv(result: ExperimentResult, output_dir=None) -> tuple[Path, Path]:
    """Write ``runs.csv`` and ``aggregate.csv``; returns their paths."""
    out = Path(output_dir if output_dir is not None else result.config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        runs_path, agg_path = out / "runs.csv", out / "aggregate.csv"
        runs_path.write_text(runs_csv_text(result), encoding="utf-8")
        agg_path.write_text(aggregate_csv_text(result), encoding="utf-8")
        (out / "config.json").write_text(json.dumps(result.config.to_dict(), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return runs_path, agg_path


def read_runs_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def canonical_runs(path) -> list[tuple]:
    """Rows of ``runs.csv`` sorted by cell and run, with timing blanked."""
    rows = read_runs_csv(path)
    key = lambda r: (r["estimator"], r["clustering"], int(r["n"]), int(r["run"]))
    return [tuple(v if c != "wall_time_ms" else "" for c, v in r.items()) for r in sorted(rows, key=key)]


def reaggregate(runs_path) -> dict[tuple[str, str, int], dict[str, Summary]]:
    """Recompute per-cell summaries from ``runs.csv`` alone."""
    cells: dict[tuple[str, str, int], dict[str, list[float]]] = {}
    for r in read_runs_csv(runs_path):
        if r["error_rate"] == "":
            continue
        cell = cells.setdefault((r["estimator"], r["clustering"], int(r["n"])), {m: [] for m in METRIC_NAMES})
        for m in METRIC_NAMES:
            cell[m].append(float(r[m]) if r[m] != "" else math.nan)
    return {k: {m: summarize(v[m]) for m in METRIC_NAMES} for k, v in cells.items()}
