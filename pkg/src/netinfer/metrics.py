"""Pair-level error scores and Monte Carlo summaries.

Scores follow the convention used for these experiments: the false-negative
score counts truly disconnected pairs that were declared connected, and the
false-positive score counts connected pairs declared disconnected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from netinfer.errors import ParameterError, UndefinedMetricError

Z95 = 1.96


@dataclass(frozen=True)
class RunMetrics:
    error_rate: float
    fn_score: float
    fp_score: float
    degenerate: bool = False


@dataclass(frozen=True)
class Summary:
    mean: float
    std: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class AggregateMetrics:
    error_rate: Summary
    fn_score: Summary
    fp_score: Summary
    runs: int
    degenerate_runs: int = 0
    bias: float | None = None
    variance: float | None = None


def _pairs(pred, truth):
    P = np.asarray(getattr(pred, "matrix", pred))
    G = np.asarray(truth)
    if P.shape != G.shape or P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ParameterError(f"prediction {P.shape} and truth {G.shape} must be equal square shapes")
    if P.shape[0] < 2:
        raise ParameterError("need at least two nodes")
    iu = np.triu_indices(P.shape[0], k=1)
    return P[iu].astype(bool), G[iu].astype(bool)


def error_rate(pred, truth) -> float:
    p, g = _pairs(pred, truth)
    return float(np.count_nonzero(p != g)) / p.size


def fn_score(pred, truth) -> float:
    p, g = _pairs(pred, truth)
    negatives = np.count_nonzero(~g)
    if negatives == 0:
        raise UndefinedMetricError("truth has no disconnected pairs")
    return float(np.count_nonzero(p & ~g)) / negatives


def fp_score(pred, truth) -> float:
    p, g = _pairs(pred, truth)
    positives = np.count_nonzero(g)
    if positives == 0:
        raise UndefinedMetricError("truth has no connected pairs")
    return float(np.count_nonzero(~p & g)) / positives


def run_metrics(pred, truth) -> RunMetrics:
    """All three scores; an undefined score is reported as NaN."""
    scores = []
    for fn in (fn_score, fp_score):
        try:
            scores.append(fn(pred, truth))
        except UndefinedMetricError:
            scores.append(math.nan)
    return RunMetrics(error_rate(pred, truth), scores[0], scores[1], bool(getattr(pred, "degenerate", False)))


def bias_variance(estimates, truth) -> tuple[float, float]:
    """Per-entry mean absolute bias and per-entry mean variance across runs.

    ``truth`` is one matrix shared by all runs, or one matrix per run (the
    error ``E_r - truth_r`` is then summarized).
    """
    E = np.stack([np.asarray(getattr(e, "matrix", e), dtype=np.float64) for e in estimates])
    if E.shape[0] < 2:
        raise ParameterError("bias/variance needs at least 2 runs")
    T = np.asarray(truth, dtype=np.float64)
    if T.shape not in (E.shape, E.shape[1:]):
        raise ParameterError(f"truth shape {T.shape} does not match estimates {E.shape}")
    err = E - T
    bias = float(np.mean(np.abs(err.mean(axis=0))))
    variance = float(np.mean(err.var(axis=0, ddof=1)))
    return bias, variance


def summarize(values) -> Summary:
    x = np.asarray(values, dtype=np.float64)
    x = x[~np.isnan(x)]
    if x.size < 2:
        return Summary(float(x.mean()) if x.size else math.nan, math.nan, math.nan, math.nan)
    mean = float(x.mean())
    std = float(x.std(ddof=1))
    half = Z95 * std / math.sqrt(x.size)
    return Summary(mean, std, mean - half, mean + half)


def aggregate(run_metrics_list) -> AggregateMetrics:
    """Mean, sample std and normal-approximation 95% CI of each score."""
    runs = list(run_metrics_list)
    if len(runs) < 2:
        raise ParameterError("aggregation needs at least 2 runs")
    return AggregateMetrics(
        error_rate=summarize([r.error_rate for r in runs]),
        fn_score=summarize([r.fn_score for r in runs]),
        fp_score=summarize([r.fp_score for r in runs]),
        runs=len(runs),
        degenerate_runs=sum(bool(r.degenerate) for r in runs),
    )
