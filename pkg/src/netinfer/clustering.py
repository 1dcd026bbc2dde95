"""Binarize a topology estimate by clustering its off-diagonal pair values.

Each unordered pair ``{i, j}`` contributes ``(E_ij + E_ji) / 2``. The cluster
with the larger center is read as "connected".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from netinfer.errors import DegenerateDataError, ParameterError

WEIGHT_FLOOR = 1e-6
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class Gmm1dParams:
    weights: tuple[float, float]
    means: tuple[float, float]
    variances: tuple[float, float]
    log_likelihood: float
    iterations: int
    converged: bool
    log_likelihood_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def connected(self) -> int:
        """Index of the component read as connected pairs."""
        return 1 if self.means[1] > self.means[0] else 0


@dataclass(frozen=True)
class PredictedAdjacency:
    matrix: np.ndarray
    degenerate: bool = False

    @property
    def s_size(self) -> int:
        return self.matrix.shape[0]


def extract_pair_values(estimate) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(pairs, values)`` over the strict upper triangle, row-major."""
    E = np.asarray(getattr(estimate, "matrix", estimate), dtype=np.float64)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise ParameterError(f"estimate must be square, got shape {E.shape}")
    s = E.shape[0]
    if s < 2:
        raise ParameterError("need at least two observed nodes to form a pair")
    i, j = np.triu_indices(s, k=1)
    return np.column_stack([i, j]), (E[i, j] + E[j, i]) / 2.0


def _component_logpdf(x, weights, means, variances):
    w = np.asarray(weights)
    m = np.asarray(means)
    v = np.asarray(variances)
    return np.log(w) - 0.5 * (_LOG_2PI + np.log(v)) - 0.5 * (x[:, None] - m) ** 2 / v


def fit_gmm_1d(values, init_mean_0: float = 0.0, tol: float = 1e-8, max_iter: int = 500) -> Gmm1dParams:
    """Two-component univariate Gaussian mixture fitted by EM.

    Component 0 starts at ``init_mean_0`` and component 1 at the mean of the
    values above the median; both start with the global variance and equal
    weights. All parameters are re-estimated every iteration. Iteration stops
    once the relative change in log-likelihood drops below ``tol``.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 4:
        raise ParameterError(f"GMM needs at least 4 values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("GMM input contains non-finite values")
    if np.all(x == x[0]):
        raise DegenerateDataError("all values are identical")

    global_var = float(x.var())
    var_floor = 1e-12 * (global_var + 1e-300)
    upper = x[x > np.median(x)]
    m1 = float(upper.mean()) if upper.size else float(x.max())

    weights = np.array([0.5, 0.5])
    means = np.array([float(init_mean_0), m1])
    variances = np.array([global_var, global_var])

    trace = []
    converged = False
    iterations = 0
    prev = None
    while True:
        logp = _component_logpdf(x, weights, means, variances)
        norm = logsumexp(logp, axis=1)
        ll = float(norm.sum())
        trace.append(ll)
        if prev is not None and abs(ll - prev) <= tol * abs(prev):
            converged = True
            break
        if iterations >= max_iter:
            break
        prev = ll

        resp = np.exp(logp - norm[:, None])
        nk = resp.sum(axis=0)
        weights = np.maximum(nk / x.size, WEIGHT_FLOOR)
        weights /= weights.sum()
        for k in range(2):
            if nk[k] > 1e-300:
                means[k] = resp[:, k] @ x / nk[k]
                variances[k] = max(resp[:, k] @ (x - means[k]) ** 2 / nk[k], var_floor)
        iterations += 1

    return Gmm1dParams(
        weights=(float(weights[0]), float(weights[1])),
        means=(float(means[0]), float(means[1])),
        variances=(float(variances[0]), float(variances[1])),
        log_likelihood=ll,
        iterations=iterations,
        converged=converged,
        log_likelihood_trace=tuple(trace),
    )


def gmm_log_posteriors(values, params: Gmm1dParams) -> np.ndarray:
    """Unnormalized log posterior of each component, shape ``(len(values), 2)``."""
    x = np.asarray(values, dtype=np.float64).ravel()
    return _component_logpdf(x, params.weights, params.means, params.variances)


def classify_gmm(values, params: Gmm1dParams) -> np.ndarray:
    """1 where the connected component's posterior strictly wins, else 0."""
    logp = gmm_log_posteriors(values, params)
    if params.means[0] == params.means[1]:
        return np.zeros(logp.shape[0], dtype=np.uint8)
    hi = params.connected
    return (logp[:, hi] > logp[:, 1 - hi]).astype(np.uint8)


def _sse(x: np.ndarray, labels: np.ndarray) -> float:
    total = 0.0
    for k in (0, 1):
        part = x[labels == k]
        if part.size:
            total += float(((part - part.mean()) ** 2).sum())
    return total


def optimal_threshold_1d(values) -> tuple[float, float]:
    """Exact 2-means split of 1-D data: ``(threshold, sse)``.

    Values ``> threshold`` form the upper cluster. Candidate cuts lie between
    consecutive distinct sorted values; prefix sums make the scan linear.
    """
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    cuts = np.nonzero(np.diff(x) > 0)[0] + 1  # lower cluster is x[:k]
    if cuts.size == 0:
        raise DegenerateDataError("all values are identical")
    csum = np.concatenate([[0.0], np.cumsum(x)])
    csq = np.concatenate([[0.0], np.cumsum(x * x)])
    n = x.size
    k = cuts.astype(np.float64)
    lo_sse = csq[cuts] - csum[cuts] ** 2 / k
    hi_sse = (csq[n] - csq[cuts]) - (csum[n] - csum[cuts]) ** 2 / (n - k)
    best = int(np.argmin(lo_sse + hi_sse))
    cut = cuts[best]
    return float(x[cut - 1]), float(lo_sse[best] + hi_sse[best])


def kmeans_1d(values, max_iter: int = 100) -> np.ndarray:
    """Two-cluster K-means labels (1 = cluster with the larger centroid).

    Lloyd iterations start from the minimum and maximum. Lloyd can stall in a
    local optimum in 1-D, so the result is checked against the exact threshold
    split and replaced when that split has a smaller within-cluster SSE.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 2 or np.all(x == x[0]):
        raise DegenerateDataError("K-means needs at least two distinct values")
    c0, c1 = float(x.min()), float(x.max())
    labels = None
    for _ in range(max_iter):
        new = (np.abs(x - c1) < np.abs(x - c0)).astype(np.uint8)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        if labels.all() or not labels.any():
            break
        c0, c1 = float(x[labels == 0].mean()), float(x[labels == 1].mean())

    threshold, best = optimal_threshold_1d(x)
    if _sse(x, labels) > best * (1.0 + 1e-12) + 1e-300:
        labels = (x > threshold).astype(np.uint8)
    return labels


def infer_topology(estimate, method: str = "gmm", strict: bool = False) -> PredictedAdjacency:
    """Cluster the pair values of ``estimate`` into a symmetric 0/1 prediction.

    Degenerate input (no spread in the pair values) gives the all-disconnected
    prediction flagged as degenerate, or raises when ``strict``.
    """
    pairs, values = extract_pair_values(estimate)
    s = int(pairs.max()) + 1
    try:
        if method == "gmm":
            labels = classify_gmm(values, fit_gmm_1d(values))
        elif method == "kmeans":
            labels = kmeans_1d(values)
        else:
            raise ParameterError(f"unknown clustering method {method!r}")
    except DegenerateDataError:
        if strict:
            raise
        return PredictedAdjacency(np.zeros((s, s), dtype=np.uint8), degenerate=True)
    G = np.zeros((s, s), dtype=np.uint8)
    G[pairs[:, 0], pairs[:, 1]] = labels
    return PredictedAdjacency(G | G.T)
