import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_laplacian
from netinfer.clustering import (
    Gmm1dParams,
    classify_gmm,
    extract_pair_values,
    fit_gmm_1d,
    infer_topology,
    kmeans_1d,
    optimal_threshold_1d,
)
from netinfer.errors import DegenerateDataError, ParameterError
from netinfer.estimators import TopologyEstimate, EstimatorKind


def _params(w, m, v):
    return Gmm1dParams(weights=w, means=m, variances=v, log_likelihood=0.0, iterations=0,
                       converged=True, log_likelihood_trace=())


def _mixture(rng, n=2000, w1=0.2, mu1=0.3, sd=0.01):
    truth = rng.random(n) < w1
    return np.where(truth, rng.normal(mu1, sd, n), rng.normal(0.0, sd, n)), truth


def test_gmm_recovers_well_separated_mixture(rng):
    x, truth = _mixture(rng)
    p = fit_gmm_1d(x)
    hi = p.connected
    assert p.converged
    assert abs(p.means[1 - hi]) <= 0.01
    assert abs(p.means[hi] - 0.3) <= 0.01
    assert abs(p.weights[hi] - truth.mean()) <= 0.05
    np.testing.assert_array_equal(classify_gmm(x, p), truth.astype(np.uint8))


def test_gmm_two_point_data():
    x = np.array([0.0, 0.0, 0.0, 1.0, 1.0])
    p = fit_gmm_1d(x)
    np.testing.assert_array_equal(classify_gmm(x, p), [0, 0, 0, 1, 1])
    assert sorted(p.means) == pytest.approx([0.0, 1.0], abs=1e-9)


def test_gmm_log_likelihood_never_decreases(rng):
    for _ in range(20):
        x = np.concatenate([rng.normal(0, 1, 150), rng.normal(rng.uniform(0.5, 3), rng.uniform(0.2, 2), 50)])
        trace = np.array(fit_gmm_1d(x).log_likelihood_trace)
        assert np.all(np.diff(trace) >= -1e-9 * np.abs(trace[:-1]))


def test_gmm_classification_hand_posterior():
    p = _params((0.7, 0.3), (0.0, 1.0), (1.0, 0.25))
    # x = 0.8: 0.7 N(0.8;0,1)=0.2030 vs 0.3 N(0.8;1,0.25)=0.5526
    # x = 0.3: 0.7 N(0.3;0,1)=0.2669 vs 0.3 N(0.3;1,0.25)=0.0897
    np.testing.assert_array_equal(classify_gmm([0.8, 0.3], p), [1, 0])


def test_gmm_tie_goes_to_disconnected():
    p = _params((0.5, 0.5), (0.0, 1.0), (1.0, 1.0))
    np.testing.assert_array_equal(classify_gmm([0.5, 0.49, 0.51], p), [0, 0, 1])


def test_gmm_connected_is_larger_mean():
    p = _params((0.5, 0.5), (2.0, -1.0), (1.0, 1.0))
    assert p.connected == 0
    np.testing.assert_array_equal(classify_gmm([3.0, -2.0], p), [1, 0])


def test_gmm_rejects_bad_input():
    with pytest.raises(ParameterError):
        fit_gmm_1d([0.0, 1.0, 2.0])
    with pytest.raises(ParameterError):
        fit_gmm_1d([0.0, 1.0, np.nan, 2.0])
    with pytest.raises(DegenerateDataError):
        fit_gmm_1d(np.full(10, 0.25))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), scale=st.floats(0.01, 100.0))
def test_gmm_labels_invariant_to_positive_scaling(seed, scale):
    x, _ = _mixture(np.random.default_rng(seed), n=400, sd=0.03)
    a = classify_gmm(x, fit_gmm_1d(x))
    b = classify_gmm(x * scale, fit_gmm_1d(x * scale))
    assert (a != b).sum() <= 1


def _brute_force_sse(x):
    xs = np.sort(x)
    best = np.inf
    for k in range(1, xs.size):
        if xs[k] == xs[k - 1]:
            continue
        lo, hi = xs[:k], xs[k:]
        best = min(best, ((lo - lo.mean()) ** 2).sum() + ((hi - hi.mean()) ** 2).sum())
    return best


def _sse(x, labels):
    return sum(((x[labels == k] - x[labels == k].mean()) ** 2).sum() for k in (0, 1) if (labels == k).any())


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=60).filter(lambda v: len(set(v)) > 1))
def test_kmeans_reaches_the_optimal_split(values):
    x = np.array(values)
    labels = kmeans_1d(x)
    ref = _brute_force_sse(x)
    assert _sse(x, labels) <= ref * (1 + 1e-9) + 1e-9
    _, sse = optimal_threshold_1d(x)
    assert sse == pytest.approx(ref, rel=1e-9, abs=1e-9)
    # upper cluster holds the larger values
    if labels.any() and not labels.all():
        assert x[labels == 1].min() > x[labels == 0].max()


def test_kmeans_well_separated(rng):
    x = np.concatenate([rng.normal(0, 0.1, 300), rng.normal(1.0, 0.1, 30)])
    labels = kmeans_1d(x)
    np.testing.assert_array_equal(labels, np.r_[np.zeros(300), np.ones(30)])


def test_kmeans_degenerate():
    with pytest.raises(DegenerateDataError):
        kmeans_1d(np.ones(5))
    with pytest.raises(DegenerateDataError):
        optimal_threshold_1d(np.ones(5))


def test_extract_pair_values_small():
    pairs, vals = extract_pair_values(np.array([[9.0, 2.0], [4.0, -9.0]]))
    np.testing.assert_array_equal(pairs, [[0, 1]])
    np.testing.assert_array_equal(vals, [3.0])


def test_extract_pair_values_count_and_order(rng):
    E = rng.standard_normal((40, 40))
    pairs, vals = extract_pair_values(TopologyEstimate(EstimatorKind.ONE_LAG, 10, E))
    assert vals.shape == (780,)
    assert np.all(pairs[:, 0] < pairs[:, 1])
    i, j = pairs[100]
    assert vals[100] == (E[i, j] + E[j, i]) / 2
    with pytest.raises(ParameterError):
        extract_pair_values(np.zeros((1, 1)))
    with pytest.raises(ParameterError):
        extract_pair_values(np.zeros((2, 3)))


@pytest.mark.parametrize("method", ["gmm", "kmeans"])
def test_infer_topology_on_exact_matrix(method):
    A = random_laplacian(40, 0.2, 5)
    G = (A.matrix > 0).astype(np.uint8)
    np.fill_diagonal(G, 0)
    pred = infer_topology(A.matrix, method)
    assert not pred.degenerate
    np.testing.assert_array_equal(pred.matrix, G)
    np.testing.assert_array_equal(pred.matrix, pred.matrix.T)
    assert not np.diag(pred.matrix).any()


@pytest.mark.parametrize("method", ["gmm", "kmeans"])
def test_empty_graph_is_degenerate(method):
    E = np.eye(6) * 0.9
    pred = infer_topology(E, method)
    assert pred.degenerate
    assert not pred.matrix.any()
    with pytest.raises(DegenerateDataError):
        infer_topology(E, method, strict=True)


def test_infer_topology_unknown_method():
    with pytest.raises(ParameterError):
        infer_topology(np.eye(4), "spectral")
