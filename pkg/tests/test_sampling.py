import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_laplacian
from netinfer.errors import ParameterError
from netinfer.graph import laplacian_combination
from netinfer.moments import analytic_r0, analytic_r0_limit
from netinfer.sampling import (
    NoiseSource,
    ObservationMask,
    iter_var,
    observe,
    read_trajectory,
    select_observed,
    simulate_var,
    write_trajectory,
)


def test_noise_sources_with_equal_seeds_agree():
    a = NoiseSource(42).generator().standard_normal(100)
    b = NoiseSource(42).generator().standard_normal(100)
    assert np.array_equal(a, b)
    c = NoiseSource(42).substream(1).generator().standard_normal(100)
    assert not np.array_equal(a, c)
    assert np.array_equal(c, NoiseSource(42).substream(1).generator().standard_normal(100))


def test_noise_source_rejects_bad_seed():
    with pytest.raises(ParameterError):
        NoiseSource(-1)
    with pytest.raises(ParameterError):
        NoiseSource(2**64)


def test_zero_matrix_collapses_to_scaled_noise():
    mu, T, N = 0.3, 10, 4
    traj = simulate_var(np.zeros((N, N)), mu, T, NoiseSource(5))
    x = NoiseSource(5).generator().standard_normal((T + 1, N))
    np.testing.assert_allclose(traj, mu * x, rtol=0, atol=0)


def test_recursion_holds_exactly():
    A = random_laplacian(8, 0.4, 2)
    traj = simulate_var(A, 0.1, 20, NoiseSource(9))
    x = NoiseSource(9).generator().standard_normal((21, 8))
    np.testing.assert_array_equal(traj[0], 0.1 * x[0])
    for t in range(20):
        np.testing.assert_allclose(traj[t + 1], A.matrix @ traj[t] + 0.1 * x[t + 1], atol=1e-15)


def test_simulate_is_deterministic_and_block_invariant():
    A = random_laplacian(6, 0.5, 4)
    ref = simulate_var(A, 0.1, 500, NoiseSource(1))
    assert ref.shape == (501, 6)
    assert ref.tobytes() == simulate_var(A, 0.1, 500, NoiseSource(1)).tobytes()
    for block in (1, 7, 64, 10_000):
        got = np.concatenate(list(iter_var(A, 0.1, 500, NoiseSource(1), block=block)))
        assert got.tobytes() == ref.tobytes()


def test_simulate_rejects_short_horizon_and_mu_mismatch():
    A = random_laplacian(4, 0.5, 0)
    with pytest.raises(ParameterError):
        simulate_var(A, 0.1, 2, NoiseSource(0))
    with pytest.raises(ParameterError):
        simulate_var(A, 0.2, 10, NoiseSource(0))


def test_scalar_ar1_variance():
    # A = (1 - mu) I: independent AR(1) coordinates, Var(y_t) = mu^2 sum_j (1 - mu)^{2j}
    mu, t, N, replicas = 0.1, 5, 50, 2000
    A = laplacian_combination(np.zeros((N, N), dtype=int), 0.99, mu)
    samples = np.concatenate([simulate_var(A, mu, t, NoiseSource(77).substream(r))[t] for r in range(replicas)])
    expected = mu**2 * sum((1 - mu) ** (2 * j) for j in range(t + 1))
    m = samples.size
    se = expected * np.sqrt(2.0 / (m - 1))  # std of a Gaussian sample variance
    assert abs(samples.var(ddof=1) - expected) <= 3 * se


def _cov_check(samples, target, k):
    # samples: (R, N); compares E[y y^T] entrywise within k standard errors
    R = samples.shape[0]
    prod = samples[:, :, None] * samples[:, None, :]
    mean = prod.mean(axis=0)
    se = prod.std(axis=0, ddof=1) / np.sqrt(R)
    z = np.abs(mean - target) / se
    return float(z.max())


def test_second_moment_matches_analytic_r0():
    A = random_laplacian(5, 0.5, 8)
    mu, t, R = 0.1, 6, 10_000
    ys = np.stack([simulate_var(A, mu, t, NoiseSource(3).substream(r))[t] for r in range(R)])
    assert _cov_check(ys, analytic_r0(A, mu, t), 4.0) <= 4.0


def test_large_t_covariance_approaches_stationary_limit():
    A = random_laplacian(5, 0.5, 8)
    mu, t, R = 0.1, 150, 4000
    ys = np.stack([simulate_var(A, mu, t, NoiseSource(4).substream(r))[t] for r in range(R)])
    assert _cov_check(ys, analytic_r0_limit(A, mu), 4.5) <= 4.5


def test_long_trajectory_stays_finite():
    A = random_laplacian(10, 0.3, 5)
    peak = 0.0
    for block in iter_var(A, 0.1, 1_000_000, NoiseSource(6), block=65536):
        assert np.isfinite(block).all()
        peak = max(peak, float(np.abs(block).max()))
    assert peak < 10.0


def test_select_observed_size_and_determinism():
    mask = select_observed(200, 0.2, 1)
    assert mask.size == 40
    assert mask.xi == pytest.approx(0.2)
    assert np.all(np.diff(mask.indices) > 0)
    assert np.array_equal(mask.indices, select_observed(200, 0.2, 1).indices)
    assert np.array_equal(select_observed(10, 1.0, 3).indices, np.arange(10))


@pytest.mark.parametrize("n_nodes,xi", [(10, 0.1), (10, 0.0), (10, 1.5), (3, 0.2)])
def test_select_observed_rejects_tiny_or_invalid_subsets(n_nodes, xi):
    with pytest.raises(ParameterError):
        select_observed(n_nodes, xi, 0)


def test_mask_validation():
    with pytest.raises(ParameterError):
        ObservationMask(5, np.array([1]))
    with pytest.raises(ParameterError):
        ObservationMask(5, np.array([2, 1]))
    with pytest.raises(ParameterError):
        ObservationMask(5, np.array([1, 5]))


def test_observe_projects_columns():
    traj = np.arange(24, dtype=float).reshape(6, 4)
    assert np.array_equal(observe(traj, ObservationMask.full(4)), traj)
    np.testing.assert_array_equal(observe(traj, ObservationMask(4, np.array([1, 3]))), traj[:, [1, 3]])
    with pytest.raises(ParameterError):
        observe(traj, ObservationMask(5, np.array([0, 1])))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(3, 12), t=st.integers(0, 8))
def test_projection_commutes_with_outer_product(seed, n, t):
    A = random_laplacian(n, 0.4, seed)
    traj = simulate_var(A, 0.1, 10, NoiseSource(seed))
    mask = select_observed(n, 0.5, seed) if round(0.5 * n) >= 2 else ObservationMask.full(n)
    ix = np.ix_(mask.indices, mask.indices)
    obs = observe(traj, mask)
    full = np.outer(traj[t + 1], traj[t])[ix]
    np.testing.assert_array_equal(full, np.outer(obs[t + 1], obs[t]))


def test_trajectory_dump_round_trip(tmp_path):
    traj = simulate_var(random_laplacian(7, 0.4, 1), 0.1, 30, NoiseSource(2))
    path = tmp_path / "traj.bin"
    write_trajectory(path, traj)
    raw = path.read_bytes()
    assert len(raw) == 16 + 8 * 7 * 31
    assert int.from_bytes(raw[:8], "little") == 7
    assert int.from_bytes(raw[8:16], "little") == 30
    assert read_trajectory(path).tobytes() == traj.tobytes()


def test_trajectory_dump_rejects_truncated_file(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"\x02\x00\x00\x00\x00\x00\x00\x00\x05\x00\x00\x00\x00\x00\x00\x00" + b"\x00" * 8)
    with pytest.raises(ParameterError):
        read_trajectory(path)
