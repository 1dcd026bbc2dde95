import numpy as np
import pytest

from netinfer.graph import generate_er, laplacian_combination


def batch_var(A, mu, T, replicas, rng):
    """Reference VAR simulation vectorized over replicas: shape (replicas, T + 1, N)."""
    A = np.asarray(A, dtype=np.float64)
    N = A.shape[0]
    x = rng.standard_normal((replicas, T + 1, N))
    y = np.empty_like(x)
    y[:, 0] = mu * x[:, 0]
    for t in range(T):
        y[:, t + 1] = y[:, t] @ A.T + mu * x[:, t + 1]
    return y


def random_laplacian(n_nodes, p, seed, lam=0.99, mu=0.1):
    return laplacian_combination(generate_er(n_nodes, p, seed), lam, mu)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
