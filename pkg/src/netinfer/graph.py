"""Random graphs and the Laplacian combination rule.

Adjacency matrices are plain ``uint8`` arrays (symmetric, zero diagonal).
Combination matrices carry the ``mu``/``lam`` they were built with so that
downstream code can check consistency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netinfer._rng import make_rng
from netinfer.errors import ParameterError


@dataclass(frozen=True)
class CombinationMatrix:
    matrix: np.ndarray
    mu: float
    lam: float

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    @property
    def edge_weight(self) -> float:
        """Off-diagonal value taken by connected pairs."""
        off = self.matrix[~np.eye(self.n_nodes, dtype=bool)]
        nz = off[off != 0]
        return float(nz[0]) if nz.size else 0.0


def validate_adjacency(G: np.ndarray) -> np.ndarray:
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ParameterError(f"adjacency must be square, got shape {G.shape}")
    if not np.isin(G, (0, 1)).all():
        raise ParameterError("adjacency entries must be 0 or 1")
    if not np.array_equal(G, G.T):
        raise ParameterError("adjacency must be symmetric")
    if np.any(np.diag(G) != 0):
        raise ParameterError("adjacency must have a zero diagonal")
    return G.astype(np.uint8)


def generate_er(n_nodes: int, p: float, seed: int) -> np.ndarray:
    """Erdos-Renyi graph: every unordered pair is an edge with probability ``p``."""
    if n_nodes < 2:
        raise ParameterError(f"n_nodes must be >= 2, got {n_nodes}")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1), got {p}")
    rng = make_rng(seed)
    iu = np.triu_indices(n_nodes, k=1)
    draws = rng.random(iu[0].size)
    G = np.zeros((n_nodes, n_nodes), dtype=np.uint8)
    G[iu] = draws < p
    return G | G.T


def generate_ba(n_nodes: int, m: int, seed: int) -> np.ndarray:
    """Barabasi-Albert preferential attachment.

    Starts from a complete graph on ``m + 1`` nodes; every later node attaches
    to ``m`` distinct existing nodes drawn with probability proportional to
    their current degree.
    """
    if not 1 <= m < n_nodes:
        raise ParameterError(f"need 1 <= m < n_nodes, got m={m}, n_nodes={n_nodes}")
    rng = make_rng(seed)
    G = np.zeros((n_nodes, n_nodes), dtype=np.uint8)
    G[: m + 1, : m + 1] = 1
    np.fill_diagonal(G, 0)
    degree = G.sum(axis=1).astype(np.float64)
    for new in range(m + 1, n_nodes):
        weights = degree[:new] / degree[:new].sum()
        targets = rng.choice(new, size=m, replace=False, p=weights)
        G[new, targets] = 1
        G[targets, new] = 1
        degree[targets] += 1
        degree[new] = m
    return G


def laplacian_combination(G: np.ndarray, lam: float, mu: float) -> CombinationMatrix:
    """Symmetric combination matrix with rows summing to ``1 - mu``.

    Degrees count the node itself (``d_k = 1 + sum_z G_kz``) and the maximum
    runs over all nodes, observed or not.
    """
    G = validate_adjacency(G)
    if not 0.0 < lam <= 1.0:
        raise ParameterError(f"lambda must lie in (0, 1], got {lam}")
    if not 0.0 < mu < 1.0:
        raise ParameterError(f"mu must lie in (0, 1), got {mu}")
    degrees = 1 + G.sum(axis=1, dtype=np.int64)
    weight = (1.0 - mu) * lam / degrees.max()
    A = G.astype(np.float64) * weight
    np.fill_diagonal(A, (1.0 - mu) - A.sum(axis=1))
    return CombinationMatrix(matrix=A, mu=float(mu), lam=float(lam))


def spectral_radius(A) -> float:
    """Largest absolute eigenvalue of a square matrix."""
    if isinstance(A, CombinationMatrix):
        A = A.matrix
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(f"matrix must be square, got shape {A.shape}")
    if np.array_equal(A, A.T):
        eig = np.linalg.eigvalsh(A)
    else:
        eig = np.linalg.eigvals(A)
    return float(np.max(np.abs(eig)))
