"""Sample correlation matrices of the observed signal and their analytic means.

For a sample count ``n`` the three time averages are

    R0_hat = (1/n) sum_{t=1}^{n} y_t     y_t^T
    R1_hat = (1/n) sum_{t=1}^{n} y_{t+1} y_t^T
    R3_hat = (1/n) sum_{t=1}^{n} y_{t+2} y_{t-1}^T

so ``y_0 .. y_{n+2}`` are consumed. Sums are formed in fixed blocks of
``BLOCK`` consecutive terms, aligned to absolute time, and added in ascending
order; the streaming and batch paths therefore produce identical bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from netinfer.errors import ParameterError, StabilityError
from netinfer.graph import CombinationMatrix, spectral_radius

BLOCK = 1024


@dataclass(frozen=True)
class SampleMoments:
    n: int
    r0: np.ndarray
    r1: np.ndarray
    r3: np.ndarray

    @property
    def s_size(self) -> int:
        return self.r0.shape[0]


class MomentAccumulator:
    """Streaming accumulator fed with consecutive rows ``y_0, y_1, ...``.

    Call :meth:`snapshot` for ``n`` before pushing rows beyond ``y_{n+2}``;
    rows past that point may already have been folded into completed blocks.
    """

    def __init__(self, s_size: int, block: int = BLOCK):
        self.s_size = s_size
        self.block = block
        self._buf = np.empty((0, s_size))
        self._buf_start = 0  # absolute time of self._buf[0]
        self._rows = 0  # rows pushed so far
        self._terms = 0  # terms t = 1 .. _terms already in the totals
        self._r0 = np.zeros((s_size, s_size))
        self._r1 = np.zeros((s_size, s_size))
        self._r3 = np.zeros((s_size, s_size))

    @property
    def rows_seen(self) -> int:
        return self._rows

    def push(self, rows: np.ndarray) -> None:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.shape[1] != self.s_size:
            raise ParameterError(f"expected rows of length {self.s_size}, got {rows.shape[1]}")
        self._buf = np.concatenate([self._buf, rows], axis=0)
        self._rows += rows.shape[0]
        # A block of terms a..a+B-1 (a = _terms + 1) needs rows up to a+B+1.
        while self._rows >= self._terms + self.block + 3:
            d0, d1, d3 = self._block_sums(self._terms + 1, self.block)
            self._r0 += d0
            self._r1 += d1
            self._r3 += d3
            self._terms += self.block
        drop = self._terms - self._buf_start
        if drop:
            self._buf = self._buf[drop:]
            self._buf_start = self._terms

    def _block_sums(self, first: int, count: int):
        lo = first - 1 - self._buf_start
        Y = self._buf[lo : lo + count + 3].copy()
        prev, cur, nxt, nxt2 = Y[:count], Y[1 : count + 1], Y[2 : count + 2], Y[3 : count + 3]
        return cur.T @ cur, nxt.T @ cur, nxt2.T @ prev

    def snapshot(self, n: int) -> SampleMoments:
        if n < 1:
            raise ParameterError(f"sample count must be >= 1, got {n}")
        if self._rows < n + 3:
            raise ParameterError(f"n={n} needs {n + 3} rows, only {self._rows} pushed")
        if n < self._terms:
            raise ParameterError(f"n={n} lies inside already folded blocks (up to {self._terms})")
        r0, r1, r3 = self._r0.copy(), self._r1.copy(), self._r3.copy()
        if n > self._terms:
            d0, d1, d3 = self._block_sums(self._terms + 1, n - self._terms)
            r0 += d0
            r1 += d1
            r3 += d3
        return SampleMoments(n=n, r0=r0 / n, r1=r1 / n, r3=r3 / n)


def accumulate(observed: np.ndarray, n: int) -> SampleMoments:
    """Moments of an observed trajectory ``[y_0 .. y_{n+2}]_S`` (extra rows ignored)."""
    observed = np.asarray(observed, dtype=np.float64)
    if observed.ndim != 2:
        raise ParameterError("observed trajectory must be a 2-D array")
    if n < 1:
        raise ParameterError(f"sample count must be >= 1, got {n}")
    if observed.shape[0] < n + 3:
        raise ParameterError(f"n={n} needs {n + 3} vectors, trajectory has {observed.shape[0]}")
    acc = MomentAccumulator(observed.shape[1])
    acc.push(observed[: n + 3])
    return acc.snapshot(n)


def _matrix(A) -> np.ndarray:
    if isinstance(A, CombinationMatrix):
        A = A.matrix
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(f"matrix must be square, got shape {A.shape}")
    return A


def _odd_even_series(start: np.ndarray, A2: np.ndarray, terms: int) -> np.ndarray:
    # start + start A^2 + ... + start A^{2(terms-1)}
    total = start.copy()
    power = start
    for _ in range(terms - 1):
        power = power @ A2
        total += power
    return total


def analytic_r0(A, mu: float, t: int) -> np.ndarray:
    """E[y_t y_t^T] = mu^2 (I + A^2 + ... + A^{2t})."""
    A = _matrix(A)
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    return mu**2 * _odd_even_series(np.eye(A.shape[0]), A @ A, t + 1)


def analytic_r1(A, mu: float, t: int) -> np.ndarray:
    """E[y_{t+1} y_t^T] = mu^2 (A + A^3 + ... + A^{2t+1})."""
    A = _matrix(A)
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    return mu**2 * _odd_even_series(A, A @ A, t + 1)


def analytic_r3(A, mu: float, t_minus_1: int) -> np.ndarray:
    """E[y_{t+2} y_{t-1}^T] = mu^2 (A^3 + A^5 + ... + A^{2t+1}), indexed by ``t - 1``."""
    A = _matrix(A)
    if t_minus_1 < 0:
        raise ParameterError(f"t - 1 must be >= 0, got {t_minus_1}")
    A2 = A @ A
    return mu**2 * _odd_even_series(A2 @ A, A2, t_minus_1 + 1)


def analytic_r0_limit(A, mu: float) -> np.ndarray:
    """Stationary covariance mu^2 (I - A^2)^{-1}."""
    A = _matrix(A)
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise StabilityError(f"spectral radius {rho:.6g} >= 1: the process has no stationary covariance")
    N = A.shape[0]
    M = np.eye(N) - A @ A
    rhs = mu**2 * np.eye(N)
    X = scipy.linalg.solve(M, rhs, assume_a="sym")
    resid = np.max(np.abs(M @ X - rhs).sum(axis=1))
    if resid > 1e-10:
        raise StabilityError(f"stationary solve residual {resid:.3e} exceeds 1e-10")
    return X


def expected_moments(A, mu: float, n: int, indices=None) -> SampleMoments:
    """Exact expectation of :func:`accumulate`'s output, optionally restricted to ``indices``."""
    A = _matrix(A)
    if n < 1:
        raise ParameterError(f"sample count must be >= 1, got {n}")
    N = A.shape[0]
    A2 = A @ A
    A3 = A2 @ A
    # R0(t) for t = 0, 1, ... built incrementally; R1(t) = A R0(t), R3(t-1) = A^3 R0(t-1).
    r0_t = np.eye(N)
    power = np.eye(N)
    s0 = np.zeros((N, N))
    s_prev = np.zeros((N, N))  # sum_{t=1}^{n} R0(t-1)
    for _ in range(n):
        s_prev += r0_t
        power = power @ A2
        r0_t = r0_t + power
        s0 += r0_t
    scale = mu**2 / n
    r0, r1, r3 = scale * s0, scale * (A @ s0), scale * (A3 @ s_prev)
    if indices is not None:
        ix = np.ix_(indices, indices)
        r0, r1, r3 = r0[ix], r1[ix], r3[ix]
    return SampleMoments(n=n, r0=r0, r1=r1, r3=r3)
