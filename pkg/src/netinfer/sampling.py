"""VAR diffusion and partial observation.

The process is ``y_0 = mu x_0`` and ``y_{t+1} = A y_t + mu x_{t+1}`` with
i.i.d. standard normal ``x``. The full network is always simulated; masking
happens afterwards so hidden nodes keep driving the observed coordinates.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from netinfer._rng import check_seed, make_rng
from netinfer.errors import ParameterError
from netinfer.graph import CombinationMatrix

DEFAULT_BLOCK = 4096
_HEADER = struct.Struct("<QQ")


@dataclass(frozen=True)
class NoiseSource:
    """Deterministic stream of standard normals.

    ``substream(i)`` yields an independent source; the same ``(seed, key)``
    always reproduces the same sequence, however it is consumed in chunks.
    """

    seed: int
    key: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "seed", check_seed(self.seed))

    def substream(self, index: int) -> "NoiseSource":
        return NoiseSource(self.seed, self.key + (int(index),))

    def generator(self) -> np.random.Generator:
        return make_rng(self.seed, self.key)


@dataclass(frozen=True)
class ObservationMask:
    n_nodes: int
    indices: np.ndarray = field(repr=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size < 2:
            raise ParameterError("an observation mask needs at least two nodes")
        if np.any(np.diff(idx) <= 0):
            raise ParameterError("mask indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= self.n_nodes:
            raise ParameterError(f"mask indices out of range for {self.n_nodes} nodes")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return int(self.indices.size)

    @property
    def xi(self) -> float:
        return self.size / self.n_nodes

    @classmethod
    def full(cls, n_nodes: int) -> "ObservationMask":
        return cls(n_nodes, np.arange(n_nodes))


def _unpack(A, mu: float) -> np.ndarray:
    if isinstance(A, CombinationMatrix):
        if A.mu != mu:
            raise ParameterError(f"mu={mu} does not match the combination matrix (mu={A.mu})")
        A = A.matrix
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(f"combination matrix must be square, got shape {A.shape}")
    if not 0.0 < mu < 1.0:
        raise ParameterError(f"mu must lie in (0, 1), got {mu}")
    return A


def iter_var(A, mu: float, T: int, noise: NoiseSource, block: int = DEFAULT_BLOCK) -> Iterator[np.ndarray]:
    """Yield ``y_0 .. y_T`` as consecutive row blocks of at most ``block`` rows.

    Concatenating the blocks gives exactly :func:`simulate_var`'s output for
    any ``block``.
    """
    A = _unpack(A, mu)
    if T < 0:
        raise ParameterError(f"horizon must be nonnegative, got {T}")
    if block < 1:
        raise ParameterError("block must be positive")
    return _var_blocks(A, mu, T, noise.generator(), block)


def _var_blocks(A: np.ndarray, mu: float, T: int, rng: np.random.Generator, block: int):
    N = A.shape[0]
    y = None
    start = 0
    while start <= T:
        rows = min(block, T + 1 - start)
        out = rng.standard_normal((rows, N))
        out *= mu
        i = 0
        if y is None:
            y = out[0].copy()
            i = 1
        for i in range(i, rows):
            y = A @ y + out[i]
            out[i] = y
        yield out
        start += rows


def simulate_var(A, mu: float, T: int, noise: NoiseSource) -> np.ndarray:
    """Trajectory ``y_0 .. y_T`` as a ``(T + 1, N)`` array."""
    if T < 3:
        raise ParameterError(f"horizon T must be >= 3, got {T}")
    return np.concatenate(list(iter_var(A, mu, T, noise)), axis=0)


def select_observed(n_nodes: int, xi: float, seed: int) -> ObservationMask:
    """Uniformly random subset of ``round(xi * n_nodes)`` nodes, sorted."""
    if not 0.0 < xi <= 1.0:
        raise ParameterError(f"xi must lie in (0, 1], got {xi}")
    size = int(round(xi * n_nodes))
    if size < 2:
        raise ParameterError(f"xi={xi} with {n_nodes} nodes observes fewer than 2 nodes")
    rng = make_rng(seed)
    idx = np.sort(rng.choice(n_nodes, size=size, replace=False))
    return ObservationMask(n_nodes, idx)


def observe(traj: np.ndarray, mask: ObservationMask) -> np.ndarray:
    traj = np.asarray(traj)
    if traj.ndim != 2:
        raise ParameterError("trajectory must be a (T + 1, N) array")
    if traj.shape[1] != mask.n_nodes:
        raise ParameterError(f"mask is for {mask.n_nodes} nodes, trajectory has {traj.shape[1]}")
    return traj[:, mask.indices]


def write_trajectory(path, traj: np.ndarray) -> None:
    """Binary dump: ``<u8 N, <u8 T`` header, then ``(T + 1) x N`` little-endian doubles."""
    traj = np.asarray(traj, dtype="<f8")
    rows, N = traj.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(N, rows - 1))
        fh.write(np.ascontiguousarray(traj).tobytes())


def read_trajectory(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ParameterError(f"{path}: truncated trajectory header")
    N, T = _HEADER.unpack_from(raw)
    expected = _HEADER.size + 8 * N * (T + 1)
    if len(raw) != expected:
        raise ParameterError(f"{path}: expected {expected} bytes for N={N}, T={T}, got {len(raw)}")
    return np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(T + 1, N).astype(np.float64)
