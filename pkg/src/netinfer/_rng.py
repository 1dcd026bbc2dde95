"""Seed handling: every random draw in the package goes through here."""

from __future__ import annotations

import numpy as np

from netinfer.errors import ParameterError

_MAX_SEED = 2**64 - 1

# Purpose tags for per-run substreams. Values are part of the reproducibility
# contract; never renumber.
PURPOSES = {"graph": 0, "mask": 1, "noise": 2}
FIXED_RUN = 2**32  # substream index used when a draw is shared by all runs


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= _MAX_SEED:
        raise ParameterError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def make_rng(seed: int, key: tuple[int, ...] = ()) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, *key)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(master_seed: int, run_index: int, purpose: str) -> int:
    """Hash ``(master_seed, run_index, purpose)`` into an independent 64-bit seed."""
    if purpose not in PURPOSES:
        raise ParameterError(f"unknown seed purpose {purpose!r}")
    ss = np.random.SeedSequence(check_seed(master_seed), spawn_key=(int(run_index), PURPOSES[purpose]))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)
