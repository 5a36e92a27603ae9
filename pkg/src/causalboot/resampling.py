"""Seeded random primitives.

Every stochastic routine draws from a Philox generator keyed by
``(root_seed, stream_id)``. Philox is counter-based, so each replication
owns an independent stream whose output does not depend on the order in
which replications run. Independent substreams within one replication
are obtained by offsetting the high word of the 256-bit counter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 1 << 64


@dataclass(frozen=True)
class SeedSpec:
    root_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for name in ("root_seed", "stream_id"):
            val = getattr(self, name)
            if not 0 <= val < _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer")

    def generator(self, substream: int = 0) -> np.random.Generator:
        bitgen = np.random.Philox(
            key=[self.root_seed, self.stream_id], counter=[0, 0, 0, substream]
        )
        return np.random.Generator(bitgen)

    def stream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.root_seed, stream_id)


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.generator()
    return SeedSpec(int(seed)).generator()


def sample_without_replacement(pop_size: int, k: int, seed) -> np.ndarray:
    """Uniform k-subset of range(pop_size), returned sorted."""
    if not 0 <= k <= pop_size:
        raise ValueError("k must lie in [0, pop_size]")
    rng = as_generator(seed)
    return np.sort(rng.permutation(pop_size)[:k])


def complete_randomization(n: int, n1: int, seed) -> np.ndarray:
    """Binary vector with exactly n1 ones, uniform over all such vectors."""
    if not 0 < n1 < n:
        raise ValueError("n1 must lie strictly between 0 and n")
    rng = as_generator(seed)
    w = np.zeros(n, dtype=np.int8)
    w[rng.permutation(n)[:n1]] = 1
    return w


def bernoulli_assignment(n: int, prop: float, seed) -> np.ndarray:
    """I.i.d. treatment indicators; all-control/all-treated draws are returned as is."""
    if not 0 < prop < 1:
        raise ValueError("prop must lie in (0, 1)")
    rng = as_generator(seed)
    return (rng.random(n) < prop).astype(np.int8)


def batch_permutations(rng: np.random.Generator, B: int, n: int) -> np.ndarray:
    """B independent uniform permutations of range(n), one per row."""
    base = np.broadcast_to(np.arange(n, dtype=np.int64), (B, n))
    return rng.permuted(base, axis=1)
