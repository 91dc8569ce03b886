"""Model parameters and particle configurations on the cycle Z/KZ.

A configuration is stored as an occupation vector ``counts`` of length ``K``
where ``counts[k]`` is the number of particles sitting on site ``k``.
Every site index entering the public API is reduced modulo ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, EmptySite

PROB_ATOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Walk on the K-cycle: clockwise rate 1, anti-clockwise rate ``theta``,
    uniform killing rate ``p``."""

    K: int
    theta: float
    p: float

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 3:
            raise DomainError(f"K must be an integer >= 3, got {self.K!r}")
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta!r}")
        if not self.p > 0:
            raise DomainError(f"p must be positive, got {self.p!r}")
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "p", float(self.p))

    def with_p(self, p: float) -> "ModelParams":
        return ModelParams(self.K, self.theta, p)


@dataclass(frozen=True)
class Configuration:
    """Occupation vector of ``N = sum(counts)`` particles, ``N >= 2``."""

    counts: tuple

    def __init__(self, counts: Iterable[int]):
        values = tuple(int(c) for c in counts)
        if len(values) < 1:
            raise DomainError("a configuration needs at least one site")
        if any(c < 0 for c in values):
            raise DomainError(f"occupation numbers must be nonnegative: {values}")
        if sum(values) < 2:
            raise DomainError(f"need at least N=2 particles, got {sum(values)}")
        object.__setattr__(self, "counts", values)

    @property
    def K(self) -> int:
        return len(self.counts)

    @property
    def N(self) -> int:
        return sum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)

    def __getitem__(self, k: int) -> int:
        return self.counts[k % self.K]

    def __iter__(self):
        return iter(self.counts)

    def __len__(self) -> int:
        return self.K


def as_prob_vector(weights: Sequence[float], atol: float = PROB_ATOL) -> np.ndarray:
    """Validate and return ``weights`` as a float probability vector."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise DomainError("a probability vector must be one-dimensional")
    if np.any(w < -atol):
        raise DomainError("a probability vector must be nonnegative")
    if abs(w.sum() - 1.0) > atol:
        raise DomainError(f"weights sum to {w.sum()!r}, not 1")
    return w


def dirac(K: int, k: int) -> np.ndarray:
    v = np.zeros(K)
    v[k % K] = 1.0
    return v


def uniform(K: int) -> np.ndarray:
    return np.full(K, 1.0 / K)


def empirical_measure(config: Configuration) -> np.ndarray:
    """Proportion of particles on each site."""
    return np.array(config.counts, dtype=float) / config.N


def rotate(config: Configuration, l: int = 1) -> Configuration:
    """Apply the rotation ``(eta_0, ..., eta_{K-1}) -> (eta_1, ..., eta_0)`` ``l`` times."""
    K = config.K
    return Configuration(config.counts[(k + l) % K] for k in range(K))


def move_particle(config: Configuration, i: int, j: int) -> Configuration:
    """Move one particle from site ``i`` to site ``j``."""
    K = config.K
    i, j = i % K, j % K
    if config.counts[i] == 0:
        raise EmptySite(f"site {i} is empty in {config.counts}")
    counts = list(config.counts)
    counts[i] -= 1
    counts[j] += 1
    return Configuration(counts)
