"""Nearest-integer distance, primes, and the simultaneous approximation scan.

The scan looks for grid values of tau at which every frequency
log(p_m) / 2pi, for the primes p_m <= z, lands within ``delta`` of the
target m / (a - b) modulo one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "dist_nearest_int",
    "primes_upto",
    "KroneckerQuery",
    "TauHits",
    "kronecker_scan",
    "kronecker_offsets",
    "hit_density",
    "density_curve",
]

_CHUNK = 1 << 18


def dist_nearest_int(x):
    """Distance from ``x`` to the nearest integer, in [0, 1/2].

    Works elementwise on arrays.
    """
    y = np.abs(np.asarray(x, dtype=float) - np.rint(x))
    return float(y) if np.ndim(y) == 0 else y


def primes_upto(z: float) -> np.ndarray:
    """All primes <= z, ascending (sieve of Eratosthenes)."""
    n = int(math.floor(z))
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


@dataclass(frozen=True)
class KroneckerQuery:
    """Scan parameters; ``shift`` is a ``RationalShift`` (only .a and .b are used)."""

    z: float
    shift: object
    delta: float
    T: float
    step: float = 0.01

    def __post_init__(self) -> None:
        if not self.z >= 2:
            raise ValueError("z must be >= 2")
        if self.shift.a == self.shift.b:
            raise ValueError("a and b must differ")
        if not 0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        if not self.T > 0 or not self.step > 0:
            raise ValueError("T and step must be positive")
        limit = self.delta * (2 * math.pi / math.log(self.z)) / 4
        if self.step > limit * (1 + 1e-12):
            raise ValueError(
                f"step {self.step:g} too coarse; must be <= {limit:.6g} so no delta-window is skipped"
            )

    @property
    def modulus(self) -> int:
        return self.shift.a - self.shift.b

    def primes(self) -> np.ndarray:
        return primes_upto(self.z)

    def frequencies(self) -> np.ndarray:
        return np.log(self.primes().astype(float)) / (2 * math.pi)

    def targets(self) -> np.ndarray:
        """m / (a - b) reduced mod 1, for m = 1 .. pi(z)."""
        m = np.arange(1, self.primes().size + 1)
        q = self.modulus
        return (m % q) / q

    def grid_size(self) -> int:
        return int(math.floor(self.T / self.step + 1e-9)) + 1


@dataclass(frozen=True)
class TauHits:
    taus: np.ndarray
    query: KroneckerQuery
    grid_size: int
    max_dist: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.taus.size)


def kronecker_offsets(tau, query: KroneckerQuery) -> np.ndarray:
    """Signed offsets of tau*log(p_m)/2pi from m/(a-b), wrapped into [-1/2, 1/2]."""
    x = np.outer(np.atleast_1d(np.asarray(tau, dtype=float)), query.frequencies()) - query.targets()
    return x - np.rint(x)


def kronecker_scan(query: KroneckerQuery) -> TauHits:
    """Every grid point k*step in [0, T] meeting max_m ||...|| < delta.

    The grid is walked in fixed chunks and merged in ascending order, so the
    result depends only on the query.
    """
    freqs = query.frequencies()
    targets = query.targets()
    n = query.grid_size()
    taus, worst = [], []
    for lo in range(0, n, _CHUNK):
        k = np.arange(lo, min(n, lo + _CHUNK), dtype=float)
        tau = k * query.step
        x = np.outer(tau, freqs) - targets
        d = np.abs(x - np.rint(x)).max(axis=1)
        keep = d < query.delta
        taus.append(tau[keep])
        worst.append(d[keep])
    return TauHits(
        taus=np.concatenate(taus) if taus else np.zeros(0),
        query=query,
        grid_size=n,
        max_dist=np.concatenate(worst) if worst else np.zeros(0),
    )


def hit_density(hits: TauHits) -> float:
    """Accepted grid points over total grid points."""
    if hits.grid_size == 0:
        return 0.0
    return len(hits) / hits.grid_size


def density_curve(hits: TauHits, checkpoints) -> list[tuple[float, float]]:
    """(T', density over [0, T']) for each checkpoint T' <= T."""
    out = []
    step = hits.query.step
    for t_end in checkpoints:
        total = int(math.floor(t_end / step + 1e-9)) + 1
        accepted = int(np.searchsorted(hits.taus, t_end + 0.5 * step))
        out.append((float(t_end), accepted / total))
    return out
