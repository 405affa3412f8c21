"""Truncated Euler products twisted by roots of unity.

The m-th prime p_m carries the weight omega(p_m) = exp(2 pi i m / (a - b)).
Powers omega(p_m)^c are built from the integer residue (m c) mod (a - b), so
omega^a and omega^b come out as the very same float whenever a and b are
congruent modulo a - b (which they always are).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .diophantine import primes_upto
from .errors import DegenerateShift, SigmaOutOfRange

__all__ = [
    "RationalShift",
    "Truncation",
    "omega",
    "omega_power",
    "prime_weights",
    "omega_partial_sums",
    "truncated_product",
    "log_truncated_product",
    "bound_exponent",
    "bound_rhs",
    "leading_sum_direct",
    "leading_sum_partial",
    "tail_sum",
    "tail_bound",
    "tail_step_sums",
    "BoundSweep",
    "bound_sweep",
]

TAIL_CUTOFF = 1e-16
TAIL_CONSTANT = 7.0


@dataclass(frozen=True)
class RationalShift:
    """d = a/b in lowest terms with b >= 1."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if int(self.a) != self.a or int(self.b) != self.b:
            raise ValueError("a and b must be integers")
        if self.a == 0 or self.b == 0:
            raise ValueError("a and b must be nonzero")
        frac = Fraction(int(self.a), int(self.b))
        object.__setattr__(self, "a", frac.numerator)
        object.__setattr__(self, "b", frac.denominator)

    @classmethod
    def parse(cls, text: str) -> "RationalShift":
        num, _, den = text.partition("/")
        return cls(int(num), int(den or 1))

    @property
    def d(self) -> float:
        return self.a / self.b

    @property
    def modulus(self) -> int:
        """a - b, the (signed) order of the weights."""
        return self.a - self.b

    @property
    def covered_by_theorem(self) -> bool:
        return self.a != self.b and abs(self.a - self.b) != 1

    def __str__(self) -> str:
        return f"{self.a}/{self.b}"


@dataclass(frozen=True)
class Truncation:
    z: float

    def __post_init__(self) -> None:
        if not self.z >= 2:
            raise ValueError("truncation point z must be >= 2")


def _z(trunc) -> float:
    return float(trunc.z if isinstance(trunc, Truncation) else trunc)


def _modulus(shift: RationalShift) -> int:
    q = shift.modulus
    if q == 0:
        raise DegenerateShift("a = b gives d = 1; the weights are undefined")
    return q


def _roots(residues: np.ndarray, q: int) -> np.ndarray:
    """exp(2 pi i r / q) for residues r with the sign of q; exact at quarter turns."""
    r = np.asarray(residues, dtype=np.int64)
    out = np.exp(2j * np.pi * (r / q))
    quarter = (4 * r) % q == 0
    if np.any(quarter):
        exact = np.array([1, 1j, -1, -1j])
        out = np.where(quarter, exact[((4 * r) // q) % 4], out)
    return out


def omega(m: int, shift: RationalShift) -> complex:
    """Weight of the m-th prime: exp(2 pi i m / (a - b))."""
    q = _modulus(shift)
    return complex(_roots(np.array([m % q]), q)[0])


def omega_power(m, c: int, shift: RationalShift):
    """omega(p_m)^c, computed from the residue (m c) mod (a - b)."""
    q = _modulus(shift)
    m = np.asarray(m, dtype=np.int64)
    out = _roots((m * int(c)) % q, q)
    return complex(out) if out.ndim == 0 else out


def prime_weights(trunc, c: int, shift: RationalShift) -> tuple[np.ndarray, np.ndarray]:
    """Primes p <= z and their weights omega(p)^c."""
    primes = primes_upto(_z(trunc))
    m = np.arange(1, primes.size + 1)
    return primes, omega_power(m, c, shift)


def _factor_terms(s, trunc, c, shift):
    """omega(p)^c p^{-s} for each (s, p); shape (len(s), pi(z))."""
    primes, w = prime_weights(trunc, c, shift)
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    return w[None, :] * np.exp(-np.outer(s_arr, np.log(primes.astype(float))))


def _unwrap(result, s):
    return complex(result[0]) if np.ndim(s) == 0 else result.reshape(np.shape(s))


def truncated_product(s, trunc, c: int, shift: RationalShift):
    """prod_{p <= z} (1 - omega(p)^c p^{-s})^{-1}."""
    x = _factor_terms(s, trunc, c, shift)
    return _unwrap(1.0 / np.prod(1.0 - x, axis=1), s)


def log_truncated_product(s, trunc, c: int, shift: RationalShift):
    """-sum_{p <= z} Log(1 - omega(p)^c p^{-s}) with the principal Log per factor."""
    x = _factor_terms(s, trunc, c, shift)
    return _unwrap(-np.log(1.0 - x).sum(axis=1), s)


def bound_exponent(s, trunc, shift: RationalShift):
    """Logarithm of ``bound_rhs``; finite where the bound itself would overflow."""
    z = _z(trunc)
    s_arr = np.asarray(s, dtype=complex)
    sigma = s_arr.real
    if np.any(sigma <= 0.5):
        raise SigmaOutOfRange("the bound needs Re s > 1/2")
    q = abs(_modulus(shift))
    tail = TAIL_CONSTANT * (1.0 - z ** (1.0 - 2.0 * sigma)) / (2.0 * sigma - 1.0)
    lead = q * (z ** (-sigma) + 2.0 * np.abs(s_arr) * (1.0 - z ** (-sigma)))
    out = tail + lead
    return float(out) if out.ndim == 0 else out


def bound_rhs(s, trunc, shift: RationalShift):
    """exp(7(1 - z^{1-2s}) / (2s - 1) + |a-b| (z^{-s} + 2|s| (1 - z^{-s}))), sigma = Re s."""
    out = np.exp(bound_exponent(s, trunc, shift))
    return float(out) if np.ndim(out) == 0 else out


def omega_partial_sums(n_max: int, c: int, shift: RationalShift) -> np.ndarray:
    """Omega_n = sum_{p <= n} omega(p)^c for n = 1 .. n_max (index 0 is n = 1)."""
    weights = np.zeros(n_max, dtype=complex)
    primes, w = prime_weights(max(n_max, 2), c, shift)
    keep = primes <= n_max
    weights[primes[keep] - 1] = w[keep]
    return np.cumsum(weights)


def leading_sum_direct(s, trunc, c: int, shift: RationalShift):
    """sum_{p <= z} omega(p)^c p^{-s}."""
    return _unwrap(_factor_terms(s, trunc, c, shift).sum(axis=1), s)


def leading_sum_partial(s, trunc, c: int, shift: RationalShift):
    """The same sum rearranged by partial summation.

    Omega_Z Z^{-s} + s sum_{n < Z} Omega_n int_n^{n+1} t^{-s-1} dt, with Z = floor(z)
    and the integral taken in closed form (n^{-s} - (n+1)^{-s}) / s.
    """
    Z = int(math.floor(_z(trunc)))
    omegas = omega_partial_sums(Z, c, shift)
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.empty(s_arr.size, dtype=complex)
    log_n = np.log(np.arange(1, Z + 1, dtype=float))
    rows = max(1, (1 << 20) // Z)
    for lo in range(0, s_arr.size, rows):
        ss = s_arr[lo : lo + rows, None]
        powers = np.exp(-ss * log_n)  # n^{-s}, n = 1 .. Z
        integrals = (powers[:, :-1] - powers[:, 1:]) / ss
        out[lo : lo + rows] = omegas[-1] * powers[:, -1] + ss[:, 0] * (integrals @ omegas[:-1])
    return _unwrap(out, s)


def tail_sum(s, trunc, c: int, shift: RationalShift):
    """sum_{p <= z} sum_{k >= 2} omega(p)^{ck} / (k p^{ks}).

    For each prime the k-series stops once p^{-k sigma}/k < 1e-16.
    """
    q = _modulus(shift)
    primes = primes_upto(_z(trunc))
    m = np.arange(1, primes.size + 1, dtype=np.int64)
    log_p = np.log(primes.astype(float))
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    sigma_min = float(s_arr.real.min())
    if sigma_min <= 0:
        raise SigmaOutOfRange("tail_sum needs Re s > 0")
    out = np.zeros(s_arr.size, dtype=complex)
    k = 2
    while True:
        active = np.exp(-k * sigma_min * log_p) / k >= TAIL_CUTOFF
        if not active.any():
            break
        w = _roots((m[active] * (int(c) * k)) % q, q)
        out += (np.exp(-k * np.outer(s_arr, log_p[active])) @ w) / k
        k += 1
    return _unwrap(out, s)


def tail_bound(sigma, trunc):
    """7 (1 - z^{1 - 2 sigma}) / (2 sigma - 1)."""
    z = _z(trunc)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0.5):
        raise SigmaOutOfRange("the tail bound needs sigma > 1/2")
    out = TAIL_CONSTANT * (1.0 - z ** (1.0 - 2.0 * sigma)) / (2.0 * sigma - 1.0)
    return float(out) if out.ndim == 0 else out


def tail_step_sums(sigma: float, trunc) -> tuple[float, float]:
    """(sum_{p<=z} 1/(p^{2 sigma} - p^sigma), 7 sum_{2<=n<=z} n^{-2 sigma})."""
    z = _z(trunc)
    p = primes_upto(z).astype(float)
    n = np.arange(2, int(math.floor(z)) + 1, dtype=float)
    lhs = float(np.sum(1.0 / (p ** (2 * sigma) - p**sigma)))
    rhs = TAIL_CONSTANT * float(np.sum(n ** (-2 * sigma)))
    return lhs, rhs


@dataclass(frozen=True)
class BoundSweep:
    """Per-tuple results of :func:`bound_sweep` (all arrays share one length)."""

    sigma: np.ndarray
    t: np.ndarray
    z: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    abs_product: np.ndarray
    log_bound: np.ndarray
    tail_abs: np.ndarray
    tail_bound: np.ndarray
    step_lhs: np.ndarray
    step_rhs: np.ndarray
    target_gap: np.ndarray
    weights_equal: np.ndarray
    leading_gap: np.ndarray

    def __len__(self) -> int:
        return int(self.sigma.size)

    @property
    def log_margin(self) -> np.ndarray:
        """log(bound / |zeta_z|); the bound holds where this is >= 0."""
        return self.log_bound - np.log(self.abs_product)

    @property
    def bound_violations(self) -> int:
        return int(np.sum(self.log_margin < 0))

    @property
    def tail_violations(self) -> int:
        return int(np.sum(self.tail_abs > self.tail_bound))

    @property
    def step_violations(self) -> int:
        return int(np.sum(self.step_lhs > self.step_rhs))


def bound_sweep(
    n_tuples: int = 10_000,
    seed: int = 0,
    sigma_range: tuple[float, float] = (0.55, 0.95),
    t_max: float = 50.0,
    z_values=(10, 100, 1000, 10_000),
    shifts=((3, 1), (5, 2), (7, 3)),
) -> BoundSweep:
    """Check the product bound, the tail bound and the exact identities on random tuples.

    Tuples (sigma, t, z, shift, c) are drawn from a seeded generator with c in
    {a, b}; evaluation is grouped by (z, shift, c) and vectorised over s.
    """
    rng = np.random.default_rng(seed)
    sig = rng.uniform(sigma_range[0], sigma_range[1], n_tuples)
    ts = rng.uniform(-t_max, t_max, n_tuples)
    zs = np.asarray(z_values, dtype=float)[rng.integers(0, len(z_values), n_tuples)]
    shift_objs = [RationalShift(int(a), int(b)) for a, b in shifts]
    which = rng.integers(0, len(shift_objs), n_tuples)
    use_b = rng.integers(0, 2, n_tuples).astype(bool)
    a_arr = np.array([shift_objs[i].a for i in which])
    b_arr = np.array([shift_objs[i].b for i in which])
    c_arr = np.where(use_b, b_arr, a_arr)
    s_all = sig + 1j * ts

    cols = {k: np.empty(n_tuples) for k in (
        "abs_product", "log_bound", "tail_abs", "tail_bound", "step_lhs", "step_rhs",
        "target_gap", "leading_gap")}
    weights_equal = np.empty(n_tuples, dtype=bool)

    for z in np.unique(zs):
        primes = primes_upto(z).astype(float)
        n = np.arange(2, int(math.floor(z)) + 1, dtype=float)
        for k, shift in enumerate(shift_objs):
            m = np.arange(1, primes.size + 1)
            same = bool(np.all(omega_power(m, shift.a, shift) == omega_power(m, shift.b, shift)))
            for c in (shift.a, shift.b):
                idx = np.flatnonzero((zs == z) & (which == k) & (c_arr == c))
                if idx.size == 0:
                    continue
                s = s_all[idx]
                sg = s.real
                cols["abs_product"][idx] = np.abs(truncated_product(s, z, c, shift))
                cols["log_bound"][idx] = bound_exponent(s, z, shift)
                cols["tail_abs"][idx] = np.abs(tail_sum(s, z, c, shift))
                cols["tail_bound"][idx] = tail_bound(sg, z)
                cols["step_lhs"][idx] = np.sum(
                    1.0 / (primes[None, :] ** (2 * sg[:, None]) - primes[None, :] ** sg[:, None]), axis=1
                )
                cols["step_rhs"][idx] = TAIL_CONSTANT * np.sum(n[None, :] ** (-2 * sg[:, None]), axis=1)
                cols["target_gap"][idx] = np.abs(
                    truncated_product(s, z, -shift.a, shift) - truncated_product(s, z, -shift.b, shift)
                )
                cols["leading_gap"][idx] = np.abs(
                    leading_sum_direct(s, z, c, shift) - leading_sum_partial(s, z, c, shift)
                )
                weights_equal[idx] = same

    return BoundSweep(
        sigma=sig, t=ts, z=zs, a=a_arr, b=b_arr, c=c_arr, weights_equal=weights_equal, **cols
    )
