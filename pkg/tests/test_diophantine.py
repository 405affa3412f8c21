from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetalab.diophantine import (
    KroneckerQuery,
    density_curve,
    dist_nearest_int,
    hit_density,
    kronecker_offsets,
    kronecker_scan,
    primes_upto,
)
from zetalab.twisted_euler import RationalShift

S31 = RationalShift(3, 1)


@pytest.mark.parametrize("x,expected", [(0.5, 0.5), (1.2, 0.2), (-0.3, 0.3), (7.0, 0.0)])
def test_dist_nearest_int(x, expected):
    assert dist_nearest_int(x) == pytest.approx(expected, abs=1e-15)


def test_dist_vectorised():
    assert np.allclose(dist_nearest_int(np.array([0.1, 2.9, -1.5])), [0.1, 0.1, 0.5])


def test_primes():
    assert primes_upto(10).tolist() == [2, 3, 5, 7]
    assert primes_upto(2).tolist() == [2]
    assert primes_upto(100).size == 25
    assert primes_upto(10.9).tolist() == [2, 3, 5, 7]


def _is_prime(n: int) -> bool:
    return n > 1 and all(n % k for k in range(2, int(n**0.5) + 1))


def test_primes_against_trial_division():
    assert primes_upto(2000).tolist() == [n for n in range(2, 2001) if _is_prime(n)]


def test_query_rejects_coarse_step():
    with pytest.raises(ValueError):
        KroneckerQuery(z=10, shift=S31, delta=0.01, T=10, step=0.01)


@pytest.mark.parametrize("delta", [0.0, 0.5, -0.1])
def test_query_rejects_bad_delta(delta):
    with pytest.raises(ValueError):
        KroneckerQuery(z=10, shift=S31, delta=delta, T=10)


def test_targets():
    q = KroneckerQuery(z=13, shift=RationalShift(7, 3), delta=0.1, T=10, step=0.001)
    assert q.targets().tolist() == [0.25, 0.5, 0.75, 0.0, 0.25, 0.5]


def test_single_prime_cluster():
    q = KroneckerQuery(z=2, shift=S31, delta=0.05, T=10, step=0.01)
    hits = kronecker_scan(q)
    centre = math.pi / math.log(2)  # tau log 2 / 2 pi = 1/2
    first = hits.taus[hits.taus < 2 * centre]
    assert first.size > 0
    assert first.min() <= centre <= first.max()
    assert abs(0.5 * (first.min() + first.max()) - 4.53236) < 0.01


def test_tight_window_empty():
    q = KroneckerQuery(z=10, shift=S31, delta=0.01, T=10, step=0.005)
    hits = kronecker_scan(q)
    assert len(hits) == 0
    assert hit_density(hits) == 0.0


def test_wide_window_single_prime():
    q = KroneckerQuery(z=2, shift=S31, delta=0.49, T=1000, step=0.01)
    assert hit_density(kronecker_scan(q)) == pytest.approx(0.98, abs=0.005)


def test_hits_reverified_exactly():
    q = KroneckerQuery(z=10, shift=S31, delta=0.2, T=3000, step=0.01)
    hits = kronecker_scan(q)
    primes = primes_upto(10).tolist()
    for tau in hits.taus[::25]:
        for m, p in enumerate(primes, start=1):
            x = tau * math.log(p) / (2 * math.pi) - float(Fraction(m % 2, 2))
            assert abs(x - round(x)) < 0.2


def test_offsets_within_delta_for_hits():
    q = KroneckerQuery(z=30, shift=RationalShift(5, 2), delta=0.25, T=2000, step=0.01)
    hits = kronecker_scan(q)
    assert len(hits) > 0
    off = kronecker_offsets(hits.taus, q)
    assert np.all(np.abs(off) < q.delta)
    assert np.allclose(np.abs(off).max(axis=1), hits.max_dist)


@settings(max_examples=15, deadline=None)
@given(d1=st.floats(0.05, 0.45), d2=st.floats(0.05, 0.45))
def test_nested_in_delta(d1, d2):
    lo, hi = sorted((d1, d2))
    q1 = KroneckerQuery(z=7, shift=S31, delta=lo, T=500, step=0.005)
    q2 = KroneckerQuery(z=7, shift=S31, delta=hi, T=500, step=0.005)
    h1, h2 = kronecker_scan(q1), kronecker_scan(q2)
    assert set(h1.taus.tolist()) <= set(h2.taus.tolist())
    assert hit_density(h1) <= hit_density(h2)


def test_density_curve_endpoint():
    q = KroneckerQuery(z=10, shift=S31, delta=0.2, T=2000, step=0.01)
    hits = kronecker_scan(q)
    curve = density_curve(hits, [1000, 2000])
    assert curve[-1] == (2000.0, hit_density(hits))
    q_half = KroneckerQuery(z=10, shift=S31, delta=0.2, T=1000, step=0.01)
    assert curve[0][1] == hit_density(kronecker_scan(q_half))


def test_scan_chunking_invisible():
    # the grid spans several 2^18-point chunks; compare with one unchunked pass
    q = KroneckerQuery(z=10, shift=S31, delta=0.2, T=6000, step=0.01)
    full = kronecker_scan(q)
    tau = np.arange(q.grid_size()) * q.step
    x = np.outer(tau, q.frequencies()) - q.targets()
    direct = tau[np.abs(x - np.rint(x)).max(axis=1) < q.delta]
    assert np.array_equal(full.taus, direct)
