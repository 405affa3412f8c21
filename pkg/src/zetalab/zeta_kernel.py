"""Riemann zeta evaluation near the critical strip.

``zeta`` uses Euler-Maclaurin summation with a height-dependent cutoff,
``log_zeta`` tracks a continuous branch along a horizontal path, and
``count_zeros`` applies the argument principle to a rectangle.

Every evaluation is a pure function of its inputs and an ``EvalParams``
value: a point is always summed with the cutoff its own height dictates,
whatever else is in the same call.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    AccuracyUnreachable,
    BranchObstruction,
    ContourThroughZero,
    PoleAtOne,
    PoleInRegion,
)

__all__ = [
    "EvalParams",
    "DEFAULT_PARAMS",
    "RectRegion",
    "zeta",
    "zeta_many",
    "zeta_with_derivative",
    "zeta_on_shifts",
    "log_zeta",
    "log_zeta_many",
    "count_zeros",
]

MAX_HEIGHT = 1e6

# B_2, B_4, ..., B_26
_BERNOULLI = (
    1 / 6,
    -1 / 30,
    1 / 42,
    -1 / 30,
    5 / 66,
    -691 / 2730,
    7 / 6,
    -3617 / 510,
    43867 / 798,
    -174611 / 330,
    854513 / 138,
    -236364091 / 2730,
    8553103 / 6,
)
# B_{2k} / (2k)!
_EM_COEF = tuple(b / math.factorial(2 * k) for k, b in enumerate(_BERNOULLI, start=1))

# rows * cutoff entries materialised at once
_BLOCK_ENTRIES = 1 << 21


@dataclass(frozen=True)
class EvalParams:
    """Euler-Maclaurin settings.

    ``series_terms_N`` is a floor on the cutoff; the cutoff actually used at
    height t is ``max(series_terms_N, ceil(2 (|t| + 10)))``.
    ``bernoulli_order_M`` is the highest Bernoulli index kept, so the default
    24 means the twelve corrections B_2 .. B_24.  ``target_abs_err`` bounds the
    estimated truncation remainder (not floating point rounding).
    """

    series_terms_N: int = 50
    bernoulli_order_M: int = 24
    target_abs_err: float = 1e-10

    def __post_init__(self) -> None:
        if int(self.series_terms_N) != self.series_terms_N or self.series_terms_N < 16:
            raise ValueError("series_terms_N must be an integer >= 16")
        m = self.bernoulli_order_M
        if int(m) != m or m % 2 or not 2 <= m <= 24:
            raise ValueError("bernoulli_order_M must be an even integer in [2, 24]")
        if not self.target_abs_err >= 1e-12:
            raise ValueError("target_abs_err must be >= 1e-12")

    def cutoff(self, t_abs: float) -> int:
        return max(int(self.series_terms_N), math.ceil(2.0 * (t_abs + 10.0)))

    def fingerprint(self) -> bytes:
        """16-byte digest identifying these settings (used by the eval cache)."""
        key = f"em:{self.series_terms_N}:{self.bernoulli_order_M}:{self.target_abs_err!r}"
        return hashlib.blake2b(key.encode(), digest_size=16).digest()


DEFAULT_PARAMS = EvalParams()


@dataclass(frozen=True)
class RectRegion:
    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float

    def __post_init__(self) -> None:
        if not (self.sigma_min < self.sigma_max and self.t_min < self.t_max):
            raise ValueError("RectRegion needs sigma_min < sigma_max and t_min < t_max")

    def contains(self, s: complex, *, strict: bool = True) -> bool:
        if strict:
            return self.sigma_min < s.real < self.sigma_max and self.t_min < s.imag < self.t_max
        return self.sigma_min <= s.real <= self.sigma_max and self.t_min <= s.imag <= self.t_max

    def near_boundary(self, s: complex, tol: float) -> bool:
        inside = (
            self.sigma_min - tol <= s.real <= self.sigma_max + tol
            and self.t_min - tol <= s.imag <= self.t_max + tol
        )
        if not inside:
            return False
        return min(
            abs(s.real - self.sigma_min),
            abs(s.real - self.sigma_max),
            abs(s.imag - self.t_min),
            abs(s.imag - self.t_max),
        ) <= tol

    def translated(self, d_sigma: float, d_t: float) -> "RectRegion":
        return RectRegion(
            self.sigma_min + d_sigma, self.sigma_max + d_sigma, self.t_min + d_t, self.t_max + d_t
        )

    def split_t(self, pieces: int) -> list["RectRegion"]:
        edges = np.linspace(self.t_min, self.t_max, pieces + 1)
        return [
            RectRegion(self.sigma_min, self.sigma_max, float(lo), float(hi))
            for lo, hi in zip(edges[:-1], edges[1:])
        ]


# ---------------------------------------------------------------------------
# Euler-Maclaurin core

_log_table = np.zeros(0)


def _logs(count: int) -> np.ndarray:
    """log(1), ..., log(count) as a prefix of a shared, growing table."""
    global _log_table
    if _log_table.size < count:
        size = max(count, 2 * _log_table.size, 1024)
        _log_table = np.log(np.arange(1, size + 1, dtype=float))
    return _log_table[:count]


def _em_tail(s: np.ndarray, N: int, M: int, deriv: bool):
    """Euler-Maclaurin correction at cutoff N, plus remainder estimate."""
    log_n = math.log(N)
    n_ms = np.exp(-s * log_n)  # N^{-s}
    tail = N * n_ms / (s - 1.0) + 0.5 * n_ms
    dtail = None
    if deriv:
        dtail = -log_n * N * n_ms / (s - 1.0) - N * n_ms / (s - 1.0) ** 2 - 0.5 * log_n * n_ms
    poch = s.copy()  # s (s+1) ... (s+2k-2)
    dpoch = np.ones_like(s)
    power = n_ms / N  # N^{-s-2k+1}
    for k in range(1, M // 2 + 1):
        c = _EM_COEF[k - 1]
        tail = tail + c * poch * power
        if deriv:
            dtail = dtail + c * (dpoch - log_n * poch) * power
            a, b = s + (2 * k - 1), s + 2 * k
            dpoch = dpoch * a * b + poch * (a + b)
        poch = poch * (s + (2 * k - 1)) * (s + 2 * k)
        power = power / (N * N)
    k_next = M // 2 + 1
    est = np.abs(_EM_COEF[k_next - 1] * poch * power)
    est = est * np.abs(s + (2 * k_next - 1)) / np.maximum(s.real + 2 * k_next - 1, 1e-300)
    return tail, dtail, est


def _validate_points(s: np.ndarray) -> None:
    if not np.all(np.isfinite(s)):
        raise ValueError("zeta argument must be finite")
    if np.any(s == 1.0):
        raise PoleAtOne("zeta has a pole at s = 1")
    if np.any(np.abs(s.imag) > MAX_HEIGHT):
        raise ValueError(f"|Im s| must not exceed {MAX_HEIGHT:g}")


def _zeta_core(s: np.ndarray, params: EvalParams, deriv: bool):
    s = np.asarray(s, dtype=complex)
    shape = s.shape
    s = s.ravel()
    _validate_points(s)
    out = np.empty_like(s)
    dout = np.empty_like(s) if deriv else None
    cut = np.maximum(
        int(params.series_terms_N), np.ceil(2.0 * (np.abs(s.imag) + 10.0)).astype(np.int64)
    )
    M = params.bernoulli_order_M
    for N in np.unique(cut):
        N = int(N)
        idx = np.flatnonzero(cut == N)
        ln = _logs(N - 1)
        rows = max(1, _BLOCK_ENTRIES // max(N, 1))
        for lo in range(0, idx.size, rows):
            sel = idx[lo : lo + rows]
            terms = np.exp(-np.outer(s[sel], ln))
            out[sel] = terms.sum(axis=1)
            if deriv:
                dout[sel] = -(terms * ln).sum(axis=1)
        tail, dtail, est = _em_tail(s[idx], N, M, deriv)
        bad = est > params.target_abs_err
        if np.any(bad):
            j = idx[np.flatnonzero(bad)[0]]
            raise AccuracyUnreachable(
                f"remainder estimate {est[bad][0]:.3g} exceeds {params.target_abs_err:g} at s={s[j]}"
            )
        out[idx] += tail
        if deriv:
            dout[idx] += dtail
    if deriv:
        return out.reshape(shape), dout.reshape(shape)
    return out.reshape(shape), None


def zeta_many(s, params: EvalParams = DEFAULT_PARAMS) -> np.ndarray:
    """Vectorised zeta(s) over an array of complex points."""
    return _zeta_core(s, params, deriv=False)[0]


def zeta_with_derivative(s, params: EvalParams = DEFAULT_PARAMS):
    """Return ``(zeta(s), zeta'(s))`` arrays."""
    return _zeta_core(s, params, deriv=True)


def zeta(s: complex, params: EvalParams = DEFAULT_PARAMS) -> complex:
    """Riemann zeta at a single point.

    >>> round(zeta(2).real, 12)
    1.644934066848
    """
    return complex(zeta_many(np.array([s], dtype=complex), params)[0])


# ---------------------------------------------------------------------------
# many vertical shifts of one small point set


def _taylor_order(reach: float, tol: float = 1e-17) -> int:
    """Smallest K with reach^(K+1)/(K+1)! below tol."""
    k, term = 0, reach
    while term > tol:
        k += 1
        term *= reach / (k + 1)
        if k > 60:
            break
    return k


def zeta_on_shifts(points, shifts, params: EvalParams = DEFAULT_PARAMS) -> np.ndarray:
    """zeta(p + i*u) for every point p and every shift u.

    Returns an array of shape ``(len(shifts), len(points))``.  The Dirichlet
    part is expanded in a Taylor series around the centre of ``points`` so one
    pass over n serves the whole point set; the Euler-Maclaurin correction is
    evaluated per point.  All shifts share the cutoff of the highest one, so
    results depend on the composition of ``shifts``; callers that need
    reproducible tables pass fixed blocks.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    us = np.asarray(shifts, dtype=float).ravel()
    if us.size == 0:
        return np.zeros((0, pts.size), dtype=complex)
    full = pts[None, :] + 1j * us[:, None]
    _validate_points(full)
    lo_s, hi_s = pts.real.min(), pts.real.max()
    lo_t, hi_t = pts.imag.min(), pts.imag.max()
    centre = complex(0.5 * (lo_s + hi_s), 0.5 * (lo_t + hi_t))
    offsets = pts - centre
    radius = float(np.abs(offsets).max()) if pts.size else 0.0
    t_top = float(np.max(np.abs(full.imag)))
    N = params.cutoff(t_top)
    ln = _logs(N - 1)
    K = _taylor_order(radius * ln[-1])
    if K + 1 >= pts.size:
        return zeta_many(full, params)

    base = np.exp(-centre * ln)
    coeffs = np.empty((K + 1, ln.size), dtype=complex)
    coeffs[0] = base
    for k in range(1, K + 1):
        coeffs[k] = coeffs[k - 1] * (-ln) / k
    stacked = np.vstack([coeffs.real, coeffs.imag])

    out = np.empty((us.size, pts.size), dtype=complex)
    cols = max(1, _BLOCK_ENTRIES // ln.size)
    for lo in range(0, us.size, cols):
        u = us[lo : lo + cols]
        phase = np.outer(ln, u)
        c, s_ = np.cos(phase), np.sin(phase)
        mc, ms = stacked @ c, stacked @ s_
        moments = (mc[: K + 1] + ms[K + 1 :]) + 1j * (mc[K + 1 :] - ms[: K + 1])
        # Horner in the offset for every (shift, point)
        acc = np.broadcast_to(moments[K][:, None], (u.size, pts.size)).astype(complex)
        for k in range(K - 1, -1, -1):
            acc = acc * offsets[None, :] + moments[k][:, None]
        out[lo : lo + cols] = acc

    tail, _, est = _em_tail(full.ravel(), N, params.bernoulli_order_M, deriv=False)
    if np.any(est > params.target_abs_err):
        raise AccuracyUnreachable("Euler-Maclaurin remainder above target for shifted grid")
    return out + tail.reshape(out.shape)


# ---------------------------------------------------------------------------
# branch-tracked logarithm

LOG_START_SIGMA = 10.0
LOG_STEP = 0.05
GUARD_RADIUS = 1e-3
MIN_MODULUS = 1e-6
# For sigma >= 1.75, |zeta(s) - 1| <= zeta(sigma) - 1 < 1, so the continued
# branch equals the principal logarithm there and tracking can begin at 2.
_PRINCIPAL_FROM = 2.0


def _path_nodes(sigma: float) -> list[float]:
    if sigma >= _PRINCIPAL_FROM:
        return [sigma]
    k0 = round((LOG_START_SIGMA - _PRINCIPAL_FROM) / LOG_STEP)
    nodes = []
    k = k0
    while True:
        x = LOG_START_SIGMA - LOG_STEP * k
        if x <= sigma + 1e-12:
            break
        nodes.append(x)
        k += 1
    nodes.append(sigma)
    return nodes


def _log_zeta_core(points: np.ndarray, params: EvalParams):
    """Return (values, failure messages) for an array of points."""
    pts = np.asarray(points, dtype=complex).ravel()
    if np.any(pts.real <= 0.4):
        raise ValueError("log_zeta requires Re s > 0.4")
    # on the real axis left of 1 the path would run into the pole
    through_pole = (pts.imag == 0) & (pts.real <= 1.0)
    paths = [[] if hit else _path_nodes(float(p.real)) for p, hit in zip(pts, through_pole)]
    flat = np.array(
        [complex(x, p.imag) for p, nodes in zip(pts, paths) for x in nodes], dtype=complex
    )
    vals, dvals = zeta_with_derivative(flat, params)
    out = np.full(pts.size, np.nan + 1j * np.nan)
    failures: list[str | None] = [None] * pts.size
    pos = 0
    for i, nodes in enumerate(paths):
        if through_pole[i]:
            failures[i] = f"continuation path to {pts[i]} crosses the pole at s = 1"
            continue
        v = vals[pos : pos + len(nodes)]
        dv = dvals[pos : pos + len(nodes)]
        pos += len(nodes)
        mods = np.abs(v)
        if mods.min() < MIN_MODULUS:
            failures[i] = f"|zeta| < {MIN_MODULUS:g} on continuation path to {pts[i]}"
            continue
        strip = np.array(nodes) < 1.0
        if np.any(strip):
            dist = mods[strip] / np.maximum(np.abs(dv[strip]), 1e-300)
            if dist.min() < GUARD_RADIUS:
                failures[i] = f"continuation path to {pts[i]} passes within guard radius of a zero"
                continue
        inc = np.angle(v[1:] / v[:-1])
        if inc.size and np.abs(inc).max() > math.pi / 2:
            failures[i] = f"argument jump above pi/2 on path to {pts[i]}"
            continue
        out[i] = complex(math.log(mods[-1]), float(np.angle(v[0]) + inc.sum()))
    return out, failures


def log_zeta_many(points, params: EvalParams = DEFAULT_PARAMS, *, strict: bool = True) -> np.ndarray:
    """Branch-tracked log zeta on an array of points.

    With ``strict=False`` obstructed points come back as NaN instead of
    raising ``BranchObstruction``.
    """
    pts = np.asarray(points, dtype=complex)
    out, failures = _log_zeta_core(pts, params)
    if strict:
        for msg in failures:
            if msg is not None:
                raise BranchObstruction(msg)
    return out.reshape(pts.shape)


def log_zeta(s: complex, params: EvalParams = DEFAULT_PARAMS) -> complex:
    """log zeta(s), continued horizontally from Re s = 10 in steps of 0.05."""
    return complex(log_zeta_many(np.array([s], dtype=complex), params)[0])


# ---------------------------------------------------------------------------
# argument principle

_START_DENSITY = 8
_MAX_REFINEMENTS = 12
_NEAR_ZERO = 1e-6
_PERTURB = 1e-4


class _SuspectBoundary(Exception):
    pass


def _contour(region: RectRegion, density: int) -> np.ndarray:
    def edge(a: complex, b: complex) -> Iterable[complex]:
        n = max(2, math.ceil(abs(b - a) * density))
        return a + (b - a) * (np.arange(n) / n)

    c0 = complex(region.sigma_min, region.t_min)
    c1 = complex(region.sigma_max, region.t_min)
    c2 = complex(region.sigma_max, region.t_max)
    c3 = complex(region.sigma_min, region.t_max)
    return np.concatenate([edge(c0, c1), edge(c1, c2), edge(c2, c3), edge(c3, c0)])


def _winding(region: RectRegion, params: EvalParams) -> int:
    """Winding number of zeta around 0 along the boundary of ``region``.

    Sampling starts at 8 points per unit length; every segment whose argument
    increment is not below pi/2 is bisected, at most 12 times over.
    """
    pts = _contour(region, _START_DENSITY)
    vals = zeta_many(pts, params)
    for _ in range(_MAX_REFINEMENTS + 1):
        if np.abs(vals).min() < _NEAR_ZERO:
            raise _SuspectBoundary
        nxt = np.roll(pts, -1)
        inc = np.angle(np.roll(vals, -1) / vals)
        bad = np.abs(inc) >= math.pi / 2
        if not bad.any():
            turns = inc.sum() / (2 * math.pi)
            if abs(turns - round(turns)) < 0.1:
                return int(round(turns))
            bad[:] = True
        mids = 0.5 * (pts[bad] + nxt[bad])
        mid_vals = zeta_many(mids, params)
        where = np.flatnonzero(bad) + 1
        pts = np.insert(pts, where, mids)
        vals = np.insert(vals, where, mid_vals)
    raise _SuspectBoundary


def count_zeros(region: RectRegion, params: EvalParams = DEFAULT_PARAMS) -> int:
    """Number of zeros (with multiplicity) of zeta inside ``region``.

    A contour that runs through the pole or (numerically) through a zero is
    translated by +1e-4 in both coordinates and tried once more.
    """
    attempts = [region, region.translated(_PERTURB, _PERTURB)]
    for k, reg in enumerate(attempts):
        if reg.contains(1 + 0j, strict=True):
            raise PoleInRegion(f"s = 1 lies inside {reg}")
        if reg.near_boundary(1 + 0j, 1e-6):
            continue
        try:
            return _winding(reg, params)
        except _SuspectBoundary:
            continue
    raise ContourThroughZero(f"argument increments could not be resolved on {region}")
