"""Self-approximation experiments for zeta and log zeta.

A compact set K inside the strip 1/2 < Re s < 1 is replaced by a finite grid,
so every sup-norm reported here is a lower bound for the true sup over K.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .diophantine import KroneckerQuery, kronecker_scan
from .errors import BranchObstruction, DivisionNearZero, SetOutsideStrip, SkippedTau
from .twisted_euler import RationalShift, Truncation, log_truncated_product, truncated_product
from .zeta_kernel import (
    DEFAULT_PARAMS,
    EvalParams,
    RectRegion,
    log_zeta_many,
    zeta_many,
    zeta_on_shifts,
)

__all__ = [
    "CompactSetSpec",
    "ShiftExperiment",
    "DensityReport",
    "GapDemo",
    "PipelineResult",
    "PipelineComparison",
    "sample_grid",
    "sup_norm_diff",
    "density",
    "remark_gap_demo",
    "scan_remark_gap",
    "proof_pipeline",
    "pipeline_comparison",
]

TARGETS = ("zeta", "log_zeta")
D_MODES = ("rational", "real", "bagchi")

# tau values evaluated together; fixed so tables never depend on worker count
BLOCK = 128
CURVE_POINTS = 10


@dataclass(frozen=True)
class CompactSetSpec:
    """A disk or rectangle plus the number of sample points.

    Build with :meth:`disk` or :meth:`rectangle`.
    """

    shape: str
    grid_points: int
    center: complex = 0j
    radius: float = 0.0
    region: RectRegion | None = None

    def __post_init__(self) -> None:
        if self.shape not in ("disk", "rect"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if int(self.grid_points) != self.grid_points or self.grid_points < 1:
            raise ValueError("grid_points must be a positive integer")
        if self.shape == "disk" and not self.radius >= 0:
            raise ValueError("radius must be non-negative")
        if self.shape == "rect" and self.region is None:
            raise ValueError("rectangle needs a region")

    @classmethod
    def disk(cls, center: complex, radius: float, grid_points: int) -> "CompactSetSpec":
        return cls("disk", int(grid_points), center=complex(center), radius=float(radius))

    @classmethod
    def rectangle(cls, region: RectRegion, grid_points: int) -> "CompactSetSpec":
        return cls("rect", int(grid_points), region=region)

    def real_extent(self) -> tuple[float, float]:
        if self.shape == "disk":
            return self.center.real - self.radius, self.center.real + self.radius
        return self.region.sigma_min, self.region.sigma_max

    def check_strip(self) -> None:
        lo, hi = self.real_extent()
        if not (0.5 < lo and hi < 1.0):
            raise SetOutsideStrip(f"real parts [{lo:g}, {hi:g}] not inside (1/2, 1)")

    def symmetric_about_real_axis(self) -> bool:
        if self.shape == "disk":
            return self.center.imag == 0
        return self.region.t_min == -self.region.t_max


def _disk_grid(center: complex, radius: float, n: int) -> np.ndarray:
    # centre plus R rings with 8j points on ring j; leftovers go on the rim
    if n == 1 or radius == 0:
        return np.array([center])
    rings = 1
    while 1 + 4 * (rings + 1) * (rings + 2) <= n:
        rings += 1
    pts = [center]
    for j in range(1, rings + 1):
        count = 8 * j
        if j == rings:
            count += n - (1 + 4 * rings * (rings + 1))
        ang = 2 * np.pi * np.arange(count) / count
        pts.extend(center + radius * (j / rings) * np.exp(1j * ang))
    return np.array(pts, dtype=complex)


def sample_grid(K: CompactSetSpec) -> np.ndarray:
    """Deterministic sample points of K, boundary included.

    Disks use the centre and concentric rings (8, 16, 24, ... points), so the
    9-, 25- and 81-point grids are nested.  Rectangles use a k x k lattice with
    k = max(2, ceil(sqrt(grid_points))) including the corners.
    """
    K.check_strip()
    if K.shape == "disk":
        return _disk_grid(K.center, K.radius, K.grid_points)
    r = K.region
    if K.grid_points == 1:
        return np.array([complex(0.5 * (r.sigma_min + r.sigma_max), 0.5 * (r.t_min + r.t_max))])
    k = max(2, math.ceil(math.sqrt(K.grid_points)))
    sig = np.linspace(r.sigma_min, r.sigma_max, k)
    ts = np.linspace(r.t_min, r.t_max, k)
    return (sig[None, :] + 1j * ts[:, None]).ravel()


def _check_target(target: str) -> None:
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")


def _log_values(points: np.ndarray, params: EvalParams) -> np.ndarray:
    try:
        return log_zeta_many(points, params)
    except BranchObstruction as exc:
        raise SkippedTau(str(exc)) from exc


def sup_norm_diff(
    target: str, K: CompactSetSpec, tau: float, d: float, params: EvalParams = DEFAULT_PARAMS
) -> float:
    """max over the grid of |f(s + i tau) - f(s + i d tau)|, f = zeta or log zeta."""
    _check_target(target)
    grid = sample_grid(K)
    first = grid + 1j * tau
    second = grid + 1j * (d * tau)
    if target == "zeta":
        f1 = zeta_many(first, params)
        f2 = f1 if d == 1 else zeta_many(second, params)
    else:
        f1 = _log_values(first, params)
        f2 = f1 if d == 1 else _log_values(second, params)
    return float(np.max(np.abs(f1 - f2)))


@dataclass(frozen=True)
class ShiftExperiment:
    target: str
    d_mode: str
    epsilon: float
    T: float
    tau_step: float
    K: CompactSetSpec
    shift: RationalShift | None = None
    d: float | None = None

    def __post_init__(self) -> None:
        _check_target(self.target)
        if self.d_mode not in D_MODES:
            raise ValueError(f"d_mode must be one of {D_MODES}")
        if self.d_mode == "rational" and self.shift is None:
            raise ValueError("rational mode needs a shift a/b")
        if self.d_mode == "real" and self.d is None:
            raise ValueError("real mode needs d")
        if not (self.epsilon > 0 and self.tau_step > 0):
            raise ValueError("epsilon and tau_step must be positive")
        if self.T < 100 * self.tau_step:
            raise ValueError("T must be at least 100 * tau_step")

    @property
    def d_value(self) -> float:
        if self.d_mode == "bagchi":
            return 0.0
        if self.d_mode == "rational":
            return self.shift.d
        return float(self.d)

    @property
    def covered_by_theorem(self) -> bool:
        """Whether a zeta experiment falls under the rational-shift result.

        log zeta experiments are covered for every real d != 0.
        """
        if self.d_mode == "bagchi":
            return False
        if self.target == "log_zeta":
            return self.d_value != 0
        return self.d_mode == "rational" and self.shift.covered_by_theorem

    def taus(self) -> np.ndarray:
        n = int(math.floor(self.T / self.tau_step + 1e-9))
        return np.arange(1, n + 1, dtype=float) * self.tau_step


@dataclass(frozen=True)
class DensityReport:
    accepted_count: int
    total_count: int
    skipped_count: int
    fraction: float
    hits: tuple[float, ...]
    epsilon: float
    taus: np.ndarray = field(repr=False)
    sups: np.ndarray = field(repr=False)
    curve: tuple[tuple[float, float], ...] = ()

    @classmethod
    def from_sups(cls, taus: np.ndarray, sups: np.ndarray, epsilon: float) -> "DensityReport":
        skipped = np.isnan(sups)
        accepted = ~skipped & (sups < epsilon)
        total = int(taus.size)
        n_skip = int(skipped.sum())
        n_acc = int(accepted.sum())
        denom = total - n_skip
        curve = []
        for j in range(1, CURVE_POINTS + 1):
            upto = (total * j) // CURVE_POINTS
            if upto == 0:
                continue
            den = upto - int(skipped[:upto].sum())
            frac = int(accepted[:upto].sum()) / den if den else 0.0
            curve.append((float(taus[upto - 1]), frac))
        return cls(
            accepted_count=n_acc,
            total_count=total,
            skipped_count=n_skip,
            fraction=n_acc / denom if denom else 0.0,
            hits=tuple(float(t) for t in taus[accepted]),
            epsilon=float(epsilon),
            taus=taus,
            sups=sups,
            curve=tuple(curve),
        )

    def at_epsilon(self, epsilon: float) -> "DensityReport":
        """Same scan re-thresholded at another epsilon."""
        return DensityReport.from_sups(self.taus, self.sups, epsilon)


def _block_sups(exp: ShiftExperiment, taus: np.ndarray, params: EvalParams) -> np.ndarray:
    grid = sample_grid(exp.K)
    d = exp.d_value
    if exp.target == "zeta":
        f1 = zeta_on_shifts(grid, taus, params)
        if d == 1:
            f2 = f1
        elif d == 0:
            f2 = zeta_many(grid, params)[None, :]
        else:
            f2 = zeta_on_shifts(grid, d * taus, params)
        return np.abs(f1 - f2).max(axis=1)

    out = np.full(taus.size, np.nan)
    base = _log_values(grid, params) if d == 0 else None
    for i, tau in enumerate(taus):
        try:
            f1 = _log_values(grid + 1j * tau, params)
            if d == 1:
                f2 = f1
            elif d == 0:
                f2 = base
            else:
                f2 = _log_values(grid + 1j * (d * tau), params)
        except SkippedTau:
            continue
        out[i] = np.abs(f1 - f2).max()
    return out


def _run_blocks(args) -> list[np.ndarray]:
    exp, params, blocks = args
    return [_block_sups(exp, b, params) for b in blocks]


def density(
    exp: ShiftExperiment, params: EvalParams = DEFAULT_PARAMS, workers: int = 1
) -> DensityReport:
    """Fraction of tau in {step, 2 step, ..., T} with sup-norm difference < epsilon.

    tau is split into fixed blocks of 128 and blocks are handed to workers in
    contiguous runs; the merge is in tau order, so the report does not depend
    on ``workers``.
    """
    sample_grid(exp.K)  # raises SetOutsideStrip early
    if not exp.covered_by_theorem:
        warnings.warn(
            f"experiment d={exp.d_value:g} ({exp.d_mode}, {exp.target}) is outside the proven cases",
            stacklevel=2,
        )
    taus = exp.taus()
    blocks = [taus[i : i + BLOCK] for i in range(0, taus.size, BLOCK)]
    if workers > 1 and len(blocks) > 1:
        per = math.ceil(len(blocks) / workers)
        jobs = [(exp, params, blocks[i : i + per]) for i in range(0, len(blocks), per)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = [s for chunk in pool.map(_run_blocks, jobs) for s in chunk]
    else:
        parts = _run_blocks((exp, params, blocks))
    sups = np.concatenate(parts) if parts else np.zeros(0)
    return DensityReport.from_sups(taus, sups, exp.epsilon)


@dataclass(frozen=True)
class GapDemo:
    sup_abs_zeta: float
    sup_ratio_minus_one: float
    sup_difference: float
    identity_residual: float

    @property
    def exhibits_gap(self) -> bool:
        """|zeta| exceeds 1 somewhere and the difference beats the ratio term."""
        return self.sup_abs_zeta > 1 and self.sup_difference > self.sup_ratio_minus_one


def remark_gap_demo(
    K: CompactSetSpec, tau: float, d: float, params: EvalParams = DEFAULT_PARAMS
) -> GapDemo:
    """Compare the ratio |zeta(s+i d tau)/zeta(s+i tau) - 1| with the plain difference.

    ``identity_residual`` is the largest pointwise violation of
    |f1 - f2| = |f1| * |f2/f1 - 1| on the grid.
    """
    grid = sample_grid(K)
    f1 = zeta_many(grid + 1j * tau, params)
    f2 = zeta_many(grid + 1j * (d * tau), params)
    mod1 = np.abs(f1)
    if mod1.min() < 1e-10:
        raise DivisionNearZero(f"|zeta(s + i tau)| < 1e-10 on the grid at tau={tau}")
    ratio = np.abs((f2 - f1) / f1)  # f2/f1 - 1 without the cancellation
    diff = np.abs(f1 - f2)
    return GapDemo(
        sup_abs_zeta=float(mod1.max()),
        sup_ratio_minus_one=float(ratio.max()),
        sup_difference=float(diff.max()),
        identity_residual=float(np.max(np.abs(diff - mod1 * ratio))),
    )


def scan_remark_gap(
    K: CompactSetSpec, d: float, taus, params: EvalParams = DEFAULT_PARAMS
) -> list[tuple[float, GapDemo]]:
    """``remark_gap_demo`` along a list of tau; obstructed tau are left out."""
    rows = []
    for tau in taus:
        try:
            rows.append((float(tau), remark_gap_demo(K, float(tau), d, params)))
        except DivisionNearZero:
            continue
    return rows


@dataclass(frozen=True)
class PipelineResult:
    tau: float
    err_a: float
    err_b: float
    diff_zeta: float
    target_gap: float


def proof_pipeline(
    tau: float,
    trunc: Truncation,
    shift: RationalShift,
    K: CompactSetSpec,
    params: EvalParams = DEFAULT_PARAMS,
) -> PipelineResult:
    """Distances between log zeta at heights a tau, b tau and the twisted targets.

    err_c is the grid sup of |log zeta(s + i c tau) - log zeta_z(s, omega^{-c})|
    for c = a, b.  The two targets are identical because omega^{a-b} = 1, which
    ``target_gap`` records.
    """
    grid = sample_grid(K)
    a, b = shift.a, shift.b
    log_a = _log_values(grid + 1j * (a * tau), params)
    log_b = _log_values(grid + 1j * (b * tau), params)
    target_a = log_truncated_product(grid, trunc, -a, shift)
    target_b = log_truncated_product(grid, trunc, -b, shift)
    gap = np.abs(truncated_product(grid, trunc, -a, shift) - truncated_product(grid, trunc, -b, shift))
    return PipelineResult(
        tau=float(tau),
        err_a=float(np.abs(log_a - target_a).max()),
        err_b=float(np.abs(log_b - target_b).max()),
        diff_zeta=float(np.abs(np.exp(log_a) - np.exp(log_b)).max()),
        target_gap=float(gap.max()),
    )


@dataclass(frozen=True)
class PipelineComparison:
    query: KroneckerQuery
    hits: tuple[PipelineResult, ...]
    randoms: tuple[PipelineResult, ...]
    skipped_hits: int
    skipped_randoms: int

    @property
    def median_err_a_hits(self) -> float:
        return float(np.median([r.err_a for r in self.hits])) if self.hits else math.nan

    @property
    def median_err_a_random(self) -> float:
        return float(np.median([r.err_a for r in self.randoms])) if self.randoms else math.nan

    @property
    def hits_closer(self) -> bool:
        return self.median_err_a_hits < self.median_err_a_random


def pipeline_comparison(
    shift: RationalShift,
    z: float,
    delta: float,
    K: CompactSetSpec,
    T: float,
    step: float = 0.01,
    n_hits: int = 20,
    n_random: int = 20,
    seed: int = 0,
    params: EvalParams = DEFAULT_PARAMS,
) -> PipelineComparison:
    """Run the pipeline on the first Kronecker hits and on uniform random tau in [0, T]."""
    query = KroneckerQuery(z=z, shift=shift, delta=delta, T=T, step=step)
    found = kronecker_scan(query)
    trunc = Truncation(z)
    rng = np.random.default_rng(seed)
    random_taus = rng.uniform(0.0, T, n_random)

    def run(taus):
        done, skipped = [], 0
        for tau in taus:
            try:
                done.append(proof_pipeline(float(tau), trunc, shift, K, params))
            except SkippedTau:
                skipped += 1
        return tuple(done), skipped

    hit_rows, hit_skips = run(found.taus[:n_hits])
    rnd_rows, rnd_skips = run(random_taus)
    return PipelineComparison(query, hit_rows, rnd_rows, hit_skips, rnd_skips)


def with_epsilon(exp: ShiftExperiment, epsilon: float) -> ShiftExperiment:
    return replace(exp, epsilon=epsilon)
