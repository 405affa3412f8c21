from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from zetalab.errors import SetOutsideStrip, SkippedTau
from zetalab.selfapprox import (
    CompactSetSpec,
    DensityReport,
    ShiftExperiment,
    density,
    pipeline_comparison,
    proof_pipeline,
    remark_gap_demo,
    sample_grid,
    scan_remark_gap,
    sup_norm_diff,
    with_epsilon,
)
from zetalab.twisted_euler import RationalShift, Truncation, truncated_product
from zetalab.zeta_kernel import RectRegion, zeta_with_derivative

DISK = CompactSetSpec.disk(0.75, 0.05, 25)


def _experiment(**kw) -> ShiftExperiment:
    base = dict(target="zeta", d_mode="rational", epsilon=0.5, T=50.0, tau_step=0.05, K=DISK,
                shift=RationalShift(3, 1))
    base.update(kw)
    return ShiftExperiment(**base)


def test_single_point_disk():
    assert sample_grid(CompactSetSpec.disk(0.75, 0.05, 1)).tolist() == [0.75]


def test_rectangle_lattice():
    g = sample_grid(CompactSetSpec.rectangle(RectRegion(0.6, 0.9, -0.1, 0.1), 9))
    assert g.size == 9
    for corner in (0.6 - 0.1j, 0.6 + 0.1j, 0.9 - 0.1j, 0.9 + 0.1j):
        assert np.min(np.abs(g - corner)) < 1e-15


def test_disk_outside_strip():
    with pytest.raises(SetOutsideStrip):
        sample_grid(CompactSetSpec.disk(0.55, 0.1, 9))


def test_rectangle_outside_strip():
    with pytest.raises(SetOutsideStrip):
        sample_grid(CompactSetSpec.rectangle(RectRegion(0.6, 1.0, 0, 1), 9))


@pytest.mark.parametrize("n", [9, 25, 81, 30])
def test_disk_grid_covers(n):
    K = CompactSetSpec.disk(0.75, 0.05, n)
    g = sample_grid(K)
    assert g.size == n
    assert np.max(np.abs(g - 0.75)) == pytest.approx(0.05)
    rng = np.random.default_rng(n)
    pts = 0.75 + 0.05 * np.sqrt(rng.uniform(0, 1, 5000)) * np.exp(2j * np.pi * rng.uniform(0, 1, 5000))
    fill = np.abs(pts[:, None] - g[None, :]).min(axis=1).max()
    assert fill <= 2 * 0.05 / math.sqrt(n)


def test_disk_grids_nested():
    small, mid, big = (sample_grid(CompactSetSpec.disk(0.75, 0.05, n)) for n in (9, 25, 81))
    assert all(np.min(np.abs(mid - p)) < 1e-15 for p in small)
    assert all(np.min(np.abs(big - p)) < 1e-15 for p in mid)


def test_sup_norm_trivial_cases():
    assert sup_norm_diff("zeta", DISK, 0.0, 3.0) == 0
    assert sup_norm_diff("zeta", DISK, 123.4, 1.0) == 0
    assert sup_norm_diff("log_zeta", DISK, 40.0, 1.0) == 0


def test_sup_norm_against_high_precision():
    mpmath.mp.dps = 30
    ref = max(
        abs(complex(mpmath.zeta(complex(s) + 50j) - mpmath.zeta(complex(s) + 150j))) for s in sample_grid(DISK)
    )
    assert abs(sup_norm_diff("zeta", DISK, 50.0, 3.0) - ref) < 1e-9


def test_sup_norm_grows_with_refinement():
    for tau in (17.0, 50.0, 333.3):
        vals = [sup_norm_diff("zeta", CompactSetSpec.disk(0.75, 0.05, n), tau, 3.0) for n in (1, 9, 25, 81)]
        assert vals == sorted(vals)


@pytest.mark.parametrize("tau", [3.3, 50.0, 812.5])
def test_sup_norm_reflection(tau):
    assert sup_norm_diff("zeta", DISK, -tau, 3.0) == pytest.approx(sup_norm_diff("zeta", DISK, tau, 3.0), abs=1e-12)


def test_experiment_validation():
    with pytest.raises(ValueError):
        _experiment(T=1.0)
    with pytest.raises(ValueError):
        _experiment(epsilon=0.0)
    with pytest.raises(ValueError):
        _experiment(shift=None)


def test_theorem_coverage_flags():
    assert _experiment().covered_by_theorem
    assert not _experiment(shift=RationalShift(2, 1)).covered_by_theorem
    assert not _experiment(d_mode="bagchi").covered_by_theorem
    assert _experiment(target="log_zeta", d_mode="real", d=math.sqrt(2), shift=None).covered_by_theorem


def test_density_identity_shift():
    with pytest.warns(UserWarning):
        rep = density(_experiment(d_mode="real", d=1.0, shift=None, epsilon=1e-9))
    assert rep.fraction == 1.0
    assert rep.total_count == 1000


def test_density_huge_epsilon():
    assert density(_experiment(epsilon=1e6)).fraction == 1.0


def test_density_monotone_in_epsilon():
    rep = density(_experiment(T=200.0))
    fracs = [rep.at_epsilon(e).fraction for e in (0.1, 0.25, 0.5, 1.0, 2.0)]
    assert fracs == sorted(fracs)
    assert density(with_epsilon(_experiment(T=200.0), 1.0)).fraction == fracs[3]


def test_density_worker_count_irrelevant():
    exp = _experiment(T=100.0)
    one, two = density(exp, workers=1), density(exp, workers=2)
    assert np.array_equal(one.sups, two.sups)
    assert one.hits == two.hits


def test_density_matches_direct_sup():
    exp = _experiment(T=20.0, tau_step=0.2)
    rep = density(exp)
    direct = [sup_norm_diff("zeta", DISK, t, 3.0) for t in rep.taus]
    assert np.max(np.abs(rep.sups - direct)) < 1e-10


def test_bagchi_small_shifts_accepted():
    with pytest.warns(UserWarning):
        rep = density(_experiment(d_mode="bagchi", shift=None, epsilon=1.0, T=20.0, tau_step=0.01))
    # |zeta(s + i tau) - zeta(s)| <= tau * max|zeta'| over the swept strip
    grid = sample_grid(DISK)
    _, dz = zeta_with_derivative(grid[None, :] + 1j * np.linspace(0, 0.2, 201)[:, None])
    safe = rep.taus[rep.taus < 1.0 / np.abs(dz).max()]
    assert safe.size > 0
    assert rep.hits[: safe.size] == tuple(safe)
    assert rep.fraction > 0


def test_log_target_counts_skips():
    exp = _experiment(target="log_zeta", T=30.0, tau_step=0.1, epsilon=1.0)
    rep = density(exp)
    assert rep.total_count == 300
    assert rep.fraction == rep.accepted_count / (rep.total_count - rep.skipped_count)


def test_report_from_sups():
    taus = np.arange(1, 11, dtype=float)
    sups = np.array([0.1, np.nan, 0.7, 0.2, np.nan, 0.9, 0.3, 0.4, 2.0, 0.05])
    rep = DensityReport.from_sups(taus, sups, 0.5)
    assert (rep.accepted_count, rep.skipped_count, rep.total_count) == (5, 2, 10)
    assert rep.fraction == 5 / 8
    assert rep.hits == (1.0, 4.0, 7.0, 8.0, 10.0)
    assert rep.curve[-1] == (10.0, 5 / 8)


def test_remark_identity_random():
    rng = np.random.default_rng(11)
    for _ in range(30):
        demo = remark_gap_demo(DISK, rng.uniform(0, 300), rng.uniform(-3, 5))
        assert demo.identity_residual < 1e-10


def test_remark_at_zero_shift():
    demo = remark_gap_demo(DISK, 0.0, 3.0)
    assert demo.sup_ratio_minus_one == 0 and demo.sup_difference == 0
    assert demo.sup_abs_zeta > 0


def test_remark_gap_found():
    scan = scan_remark_gap(DISK, 3.0, np.arange(0, 100.5, 0.5))
    assert any(g.exhibits_gap for _, g in scan)


def test_pipeline_targets_coincide():
    K = CompactSetSpec.disk(0.8, 0.03, 9)
    r = proof_pipeline(123.45, Truncation(20), RationalShift(3, 1), K)
    assert r.target_gap == 0
    grid = sample_grid(K)
    pa = truncated_product(grid, 20, -3, RationalShift(3, 1))
    pb = truncated_product(grid, 20, -1, RationalShift(3, 1))
    assert np.max(np.abs(pa - pb)) <= 1e-14


def test_pipeline_zero_shift_negative_control():
    # p^{-ic tau} = 1 at tau = 0 while the weights are not all 1
    r = proof_pipeline(0.0, Truncation(20), RationalShift(3, 1), CompactSetSpec.disk(0.8 + 0.1j, 0.03, 9))
    assert r.err_a > 0.5


def test_pipeline_real_axis_at_zero_shift_skipped():
    with pytest.raises(SkippedTau):
        proof_pipeline(0.0, Truncation(20), RationalShift(3, 1), CompactSetSpec.disk(0.8, 0.03, 9))


def test_pipeline_comparison_shape():
    cmp = pipeline_comparison(RationalShift(3, 1), z=10, delta=0.2, K=CompactSetSpec.disk(0.8, 0.03, 9),
                              T=500, n_hits=4, n_random=4, seed=1)
    assert len(cmp.hits) + cmp.skipped_hits == 4
    assert len(cmp.randoms) + cmp.skipped_randoms == 4
    assert all(r.target_gap == 0 for r in cmp.hits + cmp.randoms)
    assert all(0 <= r.tau <= 500 for r in cmp.randoms)
