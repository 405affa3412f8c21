"""Execute an experiment config and write its artifacts.

Each run writes ``result.json`` and ``result.csv`` (byte-identical for an
identical config, whatever the worker count), ``plot.svg`` when plotting is
enabled, and ``timings.json`` which is the only file allowed to vary.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from pathlib import Path
from typing import Any

import numpy as np

from ..diophantine import density_curve, hit_density, kronecker_scan
from ..selfapprox import DensityReport, density, pipeline_comparison, scan_remark_gap
from ..twisted_euler import bound_sweep
from ..zeta_kernel import count_zeros, zeta_many
from .cache import EvalCache
from .config import SCHEMA_VERSION, ExperimentConfig, build
from .plot import render

CSV_COLUMNS: dict[str, list[str]] = {
    "eval": ["sigma", "t", "re", "im", "abs"],
    "zeros": ["t_min", "t_max", "count"],
    "bound-sweep": [
        "sigma", "t", "z", "a", "b", "c", "abs_product", "log_bound", "log_margin",
        "tail_abs", "tail_bound", "target_gap", "leading_gap",
    ],
    "kronecker": ["tau", "max_dist"],
    "density": ["tau", "sup_diff", "accepted"],
    "pipeline": ["sample", "tau", "err_a", "err_b", "diff_zeta", "target_gap"],
    "remark-demo": [
        "tau", "sup_abs_zeta", "sup_ratio_minus_one", "sup_difference", "identity_residual", "exhibits_gap",
    ],
}


def _clean(x: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def _csv_text(columns: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# one function per kind: returns (result dict, csv rows)


def _run_eval(cfg, objs, workers, use_cache):
    params = cfg.eval_settings()
    pts = objs["points"]
    cache_hits = 0
    if use_cache:
        cache = EvalCache(params)
        values, cache_hits = cache.evaluate(pts)
    else:
        values = zeta_many(np.array(pts), params)
    rows = [(s.real, s.imag, v.real, v.imag, abs(v)) for s, v in zip(pts, values)]
    result = {
        "values": [{"sigma": s.real, "t": s.imag, "re": v.real, "im": v.imag} for s, v in zip(pts, values)],
    }
    return result, rows, {"cache_hits": cache_hits}


def _run_zeros(cfg, objs, workers, use_cache):
    params = cfg.eval_settings()
    region = objs["region"]
    pieces = region.split_t(objs["partition"]) if objs["partition"] > 1 else [region]
    counts = [count_zeros(r, params) for r in pieces]
    total = count_zeros(region, params)
    result = {
        "count": total,
        "pieces": [{"t_min": r.t_min, "t_max": r.t_max, "count": c} for r, c in zip(pieces, counts)],
        "additive": sum(counts) == total,
    }
    rows = [(r.t_min, r.t_max, c) for r, c in zip(pieces, counts)]
    return result, rows, {}


def _run_bound_sweep(cfg, objs, workers, use_cache):
    p = cfg.merged_params()
    sw = bound_sweep(
        n_tuples=int(p["n_tuples"]),
        seed=int(p["seed"]),
        sigma_range=tuple(map(float, p["sigma"])),
        t_max=float(p["t_max"]),
        z_values=tuple(float(z) for z in p["z_values"]),
        shifts=tuple(tuple(map(int, s)) for s in p["shifts"]),
    )
    margin = sw.log_margin
    result = {
        "tuples": len(sw),
        "bound_violations": sw.bound_violations,
        "tail_violations": sw.tail_violations,
        "step_violations": sw.step_violations,
        "weights_equal_all": bool(sw.weights_equal.all()),
        "max_target_gap": float(sw.target_gap.max()),
        "max_leading_gap": float(sw.leading_gap.max()),
        "min_log_margin": float(margin.min()),
        "log_margins": margin,
    }
    rows = zip(
        sw.sigma, sw.t, sw.z, sw.a, sw.b, sw.c, sw.abs_product, sw.log_bound, margin,
        sw.tail_abs, sw.tail_bound, sw.target_gap, sw.leading_gap,
    )
    return result, rows, {}


def _run_kronecker(cfg, objs, workers, use_cache):
    p = cfg.merged_params()
    q = objs["query"]
    hits = kronecker_scan(q)
    checkpoints = [float(x) for x in p["checkpoints"]] or [q.T * j / 10 for j in range(1, 11)]
    n_primes = q.primes().size
    result = {
        "hit_count": len(hits),
        "grid_size": hits.grid_size,
        "density": hit_density(hits),
        "heuristic_density": (2 * q.delta) ** n_primes,
        "primes": q.primes(),
        "first_hits": hits.taus[:20],
        "curve": [{"T": t, "density": d} for t, d in density_curve(hits, checkpoints)],
    }
    return result, zip(hits.taus, hits.max_dist), {}


def _density_result(rep: DensityReport, extra_eps) -> dict[str, Any]:
    return {
        "accepted_count": rep.accepted_count,
        "total_count": rep.total_count,
        "skipped_count": rep.skipped_count,
        "fraction": rep.fraction,
        "epsilon": rep.epsilon,
        "first_hits": list(rep.hits[:20]),
        "curve": [{"T": t, "fraction": f} for t, f in rep.curve],
        "by_epsilon": [
            {"epsilon": float(e), "fraction": rep.at_epsilon(float(e)).fraction} for e in extra_eps
        ],
    }


def _run_density(cfg, objs, workers, use_cache):
    p = cfg.merged_params()
    exp = objs["experiment"]
    rep = density(exp, cfg.eval_settings(), workers=workers)
    result = _density_result(rep, p["epsilons"])
    result["d"] = exp.d_value
    result["covered_by_theorem"] = exp.covered_by_theorem
    rows = ((t, s, (not np.isnan(s)) and s < exp.epsilon) for t, s in zip(rep.taus, rep.sups))
    return result, rows, {}


def _run_pipeline(cfg, objs, workers, use_cache):
    p = cfg.merged_params()
    cmp = pipeline_comparison(
        objs["shift"],
        z=float(p["z"]),
        delta=float(p["delta"]),
        K=objs["K"],
        T=float(p["T"]),
        step=float(p["step"]),
        n_hits=int(p["n_hits"]),
        n_random=int(p["n_random"]),
        seed=int(p["seed"]),
        params=cfg.eval_settings(),
    )

    def table(rs):
        return [
            {"tau": r.tau, "err_a": r.err_a, "err_b": r.err_b, "diff_zeta": r.diff_zeta, "target_gap": r.target_gap}
            for r in rs
        ]

    result = {
        "median_err_a_hits": cmp.median_err_a_hits,
        "median_err_a_random": cmp.median_err_a_random,
        "median_err_b_hits": float(np.median([r.err_b for r in cmp.hits])) if cmp.hits else None,
        "median_err_b_random": float(np.median([r.err_b for r in cmp.randoms])) if cmp.randoms else None,
        "hits_closer": cmp.hits_closer,
        "skipped_hits": cmp.skipped_hits,
        "skipped_random": cmp.skipped_randoms,
        "max_target_gap": max((r.target_gap for r in cmp.hits + cmp.randoms), default=0.0),
        "hits": table(cmp.hits),
        "random": table(cmp.randoms),
    }
    rows = [("hit", r.tau, r.err_a, r.err_b, r.diff_zeta, r.target_gap) for r in cmp.hits]
    rows += [("random", r.tau, r.err_a, r.err_b, r.diff_zeta, r.target_gap) for r in cmp.randoms]
    return result, rows, {}


def _run_remark(cfg, objs, workers, use_cache):
    p = cfg.merged_params()
    n = int(math.floor(float(p["tau_max"]) / float(p["tau_step"]) + 1e-9))
    taus = np.arange(0, n + 1) * float(p["tau_step"])
    scan = scan_remark_gap(objs["K"], float(p["d"]), taus, cfg.eval_settings())
    gaps = [t for t, g in scan if g.exhibits_gap]
    result = {
        "scanned": len(scan),
        "skipped": len(taus) - len(scan),
        "first_gap_tau": gaps[0] if gaps else None,
        "gap_count": len(gaps),
        "max_identity_residual": max((g.identity_residual for _, g in scan), default=0.0),
        "rows": [
            {"tau": t, "sup_abs_zeta": g.sup_abs_zeta, "sup_ratio_minus_one": g.sup_ratio_minus_one,
             "sup_difference": g.sup_difference}
            for t, g in scan
        ],
    }
    rows = [
        (t, g.sup_abs_zeta, g.sup_ratio_minus_one, g.sup_difference, g.identity_residual, g.exhibits_gap)
        for t, g in scan
    ]
    return result, rows, {}


RUNNERS = {
    "eval": _run_eval,
    "zeros": _run_zeros,
    "bound-sweep": _run_bound_sweep,
    "kronecker": _run_kronecker,
    "density": _run_density,
    "pipeline": _run_pipeline,
    "remark-demo": _run_remark,
}


def run(
    cfg: ExperimentConfig,
    out_dir: str | os.PathLike | None = None,
    workers: int | None = None,
    use_cache: bool = True,
) -> Path:
    """Run ``cfg`` and return the output directory."""
    out = Path(out_dir or cfg.out_dir or "lab-out")
    out.mkdir(parents=True, exist_ok=True)
    workers = workers or cfg.workers or os.cpu_count() or 1
    objs = build(cfg)
    start = time.perf_counter()
    result, rows, extra = RUNNERS[cfg.kind](cfg, objs, workers, use_cache)
    elapsed = time.perf_counter() - start

    doc = {"schema": SCHEMA_VERSION, "kind": cfg.kind, "config": cfg.reported(), "result": result}
    (out / "result.json").write_text(
        json.dumps(_clean(doc), indent=1, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8"
    )
    with open(out / "result.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(_csv_text(CSV_COLUMNS[cfg.kind], rows))
    if cfg.plot:
        render(out / "result.json", out / "plot.svg")
    timings = {"seconds": elapsed, "workers": workers, **extra}
    (out / "timings.json").write_text(json.dumps(timings, indent=1, sort_keys=True) + "\n")
    return out
