"""Experiment configuration: JSON documents with a ``kind`` discriminator."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from typing import Any

from ..errors import ConfigError
from ..selfapprox import CompactSetSpec, ShiftExperiment
from ..twisted_euler import RationalShift
from ..zeta_kernel import EvalParams, RectRegion

SCHEMA_VERSION = "v1"
KINDS = ("eval", "zeros", "bound-sweep", "kronecker", "density", "pipeline", "remark-demo")

DEFAULTS: dict[str, dict[str, Any]] = {
    "eval": {"points": []},
    "zeros": {"region": [0.0, 1.0, 0.0, 100.0], "partition": 1},
    "bound-sweep": {
        "n_tuples": 10000,
        "seed": 0,
        "sigma": [0.55, 0.95],
        "t_max": 50.0,
        "z_values": [10, 100, 1000, 10000],
        "shifts": [[3, 1], [5, 2], [7, 3]],
    },
    "kronecker": {"z": 10, "a": 3, "b": 1, "delta": 0.2, "T": 10000.0, "step": 0.01, "checkpoints": []},
    "density": {
        "target": "zeta",
        "d_mode": "rational",
        "a": 3,
        "b": 1,
        "d": None,
        "epsilon": 0.5,
        "epsilons": [],
        "T": 5000.0,
        "tau_step": 0.05,
        "K": {"shape": "disk", "center": [0.75, 0.0], "radius": 0.05, "grid_points": 25},
    },
    "pipeline": {
        "a": 3,
        "b": 1,
        "z": 20,
        "delta": 0.1,
        "T": 50000.0,
        "step": 0.01,
        "n_hits": 20,
        "n_random": 20,
        "seed": 0,
        "K": {"shape": "disk", "center": [0.8, 0.0], "radius": 0.03, "grid_points": 9},
    },
    "remark-demo": {
        "d": 3.0,
        "tau_max": 100.0,
        "tau_step": 0.5,
        "K": {"shape": "disk", "center": [0.75, 0.0], "radius": 0.05, "grid_points": 25},
    },
}


@dataclass
class ExperimentConfig:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    eval_params: dict[str, Any] = field(default_factory=dict)
    out_dir: str | None = None
    plot: bool = True
    workers: int | None = None
    schema: str = SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def merged_params(self) -> dict[str, Any]:
        merged = json.loads(json.dumps(DEFAULTS[self.kind]))
        merged.update(self.params)
        return merged

    def eval_settings(self) -> EvalParams:
        return EvalParams(**self.eval_params)

    def reported(self) -> dict[str, Any]:
        """The part of the config that determines results (no paths, no workers)."""
        return {
            "schema": self.schema,
            "kind": self.kind,
            "params": self.merged_params(),
            "eval_params": asdict(self.eval_settings()),
        }


_TOP_KEYS = {"kind", "params", "eval_params", "out_dir", "plot", "workers", "schema"}


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config document; errors carry a line number."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", 1)
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown top-level key {key!r}", _line_of(text, key))
    cfg = ExperimentConfig(
        kind=doc.get("kind", ""),
        params=doc.get("params") or {},
        eval_params=doc.get("eval_params") or {},
        out_dir=doc.get("out_dir"),
        plot=bool(doc.get("plot", True)),
        workers=doc.get("workers"),
        schema=doc.get("schema", SCHEMA_VERSION),
    )
    validate(cfg, text)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def validate(cfg: ExperimentConfig, text: str = "") -> None:
    """Build every downstream object once so invalid input fails before running."""

    def fail(key: str, msg: str) -> None:
        raise ConfigError(f"{key}: {msg}", _line_of(text, key))

    if cfg.schema != SCHEMA_VERSION:
        fail("schema", f"unsupported schema {cfg.schema!r}, expected {SCHEMA_VERSION!r}")
    if cfg.kind not in KINDS:
        fail("kind", f"unknown kind {cfg.kind!r}; expected one of {', '.join(KINDS)}")
    if cfg.workers is not None and (not isinstance(cfg.workers, int) or cfg.workers < 1):
        fail("workers", "must be a positive integer")
    unknown = set(cfg.params) - set(DEFAULTS[cfg.kind])
    if unknown:
        key = sorted(unknown)[0]
        fail(key, f"not a parameter of kind {cfg.kind!r}")
    try:
        cfg.eval_settings()
    except (TypeError, ValueError) as exc:
        fail("eval_params", str(exc))
    try:
        build(cfg)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        key = getattr(exc, "config_key", None) or _guess_key(str(exc), cfg) or "params"
        fail(key, str(exc))


def _guess_key(message: str, cfg: ExperimentConfig) -> str | None:
    # keys the user wrote win over defaults so the reported line exists
    for pool in (cfg.params, cfg.merged_params()):
        for key in sorted(pool, key=len, reverse=True):
            if re.search(r"(?<![\w])%s(?![\w])" % re.escape(key), message):
                return key
    return None


def compact_set(spec: dict[str, Any]) -> CompactSetSpec:
    shape = spec.get("shape")
    n = spec.get("grid_points")
    if shape == "disk":
        c = spec["center"]
        K = CompactSetSpec.disk(complex(c[0], c[1]), float(spec["radius"]), n)
    elif shape == "rect":
        K = CompactSetSpec.rectangle(RectRegion(*map(float, spec["region"])), n)
    else:
        raise ValueError(f"K: unknown shape {shape!r}")
    K.check_strip()
    return K


def build(cfg: ExperimentConfig) -> dict[str, Any]:
    """Typed objects for the configured experiment."""
    p = cfg.merged_params()
    kind = cfg.kind
    if kind == "eval":
        pts = [complex(float(x), float(y)) for x, y in p["points"]]
        if not pts:
            raise ValueError("points: at least one [sigma, t] pair required")
        return {"points": pts}
    if kind == "zeros":
        region = RectRegion(*map(float, p["region"]))
        if int(p["partition"]) < 1:
            raise ValueError("partition must be >= 1")
        return {"region": region, "partition": int(p["partition"])}
    if kind == "bound-sweep":
        lo, hi = map(float, p["sigma"])
        if not 0.5 < lo <= hi:
            raise ValueError("sigma: range must lie above 1/2")
        shifts = [RationalShift(int(a), int(b)) for a, b in p["shifts"]]
        if any(s.modulus == 0 for s in shifts):
            raise ValueError("shifts: a = b is degenerate")
        if int(p["n_tuples"]) < 1 or not p["z_values"]:
            raise ValueError("n_tuples and z_values must be non-empty")
        return {"shifts": shifts}
    if kind == "kronecker":
        from ..diophantine import KroneckerQuery

        q = KroneckerQuery(
            z=float(p["z"]),
            shift=RationalShift(int(p["a"]), int(p["b"])),
            delta=float(p["delta"]),
            T=float(p["T"]),
            step=float(p["step"]),
        )
        return {"query": q}
    if kind == "density":
        shift = None
        if p["d_mode"] == "rational":
            shift = RationalShift(int(p["a"]), int(p["b"]))
        exp = ShiftExperiment(
            target=p["target"],
            d_mode=p["d_mode"],
            epsilon=float(p["epsilon"]),
            T=float(p["T"]),
            tau_step=float(p["tau_step"]),
            K=compact_set(p["K"]),
            shift=shift,
            d=None if p["d"] is None else float(p["d"]),
        )
        if any(float(e) <= 0 for e in p["epsilons"]):
            raise ValueError("epsilons must be positive")
        return {"experiment": exp}
    if kind == "pipeline":
        from ..diophantine import KroneckerQuery

        shift = RationalShift(int(p["a"]), int(p["b"]))
        KroneckerQuery(z=float(p["z"]), shift=shift, delta=float(p["delta"]), T=float(p["T"]), step=float(p["step"]))
        return {"shift": shift, "K": compact_set(p["K"])}
    if kind == "remark-demo":
        if not float(p["tau_step"]) > 0 or not float(p["tau_max"]) >= 0:
            raise ValueError("tau_step must be positive and tau_max non-negative")
        return {"K": compact_set(p["K"])}
    raise ValueError(f"unknown kind {kind!r}")
