"""Append-only binary cache of zeta values.

Layout: a 16-byte parameter fingerprint, then little-endian records of four
float64 values (sigma, t, re, im).  A file whose header does not match the
current fingerprint is ignored and never written to.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from ..zeta_kernel import EvalParams, zeta_many

RECORD = struct.Struct("<4d")
HEADER_SIZE = 16


def cache_dir() -> Path:
    env = os.environ.get("LAB_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "zetalab"


class EvalCache:
    def __init__(self, params: EvalParams, directory: Path | None = None):
        self.params = params
        self.fingerprint = params.fingerprint()
        self.path = (directory or cache_dir()) / f"zeta-{self.fingerprint.hex()}.bin"
        self.usable = True
        self._store: dict[tuple[float, float], complex] = {}
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        data = self.path.read_bytes()
        if data[:HEADER_SIZE] != self.fingerprint:
            self.usable = False
            return
        body = data[HEADER_SIZE:]
        body = body[: len(body) - len(body) % RECORD.size]
        for sigma, t, re, im in RECORD.iter_unpack(body):
            self._store[(sigma, t)] = complex(re, im)

    def __len__(self) -> int:
        return len(self._store)

    def get(self, s: complex) -> complex | None:
        return self._store.get((s.real, s.imag)) if self.usable else None

    def evaluate(self, points) -> tuple[np.ndarray, int]:
        """zeta at each point, from the cache where possible; returns (values, hits)."""
        pts = [complex(p) for p in points]
        out = np.empty(len(pts), dtype=complex)
        missing = []
        for i, s in enumerate(pts):
            v = self.get(s)
            if v is None:
                missing.append(i)
            else:
                out[i] = v
        if missing:
            fresh = zeta_many(np.array([pts[i] for i in missing]), self.params)
            out[missing] = fresh
            self._append([(pts[i], complex(v)) for i, v in zip(missing, fresh)])
        return out, len(pts) - len(missing)

    def _append(self, items: list[tuple[complex, complex]]) -> None:
        if not self.usable:
            return
        new = [(s, v) for s, v in items if (s.real, s.imag) not in self._store]
        if not new:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fresh_file = not self.path.exists()
        with open(self.path, "ab") as fh:
            if fresh_file:
                fh.write(self.fingerprint)
            for s, v in new:
                fh.write(RECORD.pack(s.real, s.imag, v.real, v.imag))
                self._store[(s.real, s.imag)] = v
