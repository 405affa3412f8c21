"""Deterministic SVG plots of result documents.

Fixed 800x600 canvas; each axis spans the data range padded by 5% on both
sides.  No timestamps or random ids, so equal input gives equal bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from ..errors import MalformedResult

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 80, 30, 50, 70
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

REQUIRED = {
    "eval": ("values",),
    "zeros": ("count", "pieces"),
    "bound-sweep": ("log_margins", "bound_violations"),
    "kronecker": ("hit_count", "curve"),
    "density": ("fraction", "curve", "accepted_count"),
    "pipeline": ("hits", "random"),
    "remark-demo": ("rows",),
}


def _bounds(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        pad = abs(lo) * 0.05 or 0.5
    else:
        pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _num(x: float) -> str:
    return f"{x:.2f}"


class _Figure:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.series: list[tuple[str, str, list[float], list[float]]] = []
        self.notes: list[str] = []
        self.hlines: list[float] = []

    def add(self, style: str, label: str, xs, ys) -> None:
        pairs = [(float(x), float(y)) for x, y in zip(xs, ys) if x is not None and y is not None]
        self.series.append((style, label, [p[0] for p in pairs], [p[1] for p in pairs]))

    def svg(self) -> str:
        xs = [x for _, _, sx, _ in self.series for x in sx]
        ys = [y for _, _, _, sy in self.series for y in sy] + self.hlines
        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" font-family="sans-serif" '
            f'font-size="16">{escape(self.title)}</text>',
        ]
        pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
        out.append(
            f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
        )
        out.append(
            f'<text x="{LEFT + pw // 2}" y="{HEIGHT - 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{escape(self.xlabel)}</text>'
        )
        out.append(
            f'<text x="20" y="{TOP + ph // 2}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="13" transform="rotate(-90 20 {TOP + ph // 2})">{escape(self.ylabel)}</text>'
        )
        if xs and ys:
            x0, x1 = _bounds(xs)
            y0, y1 = _bounds(ys)

            def px(x: float) -> float:
                return LEFT + (x - x0) / (x1 - x0) * pw

            def py(y: float) -> float:
                return TOP + ph - (y - y0) / (y1 - y0) * ph

            for i in range(5):
                xv = x0 + (x1 - x0) * i / 4
                yv = y0 + (y1 - y0) * i / 4
                out.append(
                    f'<text x="{_num(px(xv))}" y="{TOP + ph + 18}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="11">{xv:.4g}</text>'
                )
                out.append(
                    f'<text x="{LEFT - 6}" y="{_num(py(yv) + 4)}" text-anchor="end" '
                    f'font-family="sans-serif" font-size="11">{yv:.4g}</text>'
                )
            for h in self.hlines:
                out.append(
                    f'<line x1="{LEFT}" y1="{_num(py(h))}" x2="{LEFT + pw}" y2="{_num(py(h))}" '
                    'stroke="gray" stroke-dasharray="4 4"/>'
                )
            for k, (style, label, sx, sy) in enumerate(self.series):
                color = COLORS[k % len(COLORS)]
                if style == "line" and len(sx) > 1:
                    pts = " ".join(f"{_num(px(x))},{_num(py(y))}" for x, y in zip(sx, sy))
                    out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
                else:
                    for x, y in zip(sx, sy):
                        out.append(f'<circle cx="{_num(px(x))}" cy="{_num(py(y))}" r="2" fill="{color}"/>')
                out.append(
                    f'<text x="{LEFT + pw - 10}" y="{TOP + 18 + 16 * k}" text-anchor="end" '
                    f'font-family="sans-serif" font-size="12" fill="{color}">{escape(label)}</text>'
                )
        for k, note in enumerate(self.notes):
            out.append(
                f'<text x="{LEFT + pw // 2}" y="{TOP + ph // 2 + 20 * k}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="20" fill="gray">{escape(note)}</text>'
            )
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _figure(kind: str, res: dict) -> _Figure:
    if kind == "density":
        fig = _Figure("self-approximation density", "T", "fraction accepted")
        fig.add("line", "fraction vs T", [c["T"] for c in res["curve"]], [c["fraction"] for c in res["curve"]])
        if res["accepted_count"] == 0:
            fig.notes.append("no hits")
        return fig
    if kind == "kronecker":
        fig = _Figure("simultaneous approximation density", "T", "hit density")
        fig.add("line", "density vs T", [c["T"] for c in res["curve"]], [c["density"] for c in res["curve"]])
        if res["hit_count"] == 0:
            fig.notes.append("no hits")
        return fig
    if kind == "bound-sweep":
        fig = _Figure("product bound margin", "tuple", "log(bound / |zeta_z|)")
        m = res["log_margins"]
        fig.add("points", "margin", range(len(m)), m)
        fig.hlines.append(0.0)
        return fig
    if kind == "pipeline":
        fig = _Figure("truncated-product approximation error", "tau", "err_a")
        fig.add("points", "Kronecker hits", [r["tau"] for r in res["hits"]], [r["err_a"] for r in res["hits"]])
        fig.add("points", "random tau", [r["tau"] for r in res["random"]], [r["err_a"] for r in res["random"]])
        return fig
    if kind == "remark-demo":
        fig = _Figure("ratio versus difference", "tau", "grid sup")
        rows = res["rows"]
        t = [r["tau"] for r in rows]
        fig.add("line", "|f1 - f2|", t, [r["sup_difference"] for r in rows])
        fig.add("line", "|f2/f1 - 1|", t, [r["sup_ratio_minus_one"] for r in rows])
        fig.add("line", "|f1|", t, [r["sup_abs_zeta"] for r in rows])
        return fig
    if kind == "eval":
        fig = _Figure("zeta evaluations", "t", "|zeta(s)|")
        vals = res["values"]
        fig.add("points", "|zeta|", [v["t"] for v in vals], [math.hypot(v["re"], v["im"]) for v in vals])
        return fig
    fig = _Figure("zeros per piece", "t", "zeros")
    pieces = res["pieces"]
    fig.add("points", "count", [0.5 * (p["t_min"] + p["t_max"]) for p in pieces], [p["count"] for p in pieces])
    return fig


def render(result_path, out_path) -> Path:
    """Write the SVG for a result document; raises MalformedResult on schema mismatch."""
    try:
        doc = json.loads(Path(result_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedResult(f"cannot read result document: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != "v1":
        raise MalformedResult("result document lacks schema v1")
    kind = doc.get("kind")
    res = doc.get("result")
    if kind not in REQUIRED or not isinstance(res, dict):
        raise MalformedResult(f"unknown kind {kind!r} or missing result")
    missing = [k for k in REQUIRED[kind] if k not in res]
    if missing:
        raise MalformedResult(f"{kind} result lacks {', '.join(missing)}")
    try:
        svg = _figure(kind, res).svg()
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResult(f"malformed {kind} result: {exc}") from exc
    out = Path(out_path)
    out.write_text(svg, encoding="utf-8")
    return out
