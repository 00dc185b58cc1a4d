"""Minimal hand-written SVG line plots.

Output depends only on the data (no timestamps, fixed number formatting), so
plots are byte-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

__all__ = ["Series", "line_plot"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass
class Series:
    name: str
    xs: Sequence[float]
    ys: Sequence[float]
    color: str | None = None
    markers: bool = False
    dashed: bool = False
    extra: dict = field(default_factory=dict)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, log: bool, count: int = 5) -> list[float]:
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, int(math.ceil((b - a) / count)))
        return [float(k) for k in range(a, b + 1, step) if lo <= k <= hi]
    span = hi - lo
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw)) if raw > 0 else 1.0
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * span:
        out.append(round(t, 12))
        t += step
    return out


def _tick_label(v: float, log: bool) -> str:
    if log:
        return f"1e{int(v)}"
    return f"{v:g}"


def line_plot(
    series: Sequence[Series],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
    width: int = 640,
    height: int = 480,
) -> str:
    """Render ``series`` as polylines; log axes plot ``log10`` of the data."""
    tx = (lambda v: math.log10(v)) if logx else float
    ty = (lambda v: math.log10(v)) if logy else float
    pts = []
    for s in series:
        pts.append([(tx(x), ty(y)) for x, y in zip(s.xs, s.ys)
                    if (not logx or x > 0) and (not logy or y > 0)])
    allx = [p[0] for ps in pts for p in ps]
    ally = [p[1] for ps in pts for p in ps]
    if not allx:
        allx, ally = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    padx, pady = 0.03 * (x1 - x0), 0.03 * (y1 - y0)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady
    ml, mr, mt, mb = 70, 150, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for t in _ticks(x0, x1, logx):
        out.append(f'<line x1="{_fmt(X(t))}" y1="{mt + ph}" x2="{_fmt(X(t))}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X(t))}" y="{mt + ph + 16}" text-anchor="middle">{_tick_label(t, logx)}</text>')
    for t in _ticks(y0, y1, logy):
        out.append(f'<line x1="{ml - 4}" y1="{_fmt(Y(t))}" x2="{ml}" y2="{_fmt(Y(t))}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{_fmt(Y(t) + 4)}" text-anchor="end">{_tick_label(t, logy)}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 15 {mt + ph / 2:.1f})">{escape(ylabel)}</text>')
    for k, (s, ps) in enumerate(zip(series, pts)):
        color = s.color or PALETTE[k % len(PALETTE)]
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        coords = " ".join(f"{_fmt(X(a))},{_fmt(Y(b))}" for a, b in ps)
        out.append(f'<polyline data-series="{escape(s.name)}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"{dash} points="{coords}"/>')
        if s.markers:
            for a, b in ps:
                out.append(f'<circle cx="{_fmt(X(a))}" cy="{_fmt(Y(b))}" r="2" fill="{color}"/>')
        ly = mt + 14 * (k + 1)
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{ml + pw + 34}" y="{ly}">{escape(s.name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
