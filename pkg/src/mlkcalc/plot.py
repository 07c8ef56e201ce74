"""Minimal deterministic SVG line plots.

Coordinates are written with two decimals inside a fixed 640x400 viewport,
so output size grows linearly with the point count and identical input gives
identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .funcmodel import SampledFn

__all__ = ["nice_ticks", "render_svg", "emit_plot"]

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 20, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _fmt(x):
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _tick_label(x):
    return f"{x:.6g}" if abs(x) > 1e-12 else "0"


def nice_ticks(lo, hi, target=6):
    """Tick positions at multiples of 1, 2 or 5 times a power of ten.

    Returns ``(ticks, lo, hi)`` with the range widened to whole ticks.

    >>> nice_ticks(0.0, 2.0)[0]
    [0.0, 0.5, 1.0, 1.5, 2.0]
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("cannot place ticks on a non-finite range")
    if hi - lo <= 1e-300:
        pad = max(abs(lo), 1.0)
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1.0, 2.0, 2.5, 5.0, 10.0) if m * mag >= raw * (1 - 1e-12))
    first = math.floor(lo / step + 1e-9)
    last = math.ceil(hi / step - 1e-9)
    ticks = [round(k * step, 12) + 0.0 for k in range(first, last + 1)]
    return ticks, ticks[0], ticks[-1]


def render_svg(series, labels=None, title=None) -> str:
    """SVG text for one or more :class:`SampledFn` on a common grid."""
    series = list(series)
    if not series:
        raise ValidationError("nothing to plot")
    grid = series[0].grid
    for s in series:
        if not isinstance(s, SampledFn):
            raise ValidationError("plot series must be SampledFn")
        if s.grid != grid:
            raise ValidationError("plot series must share one grid")
    labels = list(labels) if labels is not None else [f"series {i + 1}" for i in range(len(series))]
    if len(labels) != len(series):
        raise ValidationError("one label per series")
    t = grid.t
    finite = np.concatenate([s.values[np.isfinite(s.values)] for s in series])
    if finite.size == 0:
        raise ValidationError("series have no finite values")
    xt, x0, x1 = nice_ticks(float(t[0]), float(t[-1]))
    yt, y0, y1 = nice_ticks(float(finite.min()), float(finite.max()))
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def X(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def Y(y):
        return TOP + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH // 2}" y="14" text-anchor="middle">{_escape(title)}</text>')
    out.append(f'<g stroke="#dddddd" stroke-width="1">')
    for x in xt:
        out.append(f'<line x1="{_fmt(X(x))}" y1="{TOP}" x2="{_fmt(X(x))}" y2="{TOP + ph}"/>')
    for y in yt:
        out.append(f'<line x1="{LEFT}" y1="{_fmt(Y(y))}" x2="{LEFT + pw}" y2="{_fmt(Y(y))}"/>')
    out.append("</g>")
    out.append(f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for x in xt:
        out.append(f'<text x="{_fmt(X(x))}" y="{TOP + ph + 16}" text-anchor="middle">{_tick_label(x)}</text>')
    for y in yt:
        out.append(f'<text x="{LEFT - 6}" y="{_fmt(Y(y) + 4)}" text-anchor="end">{_tick_label(y)}</text>')
    out.append(f'<text x="{LEFT + pw // 2}" y="{HEIGHT - 10}" text-anchor="middle">t</text>')
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        # break the polyline at non-finite samples
        runs, cur = [], []
        for x, y in zip(t, s.values):
            if np.isfinite(y):
                cur.append(f"{_fmt(X(x))},{_fmt(Y(y))}")
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        for run in runs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(run)}"/>')
    lx, ly = LEFT + pw - 150, TOP + 10
    for i, lab in enumerate(labels):
        color = COLORS[i % len(COLORS)]
        y = ly + 16 * i
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 20}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{y + 4}">{_escape(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_plot(series, path, labels=None, title=None):
    """Write :func:`render_svg` output to ``path`` and return the path."""
    text = render_svg(series, labels, title)
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
