"""Dependency-free static SVG line plots for experiment summaries."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def line_plot(
    xs: Sequence[float],
    series: Mapping[str, Sequence[float]],
    title: str = "",
    xlabel: str = "",
    log_x: bool = False,
    width: int = 480,
    height: int = 320,
) -> str:
    if not xs:
        raise ValueError("no x values")
    left, right, top, bottom = 56, 120, 32, 44
    tx = [math.log10(x) for x in xs] if log_x else list(map(float, xs))
    ys = [y for v in series.values() for y in v if y == y]
    y_lo, y_hi = min(ys + [0.0]), max(ys + [1.0])
    x_lo, x_hi = min(tx), max(tx)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def px(x):
        return left + (x - x_lo) / x_span * (width - left - right)

    def py(y):
        return height - bottom - (y - y_lo) / y_span * (height - top - bottom)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
    ]
    for x, t in zip(xs, tx):
        out.append(f'<text x="{px(t):.1f}" y="{height - bottom + 14}" text-anchor="middle">{x:g}</text>')
    for i in range(5):
        y = y_lo + i * y_span / 4
        out.append(f'<text x="{left - 6}" y="{py(y) + 4:.1f}" text-anchor="end">{y:.2f}</text>')
    out.append(f'<text x="{(left + width - right) / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    for i, (name, vals) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(t):.1f},{py(v):.1f}" for t, v in zip(tx, vals) if v == v)
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = top + 16 * i
        out.append(f'<line x1="{width - right + 8}" y1="{ly}" x2="{width - right + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{width - right + 28}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
