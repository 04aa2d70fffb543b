"""Static SVG line chart of equity curves (no plotting dependency)."""
from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT, MARGIN = 800, 400, 50
COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728")


def equity_svg(curves: Mapping[str, Sequence[float]], title: str = "") -> str:
    series = [(name, [float(v) for v in values]) for name, values in curves.items() if len(values)]
    if not series:
        raise ValueError("nothing to plot")
    lo = min(min(v) for _, v in series)
    hi = max(max(v) for _, v in series)
    span = hi - lo or 1.0
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="25" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{escape(title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{MARGIN - 5}" y="{MARGIN + 4}" text-anchor="end" font-family="sans-serif" '
        f'font-size="10">{hi:,.0f}</text>',
        f'<text x="{MARGIN - 5}" y="{HEIGHT - MARGIN + 4}" text-anchor="end" font-family="sans-serif" '
        f'font-size="10">{lo:,.0f}</text>',
    ]
    for k, (name, values) in enumerate(series):
        n = len(values)
        pts = []
        for i, v in enumerate(values):
            x = MARGIN + (plot_w * i / (n - 1) if n > 1 else 0)
            y = HEIGHT - MARGIN - plot_h * (v - lo) / span
            pts.append(f"{x:.1f},{y:.1f}")
        color = COLORS[k % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(pts)}"/>')
        out.append(
            f'<text x="{WIDTH - MARGIN}" y="{MARGIN + 14 * k}" text-anchor="end" fill="{color}" '
            f'font-family="sans-serif" font-size="12">{escape(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
