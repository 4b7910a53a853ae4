"""Dependency-free SVG line charts for quick looks at training curves."""

from __future__ import annotations

from pathlib import Path

_TEMPLATE = """<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect width="{w}" height="{h}" fill="white"/>
<text x="{w_half}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>
<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="black"/>
<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>
<text x="{w_half}" y="{h_label}" text-anchor="middle" font-family="sans-serif" font-size="11">{x_label}</text>
<text x="14" y="{v_mid}" text-anchor="middle" font-family="sans-serif" font-size="11" transform="rotate(-90 14 {v_mid})">{y_label}</text>
<text x="{x0}" y="{y0_label}" font-family="sans-serif" font-size="10">{top}</text>
<text x="{x0}" y="{y1_label}" font-family="sans-serif" font-size="10">{bottom}</text>
<polyline points="{points}" fill="none" stroke="#1f6fb2" stroke-width="1.5"/>
</svg>
"""


def line_chart(values, path, title="", x_label="", y_label="", width=640, height=360):
    """Write a single-series polyline chart; x is the sample index."""
    values = [float(v) for v in values]
    if not values:
        raise ValueError("no values to plot")
    x0, x1 = 48.0, width - 16.0
    y0, y1 = 32.0, height - 36.0
    lo, hi = min(values), max(values)
    span = (hi - lo) or 1.0
    n = len(values)
    step = (x1 - x0) / max(n - 1, 1)
    points = " ".join(
        f"{x0 + i * step:.2f},{y1 - (v - lo) / span * (y1 - y0):.2f}"
        for i, v in enumerate(values)
    )
    Path(path).write_text(
        _TEMPLATE.format(
            w=width,
            h=height,
            w_half=width / 2,
            h_label=height - 12,
            v_mid=(y0 + y1) / 2,
            x0=x0,
            x1=x1,
            y0=y0,
            y1=y1,
            y0_label=y0 + 4,
            y1_label=y1 - 4,
            top=f"{hi:.4g}",
            bottom=f"{lo:.4g}",
            title=title,
            x_label=x_label,
            y_label=y_label,
            points=points,
        )
    )
