"""Minimal SVG line plot: linear x (outage), log-scale y (normalized throughput)."""

import math
from typing import Dict, Sequence, Tuple
from xml.sax.saxutils import escape

WIDTH = 640
HEIGHT = 440
MARGIN_LEFT = 80
MARGIN_RIGHT = 170
MARGIN_TOP = 40
MARGIN_BOTTOM = 60

PALETTE = ('#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b', '#e377c2', '#17becf')


def _log_bounds(values: Sequence[float]) -> Tuple[int, int]:
    logs = [math.log10(v) for v in values]
    low, high = math.floor(min(logs)), math.ceil(max(logs))
    if low == high:
        high = low + 1
    return low, high


def render_tradeoff_svg(series: Dict[str, Tuple[Sequence[float], Sequence[float]]],
                        title: str = '') -> str:
    """One polyline per series label; points with t <= 0 cannot sit on a log axis and are dropped."""
    cleaned = {}
    for label, (p_values, t_values) in series.items():
        points = sorted((float(p), float(t)) for p, t in zip(p_values, t_values) if t > 0)
        if points:
            cleaned[label] = points

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    all_t = [t for points in cleaned.values() for _, t in points] or [1.0]
    low, high = _log_bounds(all_t)

    def x_of(p):
        return MARGIN_LEFT + p * plot_w

    def y_of(t):
        return MARGIN_TOP + (high - math.log10(t)) / (high - low) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black"/>',
    ]

    for tick in range(0, 11, 2):
        p = tick / 10
        x = x_of(p)
        parts.append(f'<line x1="{x:.1f}" y1="{MARGIN_TOP + plot_h}" x2="{x:.1f}" '
                     f'y2="{MARGIN_TOP + plot_h + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{MARGIN_TOP + plot_h + 20}" text-anchor="middle">{p:.1f}</text>')

    for decade in range(low, high + 1):
        y = y_of(10.0 ** decade)
        parts.append(f'<line x1="{MARGIN_LEFT}" y1="{y:.1f}" x2="{MARGIN_LEFT + plot_w}" y2="{y:.1f}" '
                     f'stroke="#dddddd"/>')
        parts.append(f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.1f}" text-anchor="end">1e{decade}</text>')

    parts.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 15}" '
                 f'text-anchor="middle">outage probability</text>')
    parts.append(f'<text x="20" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 20 {MARGIN_TOP + plot_h / 2:.1f})">throughput / C</text>')

    for index, (label, points) in enumerate(cleaned.items()):
        color = PALETTE[index % len(PALETTE)]
        coords = ' '.join(f'{x_of(p):.2f},{y_of(t):.2f}' for p, t in points)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        legend_y = MARGIN_TOP + 12 + 18 * index
        legend_x = MARGIN_LEFT + plot_w + 12
        parts.append(f'<line x1="{legend_x}" y1="{legend_y}" x2="{legend_x + 20}" y2="{legend_y}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{legend_x + 26}" y="{legend_y + 4}">{escape(label)}</text>')

    parts.append('</svg>')
    return '\n'.join(parts) + '\n'
