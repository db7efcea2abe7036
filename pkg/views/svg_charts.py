"""svg_charts.py

Plain SVG line charts and a correlation heatmap. No plotting library.

Functions return the SVG document as a string; callers decide where it goes.
"""

from __future__ import annotations

from html import escape

import numpy as np

from core.errors import ContractViolation

COLORS = [
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
]

WIDTH = 960
HEIGHT = 560
MARGIN = dict(left=80, right=200, top=60, bottom=80)
FONT = 'font-family="Arial"'


def _header(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="34" text-anchor="middle" font-size="20" {FONT}>{escape(title)}</text>',
    ]


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / count for i in range(count + 1)]


def line_chart_svg(
    title: str,
    series: dict[str, np.ndarray],
    *,
    x_label: str = "episode",
    y_label: str = "probability of success",
    y_range: tuple[float, float] | None = (0.0, 1.0),
) -> str:
    """One polyline per series; x is the index (episode number)."""
    if not series:
        raise ContractViolation("line_chart_svg needs at least one series")
    arrays = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    n = max(len(a) for a in arrays.values())
    if n == 0:
        raise ContractViolation("series are empty")

    if y_range is None:
        finite = np.concatenate([a[np.isfinite(a)] for a in arrays.values()])
        y_lo, y_hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
        if y_hi <= y_lo:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    else:
        y_lo, y_hi = y_range

    left, top = MARGIN["left"], MARGIN["top"]
    right, bottom = WIDTH - MARGIN["right"], HEIGHT - MARGIN["bottom"]
    pw, ph = right - left, bottom - top

    def x_px(i: float) -> float:
        return left + (i / max(n - 1, 1)) * pw

    def y_px(v: float) -> float:
        return bottom - ((v - y_lo) / (y_hi - y_lo)) * ph

    out = _header(WIDTH, HEIGHT, title)

    for v in _nice_ticks(y_lo, y_hi):
        y = y_px(v)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{right}" y2="{y:.2f}" stroke="#d9d9d9" stroke-width="1"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="12" {FONT}>{v:.2f}</text>')
    for v in _nice_ticks(0, n - 1):
        x = x_px(v)
        out.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 5}" stroke="#000000" stroke-width="1"/>')
        out.append(f'<text x="{x:.2f}" y="{bottom + 22}" text-anchor="middle" font-size="12" {FONT}>{v:.0f}</text>')

    out.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="#000000" stroke-width="2"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="#000000" stroke-width="2"/>')

    for idx, (label, arr) in enumerate(arrays.items()):
        color = COLORS[idx % len(COLORS)]
        pts = " ".join(
            f"{x_px(i):.2f},{y_px(float(np.clip(v, y_lo, y_hi))):.2f}" for i, v in enumerate(arr) if np.isfinite(v)
        )
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = top + 18 + idx * 24
        lx = right + 20
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="3"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}" font-size="13" {FONT}>{escape(label)}</text>')

    out.append(
        f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 24}" text-anchor="middle" font-size="14" {FONT}>'
        f"{escape(x_label)}</text>"
    )
    cy = (top + bottom) / 2
    out.append(
        f'<text x="24" y="{cy:.1f}" text-anchor="middle" font-size="14" {FONT} '
        f'transform="rotate(-90 24 {cy:.1f})">{escape(y_label)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _heat_color(v: float) -> str:
    """Blue (-1) through white (0) to red (+1); grey when undefined."""
    if not np.isfinite(v):
        return "#bdbdbd"
    v = float(np.clip(v, -1.0, 1.0))
    if v >= 0:
        r, g, b = 255, int(255 * (1 - v)), int(255 * (1 - v))
    else:
        r, g, b = int(255 * (1 + v)), int(255 * (1 + v)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(title: str, labels: list[str], values: np.ndarray, *, cell: int = 44) -> str:
    """Square matrix heatmap with the value printed in each cell (NaN shown as n/a)."""
    values = np.asarray(values, dtype=float)
    k = len(labels)
    if values.shape != (k, k):
        raise ContractViolation(f"heatmap needs a {k}x{k} matrix, got {values.shape}")

    left, top = 70, 70
    width = left + k * cell + 40
    height = top + k * cell + 40
    out = _header(width, height, title)

    for i, row_label in enumerate(labels):
        y = top + i * cell
        out.append(
            f'<text x="{left - 6}" y="{y + cell / 2 + 4:.1f}" text-anchor="end" font-size="12" {FONT}>'
            f"{escape(row_label)}</text>"
        )
        for j in range(k):
            x = left + j * cell
            v = values[i, j]
            out.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{_heat_color(v)}" stroke="#ffffff"/>'
            )
            txt = "n/a" if not np.isfinite(v) else f"{v:.2f}"
            out.append(
                f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 4:.1f}" text-anchor="middle" font-size="10" {FONT}>'
                f"{txt}</text>"
            )
    for j, col_label in enumerate(labels):
        x = left + j * cell + cell / 2
        out.append(
            f'<text x="{x:.1f}" y="{top - 8}" text-anchor="middle" font-size="12" {FONT}>{escape(col_label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
