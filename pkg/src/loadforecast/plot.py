"""Static SVG line charts (actual vs predicted) with no rendering dependency.

Output is a pure function of the input numbers, so identical data gives
identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f3b73", "#d1495b", "#2e8b57", "#edae49", "#66489f", "#00798c")

WIDTH, HEIGHT = 900, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 55


def read_predictions_csv(path) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Return ``(index, {column: values})`` for every column after ``index``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "index" or len(header) < 2:
            raise ValueError(f"{path}: expected a header starting with 'index'")
        rows = [r for r in reader if r]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array([[float(c) for c in r] for r in rows])
    return data[:, 0], {name: data[:, j] for j, name in enumerate(header[1:], start=1)}


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = np.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(float(round(v / step) * step))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(x, series: dict[str, np.ndarray], title: str = "Forecast", x_label: str = "test sample", y_label: str = "load (kW·h)") -> str:
    x = np.asarray(x, dtype=float)
    all_y = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = float(x.min()), float(x.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return TOP + (y_hi - v) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + plot_w / 2:.2f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>',
    ]
    for t in _nice_ticks(y_lo, y_hi):
        y = sy(t)
        out.append(f'<line x1="{LEFT - 4}" y1="{_fmt(y)}" x2="{LEFT + plot_w}" y2="{_fmt(y)}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end">{t:g}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        xx = sx(t)
        out.append(f'<line x1="{_fmt(xx)}" y1="{TOP + plot_h}" x2="{_fmt(xx)}" y2="{TOP + plot_h + 4}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(xx)}" y="{TOP + plot_h + 18}" text-anchor="middle">{t:g}</text>')
    out.append(f'<text x="{LEFT + plot_w / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(
        f'<text x="18" y="{TOP + plot_h / 2:.2f}" text-anchor="middle" transform="rotate(-90 18 {TOP + plot_h / 2:.2f})">{escape(y_label)}</text>'
    )

    for k, (name, values) in enumerate(series.items()):
        colour = PALETTE[k % len(PALETTE)]
        points = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, values))
        dash = "" if k == 0 else ' stroke-dasharray="5 3"'
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{points}"/>')
        ly = TOP + 14 + 20 * k
        lx = LEFT + plot_w + 14
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{colour}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
