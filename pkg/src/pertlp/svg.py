"""Minimal deterministic SVG line and bar charts."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
DASHES = ("", "6,3", "2,2", "8,3,2,3")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _frame(out: list[str], x0, y0, w, h, title, xlabel, ylabel, xlim, ylim):
    out.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(w)}" height="{_f(h)}" '
               'fill="none" stroke="#333" stroke-width="1"/>')
    out.append(f'<text x="{_f(x0 + w / 2)}" y="{_f(y0 - 8)}" text-anchor="middle" '
               f'font-size="13">{escape(title)}</text>')
    out.append(f'<text x="{_f(x0 + w / 2)}" y="{_f(y0 + h + 32)}" text-anchor="middle" '
               f'font-size="11">{escape(xlabel)}</text>')
    out.append(f'<text x="{_f(x0 - 40)}" y="{_f(y0 + h / 2)}" text-anchor="middle" font-size="11" '
               f'transform="rotate(-90 {_f(x0 - 40)} {_f(y0 + h / 2)})">{escape(ylabel)}</text>')
    for t in _ticks(*ylim):
        y = y0 + h - (t - ylim[0]) / (ylim[1] - ylim[0] or 1) * h
        out.append(f'<line x1="{_f(x0 - 4)}" y1="{_f(y)}" x2="{_f(x0)}" y2="{_f(y)}" stroke="#333"/>')
        out.append(f'<text x="{_f(x0 - 6)}" y="{_f(y + 4)}" text-anchor="end" font-size="10">{t:.3g}</text>')
    for t in _ticks(*xlim):
        x = x0 + (t - xlim[0]) / (xlim[1] - xlim[0] or 1) * w
        out.append(f'<line x1="{_f(x)}" y1="{_f(y0 + h)}" x2="{_f(x)}" y2="{_f(y0 + h + 4)}" stroke="#333"/>')
        out.append(f'<text x="{_f(x)}" y="{_f(y0 + h + 16)}" text-anchor="middle" font-size="10">{t:.3g}</text>')


def line_panels(panels: Sequence[dict], *, columns: int = 2, width: int = 420, height: int = 300) -> str:
    """Grid of line charts.

    Each panel is a dict with ``title``, ``xlabel``, ``ylabel`` and
    ``series``: a list of ``(label, xs, ys)``. Non-finite points are skipped.
    """
    rows = math.ceil(len(panels) / columns)
    W, H = columns * width, rows * height
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}">', '<rect width="100%" height="100%" fill="white"/>']
    for idx, panel in enumerate(panels):
        ox, oy = (idx % columns) * width, (idx // columns) * height
        x0, y0, w, h = ox + 60, oy + 30, width - 180, height - 80
        pts = [(x, y) for _, xs, ys in panel["series"] for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y)]
        if pts:
            xlim = (min(p[0] for p in pts), max(p[0] for p in pts))
            ylim = panel.get("ylim") or (min(p[1] for p in pts), max(p[1] for p in pts))
        else:
            xlim, ylim = (0.0, 1.0), (0.0, 1.0)
        if xlim[0] == xlim[1]:
            xlim = (xlim[0] - 1, xlim[1] + 1)
        if ylim[0] == ylim[1]:
            ylim = (ylim[0] - 0.5, ylim[1] + 0.5)
        _frame(out, x0, y0, w, h, panel["title"], panel["xlabel"], panel["ylabel"], xlim, ylim)
        for si, (label, xs, ys) in enumerate(panel["series"]):
            color = PALETTE[si % len(PALETTE)]
            dash = DASHES[si % len(DASHES)]
            coords = [(x0 + (x - xlim[0]) / (xlim[1] - xlim[0]) * w,
                       y0 + h - (y - ylim[0]) / (ylim[1] - ylim[0]) * h)
                      for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
            if coords:
                path = " ".join(f"{_f(px)},{_f(py)}" for px, py in coords)
                dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
                out.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                           f'stroke-width="1.5"{dash_attr}/>')
                for px, py in coords:
                    out.append(f'<circle cx="{_f(px)}" cy="{_f(py)}" r="2" fill="{color}"/>')
            ly = y0 + 12 + 14 * si
            out.append(f'<line x1="{_f(x0 + w + 8)}" y1="{_f(ly - 4)}" x2="{_f(x0 + w + 24)}" '
                       f'y2="{_f(ly - 4)}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{_f(x0 + w + 28)}" y="{_f(ly)}" font-size="10">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def signed_bars(values: Sequence[float], *, title: str, ylabel: str,
                width: int = 640, height: int = 320) -> str:
    """Bar chart of signed values in the given order (positive up)."""
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">', '<rect width="100%" height="100%" fill="white"/>']
    x0, y0, w, h = 60, 30, width - 80, height - 80
    top = max([abs(v) for v in values] + [1e-12])
    ylim = (-top, top)
    _frame(out, x0, y0, w, h, title, "problem (sorted)", ylabel, (1, max(len(values), 1)), ylim)
    zero = y0 + h / 2
    out.append(f'<line x1="{_f(x0)}" y1="{_f(zero)}" x2="{_f(x0 + w)}" y2="{_f(zero)}" stroke="#999"/>')
    bw = w / max(len(values), 1)
    for i, v in enumerate(values):
        bh = abs(v) / top * (h / 2)
        y = zero - bh if v >= 0 else zero
        color = PALETTE[0] if v >= 0 else PALETTE[1]
        out.append(f'<rect x="{_f(x0 + i * bw + 0.1 * bw)}" y="{_f(y)}" width="{_f(0.8 * bw)}" '
                   f'height="{_f(bh)}" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
