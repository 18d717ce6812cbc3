"""Small deterministic SVG writer for time-series, band, bar and network plots.

Coordinates are printed with fixed precision so identical inputs give
byte-identical files.
"""
from __future__ import annotations

from datetime import datetime, timezone
from html import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]
SELL_RED = "#d62728"
BUY_GREEN = "#2ca02c"


def _f(x: float) -> str:
    return f"{x:.2f}"


class Canvas:
    def __init__(self, width=900, height=420, margin=(50, 150, 50, 70)):
        self.width, self.height = width, height
        self.top, self.right, self.bottom, self.left = margin
        self.parts: list[str] = []

    @property
    def plot_w(self):
        return self.width - self.left - self.right

    @property
    def plot_h(self):
        return self.height - self.top - self.bottom

    def set_range(self, x0, x1, y0, y1):
        if x1 == x0:
            x1 = x0 + 1
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        self.x0, self.x1, self.y0, self.y1 = float(x0), float(x1), float(y0), float(y1)

    def sx(self, x):
        return self.left + (x - self.x0) / (self.x1 - self.x0) * self.plot_w

    def sy(self, y):
        return self.top + (self.y1 - y) / (self.y1 - self.y0) * self.plot_h

    def add(self, s: str):
        self.parts.append(s)

    def text(self, x, y, s, size=12, anchor="start", color="#000"):
        self.add(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}" '
                 f'fill="{color}" font-family="sans-serif">{escape(str(s))}</text>')

    def line(self, x1, y1, x2, y2, color="#000", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                 f'stroke="{color}" stroke-width="{width}"{d}/>')

    def polyline(self, xs, ys, color, width=1.5):
        pts = " ".join(f"{_f(self.sx(x))},{_f(self.sy(y))}" for x, y in zip(xs, ys))
        self.add(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>')

    def band(self, xs, lo, hi, color, opacity):
        up = [f"{_f(self.sx(x))},{_f(self.sy(y))}" for x, y in zip(xs, hi)]
        down = [f"{_f(self.sx(x))},{_f(self.sy(y))}" for x, y in zip(xs[::-1], lo[::-1])]
        self.add(f'<polygon points="{" ".join(up + down)}" fill="{color}" fill-opacity="{opacity}" stroke="none"/>')

    def rect(self, x, y, w, h, color):
        self.add(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{color}"/>')

    def axes(self, title="", ylabel="", time_axis=True):
        self.add(f'<rect x="{self.left}" y="{self.top}" width="{self.plot_w}" height="{self.plot_h}" '
                 f'fill="none" stroke="#444"/>')
        if title:
            self.text(self.left, self.top - 18, title, size=14)
        if ylabel:
            self.text(14, self.top + self.plot_h / 2, ylabel, size=11)
        for y in np.linspace(self.y0, self.y1, 5):
            self.line(self.left - 4, self.sy(y), self.left, self.sy(y), "#444")
            self.text(self.left - 6, self.sy(y) + 4, f"{y:.3g}", size=10, anchor="end")
        if time_axis:
            day = 86400
            first = int(np.ceil(self.x0 / day) * day)
            days = list(range(first, int(self.x1) + 1, day))
            stride = max(1, len(days) // 8)
            for ts in days[::stride]:
                x = self.sx(ts)
                self.line(x, self.top + self.plot_h, x, self.top + self.plot_h + 4, "#444")
                label = datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%d %b")
                self.text(x, self.top + self.plot_h + 18, label, size=10, anchor="middle")

    def markers(self, events: dict):
        for label, ts in sorted(events.items(), key=lambda kv: kv[1]):
            if self.x0 <= ts <= self.x1:
                x = self.sx(ts)
                self.line(x, self.top, x, self.top + self.plot_h, "#555", 1.0, dash="2,3")
                self.text(x + 2, self.top + 12, f"({label})", size=10, color="#555")

    def legend(self, entries):
        x = self.left + self.plot_w + 12
        for k, (label, color) in enumerate(entries):
            y = self.top + 14 + 18 * k
            self.rect(x, y - 9, 12, 10, color)
            self.text(x + 18, y, label, size=11)

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        return "\n".join([head, f'<rect width="{self.width}" height="{self.height}" fill="#fff"/>',
                          *self.parts, "</svg>"]) + "\n"


def _finite_range(*arrays):
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    return lo - pad, hi + pad


def line_chart(x, series: dict, title="", ylabel="", events=None, bands=None) -> str:
    """``series`` maps label -> y values; ``bands`` is a list of (lo, hi, color, opacity)."""
    x = np.asarray(x, dtype=float)
    c = Canvas()
    extra = [b[0] for b in bands or []] + [b[1] for b in bands or []]
    c.set_range(x.min(), x.max(), *_finite_range(*series.values(), *extra))
    for lo, hi, color, opacity in bands or []:
        c.band(x, np.asarray(lo), np.asarray(hi), color, opacity)
    entries = []
    for k, (label, y) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        c.polyline(x, y, color)
        entries.append((label, color))
    c.axes(title, ylabel)
    c.markers(events or {})
    c.legend(entries)
    return c.render()


def bar_chart(x, y, title="", ylabel="", events=None, width=3600) -> str:
    """Signed bars: positive red (selling), negative green (buying)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = Canvas()
    lo, hi = _finite_range(y, [0.0])
    c.set_range(x.min(), x.max() + width, lo, hi)
    zero = c.sy(0.0)
    bw = max(0.5, c.sx(x.min() + width) - c.sx(x.min()))
    for xi, yi in zip(x, y):
        if yi == 0:
            continue
        top = min(zero, c.sy(yi))
        c.rect(c.sx(xi), top, bw, abs(c.sy(yi) - zero), SELL_RED if yi > 0 else BUY_GREEN)
    c.line(c.left, zero, c.left + c.plot_w, zero, "#444")
    c.axes(title, ylabel)
    c.markers(events or {})
    c.legend([("selling", SELL_RED), ("buying", BUY_GREEN)])
    return c.render()


def network_chart(positions, edges, labels, sizes, highlight=(), title="") -> str:
    """Node-link picture; ``edges`` is an iterable of (i, j, weight)."""
    pos = np.asarray(positions, dtype=float)
    c = Canvas(width=760, height=760, margin=(50, 40, 40, 40))
    (x0, x1), (y0, y1) = _finite_range(pos[:, 0]), _finite_range(pos[:, 1])
    c.set_range(x0, x1, y0, y1)
    if title:
        c.text(c.left, c.top - 18, title, size=14)
    wmax = max((abs(w) for _, _, w in edges), default=1.0) or 1.0
    for i, j, w in edges:
        c.line(c.sx(pos[i, 0]), c.sy(pos[i, 1]), c.sx(pos[j, 0]), c.sy(pos[j, 1]),
               "#999", width=round(0.3 + 1.7 * abs(w) / wmax, 2))
    s = np.asarray(sizes, dtype=float)
    smax = s.max() if s.size and s.max() > 0 else 1.0
    for k, label in enumerate(labels):
        r = 3 + 9 * s[k] / smax
        color = PALETTE[1] if label in highlight else PALETTE[0]
        c.add(f'<circle cx="{_f(c.sx(pos[k, 0]))}" cy="{_f(c.sy(pos[k, 1]))}" r="{_f(r)}" '
              f'fill="{color}" fill-opacity="0.85"/>')
        c.text(c.sx(pos[k, 0]) + r + 1, c.sy(pos[k, 1]) + 4, label, size=9)
    return c.render()
