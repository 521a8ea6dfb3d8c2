"""Dependency-free SVG plots: BF10 histogram, MDS scatter, F1 bar chart.

Output is deterministic (fixed number formatting, no timestamps) so plots
can be compared byte for byte.
"""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .agreement import delta_symbol
from .inference import BF_BIN_EDGES, MdsResult, bf_histogram

PLOT_KINDS = ("bf_hist", "mds_scatter", "f1_bars")
WIDTH, HEIGHT = 640, 400
MARGIN = 60
# log10 range drawn for the open-ended outer BF bins
LOG_MIN, LOG_MAX = -2.0, 2.0


def _f(x: float) -> str:
    return f"{x:.2f}"


class _Canvas:
    def __init__(self, title: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        ]
        self.text(WIDTH / 2, 24, title, anchor="middle", size=14)

    def line(self, x1, y1, x2, y2, stroke="black", dash: str | None = None, cls: str | None = None, extra: str = ""):
        attrs = f' stroke-dasharray="{dash}"' if dash else ""
        attrs += f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" stroke="{stroke}"{attrs}{extra}/>'
        )

    def rect(self, x, y, w, h, fill="steelblue", cls: str | None = None, extra: str = ""):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}"{c}{extra}/>')

    def circle(self, x, y, r=4, cls: str | None = None):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r}" fill="darkred"{c}/>')

    def text(self, x, y, s: str, anchor="start", size=12, cls: str | None = None):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" font-size="{size}"{c}>{escape(s)}</text>'
        )

    def axes(self):
        self.line(MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN)
        self.line(MARGIN, MARGIN, MARGIN, HEIGHT - MARGIN)

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _bf_label(x: float) -> str:
    if x == 0:
        return "0"
    if math.isinf(x):
        return "inf"
    if abs(x - 1 / 3) < 1e-12:
        return "1/3"
    if abs(x - 1 / 10) < 1e-12:
        return "1/10"
    return f"{x:g}"


def bf_hist_svg(bfs: Sequence[float], title: str = "BF10 histogram", edges: Sequence[float] = BF_BIN_EDGES) -> str:
    values = [b for b in bfs if not math.isnan(b)]
    if not values:
        raise ValueError("bf_hist needs at least one BF10 value")
    counts = bf_histogram(values, edges)
    top = max(n for _, _, n in counts) or 1
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def xpos(v: float) -> float:
        lg = LOG_MIN if v <= 0 else LOG_MAX if math.isinf(v) else min(max(math.log10(v), LOG_MIN), LOG_MAX)
        return MARGIN + (lg - LOG_MIN) / (LOG_MAX - LOG_MIN) * plot_w

    cv = _Canvas(title)
    cv.axes()
    for lo, hi, n in counts:
        x0, x1 = xpos(lo), xpos(hi)
        h = n / top * plot_h
        cv.rect(x0 + 1, HEIGHT - MARGIN - h, x1 - x0 - 2, h, cls="bin", extra=f' data-count="{n}"')
        cv.text((x0 + x1) / 2, HEIGHT - MARGIN - h - 4, str(n), anchor="middle")
    for e in edges:
        cv.text(xpos(e), HEIGHT - MARGIN + 16, _bf_label(e), anchor="middle")
    for b in (1 / 3, 3.0):
        x = xpos(b)
        cv.line(x, MARGIN, x, HEIGHT - MARGIN, stroke="crimson", dash="6,3", cls="boundary",
                extra=f' data-value="{_bf_label(b)}"')  # fmt: skip
    cv.text(WIDTH / 2, HEIGHT - 16, "BF10 (log scale)", anchor="middle")
    cv.text(16, HEIGHT / 2, "count", anchor="middle")
    return cv.render()


def mds_scatter_svg(result: MdsResult, title: str = "MDS of value covariance") -> str:
    coords = result.coords
    if len(coords) == 0:
        raise ValueError("mds_scatter needs at least one point")
    xs, ys = coords[:, 0], coords[:, 1] if coords.shape[1] > 1 else coords[:, 0] * 0
    span = max(float(abs(xs).max()), float(abs(ys).max()), 1e-12)
    half_w, half_h = (WIDTH - 2 * MARGIN) / 2, (HEIGHT - 2 * MARGIN) / 2
    cx, cy = WIDTH / 2, HEIGHT / 2
    cv = _Canvas(title)
    cv.line(MARGIN, cy, WIDTH - MARGIN, cy, stroke="lightgray")
    cv.line(cx, MARGIN, cx, HEIGHT - MARGIN, stroke="lightgray")
    for label, x, y in zip(result.labels, xs, ys):
        px, py = cx + x / span * half_w, cy - y / span * half_h
        cv.circle(px, py, cls="point")
        cv.text(px + 6, py - 6, label, cls="label")
    return cv.render()


def f1_bars_svg(rows: Sequence[tuple[str, float, float | None]], title: str = "Macro F1") -> str:
    """``rows`` are (model, F1, delta vs text-only or None)."""
    if not rows:
        raise ValueError("f1_bars needs at least one row")
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN - 40
    slot = plot_w / len(rows)
    cv = _Canvas(title)
    cv.axes()
    for k, (name, f1, delta) in enumerate(rows):
        h = max(0.0, min(1.0, f1)) * plot_h
        x = MARGIN + k * slot
        cv.rect(x + slot * 0.15, HEIGHT - MARGIN - h, slot * 0.7, h, cls="bar", extra=f' data-f1="{f1:.4f}"')
        cv.text(x + slot / 2, HEIGHT - MARGIN + 16, name, anchor="middle", size=10)
        cv.text(x + slot / 2, HEIGHT - MARGIN - h - 18, f"{f1:.2f}", anchor="middle", size=10)
        if delta is not None:
            cv.text(x + slot / 2, HEIGHT - MARGIN - h - 4, delta_symbol(delta), anchor="middle", cls="delta")
    return cv.render()


def render_plots(results, kind: str, title: str | None = None) -> str:
    """SVG for BF10 values (bf_hist), an MdsResult (mds_scatter) or F1 rows (f1_bars)."""
    if kind == "bf_hist":
        return bf_hist_svg(list(results), **({"title": title} if title else {}))
    if kind == "mds_scatter":
        return mds_scatter_svg(results, **({"title": title} if title else {}))
    if kind == "f1_bars":
        return f1_bars_svg(list(results), **({"title": title} if title else {}))
    raise ValueError(f"unknown plot kind {kind!r}; expected one of {', '.join(PLOT_KINDS)}")
