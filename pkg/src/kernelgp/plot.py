"""Dependency-free SVG line plot with a shaded confidence band."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
MARGIN = (60, 20, 40, 50)  # left, right, top, bottom


def _ticks(lo, hi, n=5):
    span = hi - lo
    raw = span / n
    mag = 10 ** np.floor(np.log10(raw))
    step = mag * min((1, 2, 5, 10), key=lambda m: abs(m * mag - raw))
    return np.arange(np.ceil(lo / step) * step, hi + 1e-9 * span, step)


def _fmt(v):
    return f"{v:.6g}"


def prediction_svg(
    x_grid,
    mean,
    lower,
    upper,
    x_train=None,
    y_train=None,
    x_test=None,
    y_test=None,
    title="",
) -> str:
    """Render a posterior plot as an SVG document.

    Layers, each a single ``<path>`` with a ``class`` attribute: ``band``
    (95% interval polygon), ``mean`` (posterior mean polyline), ``train`` and
    ``test`` (observation markers, when given).
    """
    x_grid = np.asarray(x_grid, dtype=float)
    order = np.argsort(x_grid, kind="stable")
    x_grid, mean, lower, upper = (np.asarray(a, dtype=float)[order] for a in (x_grid, mean, lower, upper))
    xs = [x_grid] + [np.asarray(a, dtype=float) for a in (x_train, x_test) if a is not None]
    ys = [lower, upper] + [np.asarray(a, dtype=float) for a in (y_train, y_test) if a is not None]
    xmin, xmax = min(a.min() for a in xs), max(a.max() for a in xs)
    ymin, ymax = min(a.min() for a in ys), max(a.max() for a in ys)
    if xmax == xmin:
        xmin, xmax = xmin - 0.5, xmax + 0.5
    pad = 0.05 * (ymax - ymin) or 0.5
    ymin, ymax = ymin - pad, ymax + pad

    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def px(x):
        return left + (np.asarray(x) - xmin) / (xmax - xmin) * pw

    def py(y):
        return top + (ymax - np.asarray(y)) / (ymax - ymin) * ph

    def polyline(x, y):
        pts = [f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y))]
        return "M" + " L".join(pts)

    def markers(x, y, r=2.5):
        return " ".join(
            f"M{a - r:.2f},{b:.2f} a{r},{r} 0 1,0 {2 * r},0 a{r},{r} 0 1,0 {-2 * r},0"
            for a, b in zip(px(x), py(y))
        )

    band = polyline(np.r_[x_grid, x_grid[::-1]], np.r_[upper, lower[::-1]]) + " Z"
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for t in _ticks(xmin, xmax):
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 5}" stroke="#444"/>')
        out.append(
            f'<text x="{px(t):.2f}" y="{top + ph + 20}" font-size="12" text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in _ticks(ymin, ymax):
        out.append(f'<line x1="{left - 5}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="#444"/>')
        out.append(
            f'<text x="{left - 8}" y="{py(t) + 4:.2f}" font-size="12" text-anchor="end">{_fmt(t)}</text>'
        )
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="{top - 15}" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<path class="band" d="{band}" fill="#1f77b4" fill-opacity="0.25" stroke="none"/>')
    out.append(f'<path class="mean" d="{polyline(x_grid, mean)}" fill="none" stroke="#1f77b4" stroke-width="2"/>')
    if x_train is not None:
        out.append(f'<path class="train" d="{markers(x_train, y_train)}" fill="black" stroke="none"/>')
    if x_test is not None:
        out.append(f'<path class="test" d="{markers(x_test, y_test)}" fill="#d62728" stroke="none"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
