"""Minimal static SVG line charts (no plotting library needed)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = 60
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _scale(v, lo, hi, a, b):
    if hi <= lo:
        return (a + b) / 2.0 + 0.0 * v
    return a + (v - lo) * (b - a) / (hi - lo)


def line_chart(series, path, title="", xlabel="", ylabel="", logx=False, logy=False):
    """Write ``series`` (list of ``(label, x, y, dashed)``) as one SVG chart.

    Log axes drop nonpositive samples. Returns the number of polylines drawn.
    """
    prepared = []
    for label, x, y, dashed in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        x, y = x[keep], y[keep]
        if x.size == 0:
            continue
        prepared.append((label, np.log10(x) if logx else x, np.log10(y) if logy else y, dashed))
    if not prepared:
        raise ValueError("nothing to plot")
    xs = np.concatenate([p[1] for p in prepared])
    ys = np.concatenate([p[2] for p in prepared])
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    left, right, top, bottom = MARGIN, WIDTH - 20, 30, HEIGHT - MARGIN

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>']
    for frac in np.linspace(0, 1, 5):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        px, py = _scale(xv, x0, x1, left, right), _scale(yv, y0, y1, bottom, top)
        xt = f"1e{xv:.1f}" if logx else f"{xv:.3g}"
        yt = f"1e{yv:.1f}" if logy else f"{yv:.3g}"
        out.append(f'<text x="{px:.1f}" y="{bottom + 16}" font-size="11" '
                   f'text-anchor="middle">{xt}</text>')
        out.append(f'<text x="{left - 6}" y="{py + 4:.1f}" font-size="11" '
                   f'text-anchor="end">{yt}</text>')
    for i, (label, x, y, dashed) in enumerate(prepared):
        color = "#777777" if dashed else COLORS[i % len(COLORS)]
        pts = " ".join(f"{_scale(a, x0, x1, left, right):.2f},{_scale(b, y0, y1, bottom, top):.2f}"
                       for a, b in zip(x, y))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        out.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5"'
                   f'{dash} points="{pts}"><title>{escape(label)}</title></polyline>')
        out.append(f'<text x="{right - 150}" y="{top + 14 * (i + 1)}" font-size="12" '
                   f'fill="{color}">{escape(label)}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="18" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(out) + "\n")
    return len(prepared)


def residual_plot(label, iterations, residuals, gamma, path):
    """Residual vs iteration on a log scale with a ``gamma^k`` reference line."""
    k = np.asarray(iterations, dtype=float)
    r = np.asarray(residuals, dtype=float)
    ref = r[0] * gamma ** (k - k[0]) if r.size else r
    return line_chart([(label, k, r, False), (f"gamma^k (gamma={gamma:g})", k, ref, True)],
                      path, title=f"convergence: {label}", xlabel="iteration",
                      ylabel="sup-norm residual", logy=True)


def scaling_plot(series, path):
    """``series``: ``{solver: (N, per_iteration_time)}`` on log-log axes."""
    return line_chart([(s, n, t, False) for s, (n, t) in series.items()], path,
                      title="per-iteration time", xlabel="points per axis N",
                      ylabel="seconds", logx=True, logy=True)
