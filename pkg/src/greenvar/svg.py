"""Minimal SVG writers: scalar fields on scattered points, curve overlays and log-log plots."""

from __future__ import annotations

import numpy as np

WIDTH = 480
PAD = 40


def _color(t):
    """Blue-white-red ramp for t in [0, 1]."""
    t = float(np.clip(t, 0.0, 1.0))
    if t < 0.5:
        s = t / 0.5
        r, g, b = 40 + 215 * s, 80 + 175 * s, 200 + 55 * s
    else:
        s = (t - 0.5) / 0.5
        r, g, b = 255, 255 - 175 * s, 255 - 215 * s
    return f"rgb({int(r)},{int(g)},{int(b)})"


class _Frame:
    def __init__(self, xmin, xmax, ymin, ymax, width=WIDTH):
        span = max(xmax - xmin, ymax - ymin) or 1.0
        self.xmin, self.ymax = xmin, ymax
        self.scale = (width - 2 * PAD) / span
        self.width = width
        self.height = int(2 * PAD + (ymax - ymin) * self.scale)

    def xy(self, x, y):
        return PAD + (x - self.xmin) * self.scale, PAD + (self.ymax - y) * self.scale


def _doc(frame, body, title):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{frame.width}" height="{frame.height}" '
            f'viewBox="0 0 {frame.width} {frame.height}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n'
            f'<text x="{PAD}" y="{PAD / 2:.0f}" font-family="sans-serif" font-size="13">{title}</text>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def field_svg(path, z, values, title="", boundary=None, cell=None):
    """Heat map of ``values`` at points ``z`` drawn as small squares; optional boundary polyline."""
    z = np.asarray(z, dtype=complex)
    v = np.asarray(values, dtype=float)
    pts = z if boundary is None else np.concatenate([z, np.asarray(boundary)])
    fr = _Frame(pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max())
    lo, hi = np.nanmin(v), np.nanmax(v)
    # robust range: clip the log spike at the pole
    lo = max(lo, np.nanpercentile(v, 2)) if len(v) > 50 else lo
    span = hi - lo or 1.0
    if cell is None:
        cell = np.sqrt(np.ptp(z.real) * np.ptp(z.imag) / max(len(z), 1)) if len(z) > 1 else 0.05
    size = cell * fr.scale
    body = []
    for p, val in zip(z, v):
        x, y = fr.xy(p.real, p.imag)
        body.append(f'<rect x="{x - size / 2:.2f}" y="{y - size / 2:.2f}" width="{size:.2f}" '
                    f'height="{size:.2f}" fill="{_color((val - lo) / span)}"/>')
    if boundary is not None:
        body.append(_polyline(fr, boundary, "black"))
    with open(path, "w") as fh:
        fh.write(_doc(fr, body, f"{title} [{lo:.4g}, {hi:.4g}]"))


def _polyline(fr, pts, color, width=1.0):
    pts = np.asarray(pts, dtype=complex)
    pts = np.append(pts, pts[0])
    coords = " ".join("{:.2f},{:.2f}".format(*fr.xy(p.real, p.imag)) for p in pts)
    return f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def curves_svg(path, curves, title=""):
    """Overlay of closed curves (e.g. growth snapshots), coloured from first to last."""
    allp = np.concatenate([np.asarray(c, dtype=complex) for c in curves])
    fr = _Frame(allp.real.min(), allp.real.max(), allp.imag.min(), allp.imag.max())
    n = len(curves)
    body = [_polyline(fr, c, _color(k / max(n - 1, 1))) for k, c in enumerate(curves)]
    with open(path, "w") as fh:
        fh.write(_doc(fr, body, title))


def loglog_svg(path, series, title="", xlabel="eps", ylabel="|remainder|"):
    """Log-log line plot; ``series`` maps a label to (x, y)."""
    xs = np.concatenate([np.log10(np.asarray(x, float)) for x, _ in series.values()])
    ys = np.concatenate([np.log10(np.abs(np.asarray(y, float)) + 1e-300) for _, y in series.values()])
    fr = _Frame(xs.min(), xs.max(), ys.min(), ys.max())
    body = []
    x0, y0 = fr.xy(xs.min(), ys.min())
    x1, y1 = fr.xy(xs.max(), ys.max())
    body.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x1:.1f}" y2="{y0:.1f}" stroke="black"/>')
    body.append(f'<line x1="{x0:.1f}" y1="{y0:.1f}" x2="{x0:.1f}" y2="{y1:.1f}" stroke="black"/>')
    body.append(f'<text x="{x1 - 60:.1f}" y="{y0 + 25:.1f}" font-family="sans-serif" font-size="11">'
                f'log10 {xlabel}</text>')
    body.append(f'<text x="{x0 - 35:.1f}" y="{y1 - 8:.1f}" font-family="sans-serif" font-size="11">'
                f'log10 {ylabel}</text>')
    palette = ["#1f5fbf", "#c23b22", "#2a8c3a", "#7a3fb0"]
    for k, (label, (x, y)) in enumerate(series.items()):
        lx = np.log10(np.asarray(x, float))
        ly = np.log10(np.abs(np.asarray(y, float)) + 1e-300)
        coords = " ".join("{:.2f},{:.2f}".format(*fr.xy(a, b)) for a, b in zip(lx, ly))
        col = palette[k % len(palette)]
        body.append(f'<polyline points="{coords}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        body.append(f'<text x="{x0 + 10:.1f}" y="{y1 + 14 * (k + 1):.1f}" fill="{col}" '
                    f'font-family="sans-serif" font-size="11">{label}</text>')
    with open(path, "w") as fh:
        fh.write(_doc(fr, body, title))
