"""Minimal static SVG figures: line plots, heatmaps and spectrum overlays."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=30, top=40, bottom=55)
PALETTE = ("#1f4e9c", "#2a9d4b", "#c0392b", "#8e44ad", "#d68910", "#17a2b8")

# viridis anchors
_CMAP = np.array(
    [[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]], dtype=float
)


def _color(t: float) -> str:
    if not math.isfinite(t):
        return "#cccccc"
    t = min(max(t, 0.0), 1.0) * (len(_CMAP) - 1)
    k = min(int(t), len(_CMAP) - 2)
    rgb = _CMAP[k] + (t - k) * (_CMAP[k + 1] - _CMAP[k])
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


class _Frame:
    def __init__(self, xlim, ylim, logx=False):
        self.logx = logx
        self.x0, self.x1 = (math.log10(v) for v in xlim) if logx else xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def x(self, v):
        v = math.log10(v) if self.logx else v
        return MARGIN["left"] + (v - self.x0) / (self.x1 - self.x0) * self.pw

    def y(self, v):
        return MARGIN["top"] + (1.0 - (v - self.y0) / (self.y1 - self.y0)) * self.ph


def _axes(fr: _Frame, xlabel, ylabel, title, xticks, yticks):
    L, T = MARGIN["left"], MARGIN["top"]
    parts = [
        f'<rect x="{L}" y="{T}" width="{fr.pw}" height="{fr.ph}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<text x="{L + fr.pw / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13">'
        f"{escape(xlabel)}</text>",
        f'<text x="16" y="{T + fr.ph / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {T + fr.ph / 2})">{escape(ylabel)}</text>',
    ]
    for v in xticks:
        px = fr.x(v)
        parts.append(f'<line x1="{px:.2f}" y1="{T + fr.ph}" x2="{px:.2f}" y2="{T + fr.ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{T + fr.ph + 18}" text-anchor="middle" font-size="11">{v:.3g}</text>')
    for v in yticks:
        py = fr.y(v)
        parts.append(f'<line x1="{L - 5}" y1="{py:.2f}" x2="{L}" y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{L - 8}" y="{py + 4:.2f}" text-anchor="end" font-size="11">{v:.3g}</text>')
    return parts


def _doc(parts) -> str:
    body = "\n".join(parts)
    return (
        f'<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">\n<rect width="100%" height="100%" fill="white"/>\n'
        f"{body}\n</svg>\n"
    )


def line_plot(series, xlabel="", ylabel="", title="", markers=None) -> str:
    """``series`` is a list of dicts with keys ``x``, ``y``, ``label`` and optional ``dashed``."""
    xs = np.concatenate([np.asarray(s["x"], float) for s in series])
    ys = np.concatenate([np.asarray(s["y"], float) for s in series])
    finite = np.isfinite(ys)
    ylo, yhi = float(np.min(ys[finite], initial=0.0)), float(np.max(ys[finite], initial=1.0))
    pad = 0.05 * (yhi - ylo or 1.0)
    fr = _Frame((float(xs.min()), float(xs.max())), (ylo - pad, yhi + pad))
    parts = _axes(fr, xlabel, ylabel, title,
                  np.linspace(fr.x0, fr.x1, 6), np.linspace(ylo, yhi, 5))
    for k, s in enumerate(series):
        color = s.get("color", PALETTE[k % len(PALETTE)])
        pts = " ".join(
            f"{fr.x(a):.2f},{fr.y(b):.2f}" for a, b in zip(s["x"], s["y"]) if math.isfinite(b)
        )
        dash = ' stroke-dasharray="6 4"' if s.get("dashed") else ""
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = MARGIN["top"] + 16 + 16 * k
        lx = WIDTH - MARGIN["right"] - 170
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" stroke="{color}"{dash}/>')
        parts.append(f'<text x="{lx + 30}" y="{ly}" font-size="11">{escape(s.get("label", ""))}</text>')
    for xv in markers or ():
        px = fr.x(xv)
        parts.append(f'<line x1="{px:.2f}" y1="{MARGIN["top"]}" x2="{px:.2f}" '
                     f'y2="{MARGIN["top"] + fr.ph}" stroke="gray" stroke-dasharray="2 3"/>')
    return _doc(parts)


def heatmap(matrix, x_values, y_values, xlabel="", ylabel="", title="", logx=False) -> str:
    """Cells ``matrix[i, j]`` at ``(x_values[i], y_values[j])``; NaN cells are grey."""
    m = np.asarray(matrix, dtype=float)
    x = np.asarray(x_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    vmax = float(np.nanmax(m)) if np.any(np.isfinite(m)) else 1.0
    vmax = vmax or 1.0

    def edges(v, log):
        w = np.log10(v) if log else v
        if w.size == 1:
            e = np.array([w[0] - 0.5, w[0] + 0.5])
        else:
            mid = 0.5 * (w[1:] + w[:-1])
            e = np.concatenate([[2 * w[0] - mid[0]], mid, [2 * w[-1] - mid[-1]]])
        return 10**e if log else e

    xe, ye = edges(x, logx), edges(y, False)
    fr = _Frame((xe.min(), xe.max()), (ye.min(), ye.max()), logx=logx)
    xt = np.geomspace(x.min(), x.max(), 5) if logx else np.linspace(x.min(), x.max(), 5)
    parts = []
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            x0, x1 = sorted((fr.x(xe[i]), fr.x(xe[i + 1])))
            y0, y1 = sorted((fr.y(ye[j]), fr.y(ye[j + 1])))
            parts.append(
                f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0 + 0.3:.2f}" '
                f'height="{y1 - y0 + 0.3:.2f}" fill="{_color(m[i, j] / vmax)}"/>'
            )
    parts += _axes(fr, xlabel, ylabel, title, xt, np.linspace(y.min(), y.max(), 5))
    cx = WIDTH - MARGIN["right"] + 8
    for k in range(20):
        py = MARGIN["top"] + fr.ph * (1 - (k + 1) / 20)
        parts.append(f'<rect x="{cx}" y="{py:.2f}" width="10" height="{fr.ph / 20 + 0.3:.2f}" '
                     f'fill="{_color((k + 0.5) / 20)}"/>')
    parts.append(f'<text x="{cx + 5}" y="{MARGIN["top"] - 5}" text-anchor="middle" '
                 f'font-size="10">{vmax:.3g}</text>')
    return _doc(parts)


def spectrum_overlay(spectra, lines_omega, lines_P, title="", xmax=None) -> str:
    """Peak-normalised field spectra (lines) over population sticks ``P`` at ``omega``.

    ``spectra`` is a list of dicts ``{"omega", "magnitude", "label"}``.
    """
    xmax = xmax or float(max(np.max(s["omega"]) for s in spectra))
    fr = _Frame((0.0, xmax), (0.0, 1.05))
    parts = _axes(fr, "omega", "P, |E(omega)| (arb.)", title,
                  np.linspace(0, xmax, 6), np.linspace(0, 1, 5))
    width = max(2.0, 0.6 * (fr.x(2.0) - fr.x(0.0)))
    for w, p in zip(lines_omega, lines_P):
        if w > xmax:
            continue
        px, py = fr.x(w), fr.y(p)
        parts.append(f'<rect x="{px - width / 2:.2f}" y="{py:.2f}" width="{width:.2f}" '
                     f'height="{fr.y(0) - py:.2f}" fill="#bbbbbb"/>')
    for k, s in enumerate(spectra):
        mag = np.asarray(s["magnitude"], float)
        mag = mag / (mag.max() or 1.0)
        om = np.asarray(s["omega"], float)
        keep = om <= xmax
        pts = " ".join(f"{fr.x(a):.2f},{fr.y(b):.2f}" for a, b in zip(om[keep], mag[keep]))
        color = PALETTE[k % len(PALETTE)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = MARGIN["top"] + 16 + 16 * k
        lx = WIDTH - MARGIN["right"] - 150
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" stroke="{color}"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly}" font-size="11">{escape(s.get("label", ""))}</text>')
    return _doc(parts)
