"""Hand-rolled SVG emitters for the R-X diagram and regression-fit plots.

The files are assembled from fixed-precision formatted strings, so a
given locus/zone/report always renders to byte-identical output (no
timestamps, random ids, or library version drift).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import IoFailure
from .relay import ImpedanceLocus, MhoZone

_FMT = "{:.3f}"


def _f(v: float) -> str:
    s = _FMT.format(float(v))
    return "0.000" if s == "-0.000" else s


def least_squares_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and intercept of the least-squares line y = a*x + b.

    A degenerate x (zero variance) or constant y yields slope 0 with the
    intercept at the mean of y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm = x.mean()
    ym = y.mean()
    sxx = float(((x - xm) ** 2).sum())
    sxy = float(((x - xm) * (y - ym)).sum())
    slope = 0.0 if sxx == 0.0 else sxy / sxx
    return slope, ym - slope * xm


class _Mapper:
    """Aspect-preserving data-to-pixel map (y axis points up in data space)."""

    def __init__(self, x_range, y_range, x0, y0, width, height):
        sx = width / (x_range[1] - x_range[0])
        sy = height / (y_range[1] - y_range[0])
        self.scale = min(sx, sy)
        self.x_mid = 0.5 * (x_range[0] + x_range[1])
        self.y_mid = 0.5 * (y_range[0] + y_range[1])
        self.px_mid = x0 + width / 2.0
        self.py_mid = y0 + height / 2.0

    def x(self, v: float) -> float:
        return self.px_mid + (v - self.x_mid) * self.scale

    def y(self, v: float) -> float:
        return self.py_mid - (v - self.y_mid) * self.scale


def _padded(lo: float, hi: float, pad: float = 0.08) -> tuple[float, float]:
    span = hi - lo
    if span <= 0:
        span = max(abs(hi), 1.0)
    return lo - pad * span, hi + pad * span


def rx_svg_text(locus: ImpedanceLocus, zone: MhoZone,
                title: str = "R-X impedance locus") -> str:
    """SVG with the mho circle, R/X axes and the locus polyline."""
    if len(locus) == 0:
        raise IoFailure("cannot render an empty locus")
    w, h, margin = 640.0, 520.0, 60.0
    c = zone.center
    radius = abs(c)
    r_vals = np.concatenate([locus.z_ohm.real, [c.real - radius, c.real + radius, 0.0]])
    x_vals = np.concatenate([locus.z_ohm.imag, [c.imag - radius, c.imag + radius, 0.0]])
    r_range = _padded(float(r_vals.min()), float(r_vals.max()))
    x_range = _padded(float(x_vals.min()), float(x_vals.max()))
    m = _Mapper(r_range, x_range, margin, margin, w - 2 * margin, h - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.0f} {h:.0f}">',
        f'<rect x="0" y="0" width="{w:.0f}" height="{h:.0f}" fill="white"/>',
        f'<text x="{_f(w / 2)}" y="30" text-anchor="middle" '
        f'font-family="monospace" font-size="16">{title}</text>',
    ]
    # axes through the origin
    parts.append(f'<line x1="{_f(margin)}" y1="{_f(m.y(0.0))}" x2="{_f(w - margin)}" '
                 f'y2="{_f(m.y(0.0))}" stroke="#999" stroke-width="1"/>')
    parts.append(f'<line x1="{_f(m.x(0.0))}" y1="{_f(margin)}" x2="{_f(m.x(0.0))}" '
                 f'y2="{_f(h - margin)}" stroke="#999" stroke-width="1"/>')
    parts.append(f'<text x="{_f(w - margin + 6)}" y="{_f(m.y(0.0) + 4)}" '
                 f'font-family="monospace" font-size="12">R</text>')
    parts.append(f'<text x="{_f(m.x(0.0) - 4)}" y="{_f(margin - 8)}" '
                 f'font-family="monospace" font-size="12">X</text>')
    # protection zone
    parts.append(f'<circle cx="{_f(m.x(c.real))}" cy="{_f(m.y(c.imag))}" '
                 f'r="{_f(radius * m.scale)}" fill="none" stroke="#1f6fb2" '
                 f'stroke-width="2"/>')
    # impedance trajectory
    pts = " ".join(f"{_f(m.x(z.real))},{_f(m.y(z.imag))}" for z in locus.z_ohm)
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#c0392b" '
                 f'stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_rx_svg(locus: ImpedanceLocus, zone: MhoZone, path,
                  title: str = "R-X impedance locus") -> None:
    text = rx_svg_text(locus, zone, title)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write SVG {path}: {exc}") from exc


def _fit_panel(parts: list, x0: float, y0: float, side: float, name: str,
               targets: np.ndarray, predictions: np.ndarray) -> None:
    parts.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(side)}" '
                 f'height="{_f(side)}" fill="none" stroke="#333" stroke-width="1"/>')
    parts.append(f'<text x="{_f(x0 + side / 2)}" y="{_f(y0 - 8)}" text-anchor="middle" '
                 f'font-family="monospace" font-size="13">{name} (n={len(targets)})</text>')
    if len(targets) == 0:
        parts.append(f'<text x="{_f(x0 + side / 2)}" y="{_f(y0 + side / 2)}" '
                     f'text-anchor="middle" font-family="monospace" '
                     f'font-size="12">no rows</text>')
        return
    lo = float(min(targets.min(), predictions.min()))
    hi = float(max(targets.max(), predictions.max()))
    lo, hi = _padded(lo, hi, 0.1)
    m = _Mapper((lo, hi), (lo, hi), x0, y0, side, side)

    # identity line across the data range
    parts.append(f'<line x1="{_f(m.x(lo))}" y1="{_f(m.y(lo))}" x2="{_f(m.x(hi))}" '
                 f'y2="{_f(m.y(hi))}" stroke="#999" stroke-width="1" '
                 f'stroke-dasharray="4,3"/>')
    slope, intercept = least_squares_fit(targets, predictions)
    parts.append(f'<line x1="{_f(m.x(lo))}" y1="{_f(m.y(slope * lo + intercept))}" '
                 f'x2="{_f(m.x(hi))}" y2="{_f(m.y(slope * hi + intercept))}" '
                 f'stroke="#1f6fb2" stroke-width="1.5"/>')
    for t, p in zip(targets, predictions):
        parts.append(f'<rect x="{_f(m.x(float(t)) - 2)}" y="{_f(m.y(float(p)) - 2)}" '
                     f'width="4" height="4" fill="#c0392b"/>')
    parts.append(f'<text x="{_f(x0 + side / 2)}" y="{_f(y0 + side + 18)}" '
                 f'text-anchor="middle" font-family="monospace" font-size="11">'
                 f'fit: y = {slope:.4f} x + {intercept:.4f}</text>')


def fit_svg_text(split_data: dict, title: str = "Regression fit",
                 footer: Optional[str] = None) -> str:
    """Three-panel predicted-vs-target scatter (train/validation/test).

    split_data maps split name -> (targets, predictions) arrays.
    """
    side, gap, top, bottom = 300.0, 50.0, 70.0, 60.0
    names = ["train", "validation", "test"]
    w = gap + len(names) * (side + gap)
    h = top + side + bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.0f} {h:.0f}">',
        f'<rect x="0" y="0" width="{w:.0f}" height="{h:.0f}" fill="white"/>',
        f'<text x="{_f(w / 2)}" y="30" text-anchor="middle" font-family="monospace" '
        f'font-size="16">{title}</text>',
    ]
    for i, name in enumerate(names):
        targets, predictions = split_data.get(name, (np.empty(0), np.empty(0)))
        _fit_panel(parts, gap + i * (side + gap), top, side, name,
                   np.asarray(targets, dtype=float),
                   np.asarray(predictions, dtype=float))
    if footer:
        parts.append(f'<text x="{_f(w / 2)}" y="{_f(h - 12)}" text-anchor="middle" '
                     f'font-family="monospace" font-size="12">{footer}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_fit_svg(report, split_data: dict, path,
                   title: str = "Regression fit") -> None:
    """Write the three-panel fit plot; the report feeds the footer line."""
    footer = None
    if report is not None:
        footer = (f"epochs={report.n_epochs} best_epoch={report.best_epoch} "
                  f"stop={report.stop_reason}")
    text = fit_svg_text(split_data, title, footer)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write SVG {path}: {exc}") from exc
