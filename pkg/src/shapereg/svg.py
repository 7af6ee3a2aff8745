"""Minimal static SVG emitter for contour overlays.

No plotting dependency: polylines are written directly in pixel
coordinates (y axis pointing down, as in image space) with a small legend.
Output bytes are deterministic for identical inputs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def write_overlay(
    path: str | Path,
    layers: list[tuple[np.ndarray, str, str]],
    *,
    title: str | None = None,
) -> None:
    """Write an SVG overlay of contour polylines.

    :param layers: ``(points, colour, label)`` triples, drawn in order.
    """
    if not layers:
        raise ValueError("at least one layer is required")
    pts_all = np.concatenate([np.asarray(points) for points, _, _ in layers])
    x_min, x_max = float(pts_all.real.min()), float(pts_all.real.max())
    y_min, y_max = float(pts_all.imag.min()), float(pts_all.imag.max())
    span = max(x_max - x_min, y_max - y_min, 1.0)
    pad = 0.05 * span
    x0, y0 = x_min - pad, y_min - pad
    width, height = (x_max - x_min) + 2 * pad, (y_max - y_min) + 2 * pad
    stroke = span / 300.0
    font = span / 30.0

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(x0)} {_fmt(y0)} '
        f'{_fmt(width)} {_fmt(height)}" width="640" height="{_fmt(640 * height / width)}">',
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" fill="white" stroke="#cccccc" '
        f'stroke-width="{_fmt(stroke / 2)}"/>',
    ]
    if title:
        lines.append(
            f'<text x="{_fmt(x0 + pad / 2)}" y="{_fmt(y0 + font)}" '
            f'font-size="{_fmt(font)}" font-family="sans-serif">{title}</text>'
        )
    legend_row = 0
    for points, colour, label in layers:
        c = np.asarray(points)
        coords = " ".join(f"{_fmt(float(p.real))},{_fmt(float(p.imag))}" for p in c)
        lines.append(
            f'<polyline points="{coords}" fill="none" stroke="{colour}" '
            f'stroke-width="{_fmt(stroke)}"/>'
        )
        if not label:
            continue
        yl = y0 + font * (legend_row + 2.2)
        legend_row += 1
        lines.append(
            f'<rect x="{_fmt(x0 + pad / 2)}" y="{_fmt(yl - font * 0.7)}" '
            f'width="{_fmt(font * 0.8)}" height="{_fmt(font * 0.8)}" fill="{colour}"/>'
        )
        lines.append(
            f'<text x="{_fmt(x0 + pad / 2 + font)}" y="{_fmt(yl)}" '
            f'font-size="{_fmt(font * 0.8)}" font-family="sans-serif">{label}</text>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")
