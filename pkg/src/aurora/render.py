"""Minimal SVG output for contours and item comparisons.

No plotting dependency; documents are assembled by hand. Display follows
the ultrasound convention with the tongue tip on the left, so model x is
mirrored before projection.
"""
from __future__ import annotations

import numpy as np

from .inversion import TongueContour

PALETTE = ("#1f6fb2", "#d1495b", "#2e8b57", "#8a5fbe", "#c98a1c", "#3aa6a6")


def _projector(contours, width, height, margin):
    pts = np.concatenate([c.points for c in contours])
    x_lo, x_hi = float(pts[:, 0].min()), float(pts[:, 0].max())
    y_lo, y_hi = float(pts[:, 1].min()), float(pts[:, 1].max())
    span_x = max(x_hi - x_lo, 1e-6)
    span_y = max(y_hi - y_lo, 1e-6)
    scale = min((width - 2 * margin) / span_x, (height - 2 * margin) / span_y)

    def project(point):
        # mirror x so the tongue tip (large model x) draws on the left
        sx = margin + (x_hi - point[0]) * scale
        sy = margin + (y_hi - point[1]) * scale
        return sx, sy

    return project


def _polyline(points, project, color, stroke_width=2.0):
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in (project(p) for p in points))
    return (
        f'<polyline points="{coords}" fill="none" stroke="{color}" '
        f'stroke-width="{stroke_width}" stroke-linecap="round"/>'
    )


def _knot_dots(contour, project, color):
    dots = []
    for p in contour.points[contour.knot_indices]:
        x, y = project(p)
        dots.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
    return "".join(dots)


def contours_svg(
    labeled: list[tuple[str, TongueContour]],
    width: int = 640,
    height: int = 420,
    title: str | None = None,
    show_knots: bool = False,
) -> str:
    """One SVG overlaying any number of labeled contours."""
    if not labeled:
        raise ValueError("nothing to draw")
    margin = 30.0
    project = _projector([c for _, c in labeled], width, height, margin)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )
    for i, (label, contour) in enumerate(labeled):
        color = PALETTE[i % len(PALETTE)]
        parts.append(_polyline(contour.points, project, color))
        if show_knots:
            parts.append(_knot_dots(contour, project, color))
        parts.append(
            f'<text x="{width - 8}" y="{20 + 16 * i}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12" fill="{color}">{label}</text>'
        )
    parts.append(
        f'<text x="8" y="{height - 8}" font-family="sans-serif" font-size="11" '
        f'fill="#666">tongue tip on the left</text>'
    )
    parts.append("</svg>")
    return "".join(parts) + "\n"


def grid_svg(rows: list[list[TongueContour]], width: int = 900, height: int = 700) -> str:
    """Small-multiple panel for a formant grid: one cell per contour,
    F1 increasing down the page, F2 increasing to the right."""
    n_r, n_c = len(rows), len(rows[0])
    cell_w, cell_h = width / n_c, height / n_r
    margin = 8.0
    flat = [c for row in rows for c in row]
    project = _projector(flat, cell_w, cell_h, margin)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for i, row in enumerate(rows):
        for j, contour in enumerate(row):
            ox, oy = j * cell_w, i * cell_h
            parts.append(f'<g transform="translate({ox:.1f},{oy:.1f})">')
            parts.append(
                f'<rect width="{cell_w:.1f}" height="{cell_h:.1f}" fill="none" '
                f'stroke="#ddd"/>'
            )
            parts.append(_polyline(contour.points, project, PALETTE[0], 1.5))
            parts.append(
                f'<text x="4" y="12" font-family="sans-serif" font-size="9" fill="#666">'
                f"F1 {contour.source_f1_hz:.0f} F2 {contour.source_f2_hz:.0f}</text>"
            )
            parts.append("</g>")
    parts.append("</svg>")
    return "".join(parts) + "\n"
