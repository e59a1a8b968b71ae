"""Top-down SVG rendering of a planning scene."""

from __future__ import annotations

import numpy as np

from ..bspline import UniformBspline
from ..grid_map import OccupancyGrid

_SCALE = 40.0  # svg units per meter
_MARGIN = 20.0
_CURVE_SAMPLES = 200


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _polyline(points_xy, stroke: str, width: float, dash: str | None = None) -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points_xy)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}"{dash_attr}/>')


def obstacle_columns(grid: OccupancyGrid) -> np.ndarray:
    """Sorted (ix, iy) indices of xy columns containing any occupied cell."""
    mask = grid.occupancy.any(axis=2)
    return np.argwhere(mask)


def render_svg(
    grid: OccupancyGrid,
    guide: np.ndarray | None,
    phi_s: UniformBspline | None,
    phi_f: UniformBspline | None,
    out_path,
    start: np.ndarray | None = None,
    goal: np.ndarray | None = None,
) -> int:
    """Write the scene and return the obstacle-column count."""
    res = grid.resolution
    extent = np.asarray(grid.dims[:2]) * res
    width = extent[0] * _SCALE + 2 * _MARGIN
    height = extent[1] * _SCALE + 2 * _MARGIN

    def to_svg(p) -> tuple[float, float]:
        # y flipped so +y in the world points up in the image
        x = (float(p[0]) - grid.origin[0]) * _SCALE + _MARGIN
        y = height - ((float(p[1]) - grid.origin[1]) * _SCALE + _MARGIN)
        return x, y

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<rect width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
    ]

    columns = obstacle_columns(grid)
    side = res * _SCALE
    for ix, iy in columns:
        cx, cy = to_svg(grid.origin[:2] + np.array([ix, iy + 1]) * res)
        parts.append(
            f'<rect class="obstacle" x="{_fmt(cx)}" y="{_fmt(cy)}" '
            f'width="{_fmt(side)}" height="{_fmt(side)}" fill="#888888"/>'
        )

    if guide is not None and len(guide) >= 2:
        parts.append(_polyline([to_svg(p) for p in guide], "#2a9d2a", 2.0, "6,4"))
    for spline, stroke in ((phi_s, "#d62728"), (phi_f, "#1f77b4")):
        if spline is None:
            continue
        ts = np.linspace(0.0, spline.duration, _CURVE_SAMPLES)
        pts = spline.evaluate_many(ts, 0)
        parts.append(_polyline([to_svg(p) for p in pts], stroke, 2.5))

    for point, fill in ((start, "#2a9d2a"), (goal, "#d62728")):
        if point is None:
            continue
        x, y = to_svg(point)
        parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="{fill}"/>')

    parts.append("</svg>")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    return len(columns)
