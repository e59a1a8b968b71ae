"""Obstacle anchor pairs {p, v}: the distance-field replacement.

Each in-collision control point gets one or more pairs of an
obstacle-surface point ``p`` and a unit repulsion direction ``v`` derived
from the collision-free guide path.  The signed plane distance
``(Q - p) . v`` then stands in for an ESDF query in the collision penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bspline import UniformBspline
from .errors import AnchorFallbackError, DegenerateDirectionError, PreconditionError
from .grid_map import OccupancyGrid

_MIN_DIRECTION = 1e-9


@dataclass(frozen=True)
class AnchorPair:
    p: np.ndarray  # (3,) obstacle-surface point
    v: np.ndarray  # (3,) unit repulsion direction

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        v = np.asarray(self.v, dtype=float)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > 1e-12:
            v = v / norm
        for arr in (p, v):
            arr.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "v", v)


@dataclass
class AnchorSet:
    """Per-control-point anchor lists with a size cap and direction dedup."""

    cap: int = 8
    dedup_angle: float = math.radians(10.0)
    _pairs: dict[int, list[AnchorPair]] = field(default_factory=dict)

    def add(self, index: int, pair: AnchorPair) -> bool:
        pairs = self._pairs.setdefault(index, [])
        if len(pairs) >= self.cap:
            return False
        cos_limit = math.cos(self.dedup_angle)
        for existing in pairs:
            if float(existing.v @ pair.v) >= cos_limit:
                return False
        pairs.append(pair)
        return True

    def get(self, index: int) -> tuple[AnchorPair, ...]:
        return tuple(self._pairs.get(index, ()))

    def items(self):
        return self._pairs.items()

    def indices(self):
        return sorted(self._pairs)

    def total(self) -> int:
        return sum(len(v) for v in self._pairs.values())

    def prune(self, keep) -> int:
        """Drop pairs where ``keep(index, pair)`` is false; return drop count."""
        dropped = 0
        for index in list(self._pairs):
            kept = [p for p in self._pairs[index] if keep(index, p)]
            dropped += len(self._pairs[index]) - len(kept)
            if kept:
                self._pairs[index] = kept
            else:
                del self._pairs[index]
        return dropped


def signed_dist(q, pair: AnchorPair) -> float:
    """Signed plane distance (Q - p) . v: negative on the obstacle side."""
    return float((np.asarray(q, dtype=float) - pair.p) @ pair.v)


def find_collision_segments(spline: UniformBspline, grid: OccupancyGrid):
    """Maximal runs of control-point indices that sit in occupied cells.

    Curve samples at the midpoint between consecutive control points'
    curve parameters are checked too, so thin violations between control
    points still flag both neighbors.
    """
    n = spline.n_ctrl
    flagged = np.zeros(n, dtype=bool)
    for i in range(n):
        if grid.is_occupied(spline.ctrl[i]):
            flagged[i] = True
    for i in range(n - 1):
        t_mid = 0.5 * (spline.greville_time(i) + spline.greville_time(i + 1))
        if grid.is_occupied(spline.evaluate(t_mid)):
            flagged[i] = True
            flagged[i + 1] = True

    segments = []
    start = None
    for i in range(n):
        if flagged[i] and start is None:
            start = i
        elif not flagged[i] and start is not None:
            segments.append((start, i - 1))
            start = None
    if start is not None:
        segments.append((start, n - 1))
    return segments


def _plane_crossing(q, guide, tangent):
    """First crossing of the guide polyline through the plane at q normal to tangent."""
    side = (guide - q) @ tangent
    for k in range(len(side)):
        if side[k] == 0.0:
            return guide[k]
        if k + 1 < len(side) and side[k] * side[k + 1] < 0.0:
            w = side[k] / (side[k] - side[k + 1])
            return guide[k] + w * (guide[k + 1] - guide[k])
    return None


def nearest_point_on_path(q, guide) -> np.ndarray:
    """Closest point of the polyline to q (segment-wise projection)."""
    q = np.asarray(q, dtype=float)
    guide = np.asarray(guide, dtype=float)
    if len(guide) == 1:
        return guide[0]
    best = guide[0]
    best_d2 = math.inf
    for k in range(len(guide) - 1):
        a, b = guide[k], guide[k + 1]
        ab = b - a
        denom = float(ab @ ab)
        w = 0.0 if denom == 0.0 else min(max(float((q - a) @ ab) / denom, 0.0), 1.0)
        cand = a + w * ab
        d2 = float((cand - q) @ (cand - q))
        if d2 < best_d2:
            best_d2 = d2
            best = cand
    return best


def _pair_toward(q, target, grid: OccupancyGrid) -> AnchorPair:
    direction = np.asarray(target, dtype=float) - q
    dist = float(np.linalg.norm(direction))
    if dist < _MIN_DIRECTION:
        raise DegenerateDirectionError("crossing point coincides with control point")
    v = direction / dist
    p = grid.last_surface_exit(q, target)
    if p is None:
        # q's cell turned out free along the whole ray; anchor on q itself
        # so the pair still repels with clearance s_f.
        p = q.copy()
    return AnchorPair(p=p, v=v)


def generate_anchor(q_i, guide, tangent, grid: OccupancyGrid) -> AnchorPair:
    """Anchor for an in-collision control point from the guide path.

    The plane through ``q_i`` perpendicular to ``tangent`` is intersected
    with the guide polyline; the first crossing fixes the repulsion
    direction, and the surface point is the last exit out of occupied
    space along that ray.
    """
    q = np.asarray(q_i, dtype=float)
    tangent = np.asarray(tangent, dtype=float)
    if np.linalg.norm(tangent) <= 0.0:
        raise PreconditionError("tangent must be nonzero")
    guide = np.asarray(guide, dtype=float)
    crossing = _plane_crossing(q, guide, tangent)
    if crossing is None:
        raise AnchorFallbackError("guide path never crosses the control-point plane")
    return _pair_toward(q, crossing, grid)


def generate_anchor_with_fallback(q_i, guide, tangent, grid: OccupancyGrid) -> AnchorPair:
    """generate_anchor, falling back to the nearest-guide-point direction."""
    q = np.asarray(q_i, dtype=float)
    try:
        if np.linalg.norm(tangent) <= _MIN_DIRECTION:
            raise AnchorFallbackError("degenerate tangent")
        return generate_anchor(q, guide, tangent, grid)
    except (AnchorFallbackError, DegenerateDirectionError):
        return _pair_toward(q, nearest_point_on_path(q, guide), grid)
