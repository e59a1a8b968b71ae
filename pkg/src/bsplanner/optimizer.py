"""Penalty-based trajectory optimization over B-spline control points.

The objective is a weighted sum of a smoothness term (squared second and
third difference points), a collision term driven by anchor pairs, and a
per-axis feasibility term on velocity/acceleration/jerk difference points.
All gradients are analytic; the solve is the limited-memory quasi-Newton
driver with fresh anchors generated whenever the deformed spline picks up
new collisions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from . import lbfgs
from .bspline import UniformBspline
from .collision_anchor import (
    AnchorSet,
    DegenerateDirectionError,
    find_collision_segments,
    generate_anchor_with_fallback,
    signed_dist,
)
from .config import PlannerConfig
from .errors import PlanningFailedError
from .grid_map import OccupancyGrid

# Difference-stencil coefficients per derivative order.
_STENCILS = {1: (-1.0, 1.0), 2: (1.0, -2.0, 1.0), 3: (-1.0, 3.0, -3.0, 1.0)}

FIXED_BOUNDARY = 3  # control points pinned at each end


def _diff_points(ctrl: np.ndarray, order: int, dt: float) -> np.ndarray:
    pts = ctrl
    for _ in range(order):
        pts = np.diff(pts, axis=0) / dt
    return pts


def _diff_adjoint(g: np.ndarray, order: int, dt: float, n: int) -> np.ndarray:
    """Adjoint of the order-th difference operator: scatter g back onto Q."""
    out = np.zeros((n, 3))
    coeffs = _STENCILS[order]
    scale = dt**order
    for k, c in enumerate(coeffs):
        out[k : k + len(g)] += (c / scale) * g
    return out


def smoothness(spline: UniformBspline):
    """Sum of squared acceleration and jerk difference points, with gradient."""
    acc = _diff_points(spline.ctrl, 2, spline.dt)
    jerk = _diff_points(spline.ctrl, 3, spline.dt)
    value = float((acc * acc).sum() + (jerk * jerk).sum())
    n = spline.n_ctrl
    grad = _diff_adjoint(2.0 * acc, 2, spline.dt, n)
    grad += _diff_adjoint(2.0 * jerk, 3, spline.dt, n)
    return value, grad


def _collision_branch(c: float, s_f: float):
    """Piecewise collision penalty and its derivative in c."""
    if c <= 0.0:
        return 0.0, 0.0
    if c <= s_f:
        return c**3, 3.0 * c * c
    return 3.0 * s_f * c * c - 3.0 * s_f * s_f * c + s_f**3, 6.0 * s_f * c - 3.0 * s_f * s_f


def collision(spline: UniformBspline, anchors: AnchorSet, config: PlannerConfig):
    """Anchor-pair collision penalty: c = s_f - (Q - p) . v per pair."""
    value = 0.0
    grad = np.zeros((spline.n_ctrl, 3))
    for i, pairs in anchors.items():
        q = spline.ctrl[i]
        for pair in pairs:
            c = config.s_f - signed_dist(q, pair)
            j, dj_dc = _collision_branch(c, config.s_f)
            value += j
            # dc/dQ = -v, so the control-point gradient is -dj_dc * v.
            grad[i] -= dj_dc * pair.v
    return value, grad


def _tail_coeffs(b: float, cj: float):
    """Quadratic-tail coefficients matching (c - b)^3 in value, slope, curvature at cj."""
    s = cj - b
    a2 = 3.0 * s
    b2 = 3.0 * s * s - 6.0 * s * cj
    c2 = s**3 - a2 * cj * cj - b2 * cj
    return a2, b2, c2


def _axis_penalty(c: np.ndarray, limit: float, lambda_e: float, c_j_factor: float):
    """Per-component feasibility penalty f(c) and df/dc, vectorized."""
    b = lambda_e * limit
    cj = c_j_factor * b
    a2, b2, c2 = _tail_coeffs(b, cj)

    f = np.zeros_like(c)
    df = np.zeros_like(c)

    hi_cubic = (c > b) & (c < cj)
    f[hi_cubic] = (c[hi_cubic] - b) ** 3
    df[hi_cubic] = 3.0 * (c[hi_cubic] - b) ** 2
    hi_quad = c >= cj
    f[hi_quad] = a2 * c[hi_quad] ** 2 + b2 * c[hi_quad] + c2
    df[hi_quad] = 2.0 * a2 * c[hi_quad] + b2

    lo_cubic = (c < -b) & (c > -cj)
    f[lo_cubic] = (-b - c[lo_cubic]) ** 3
    df[lo_cubic] = -3.0 * (-b - c[lo_cubic]) ** 2
    lo_quad = c <= -cj
    # Even extension of the upper tail: a1 = a2, b1 = -b2, c1 = c2.
    f[lo_quad] = a2 * c[lo_quad] ** 2 - b2 * c[lo_quad] + c2
    df[lo_quad] = 2.0 * a2 * c[lo_quad] - b2

    return f, df


def feasibility(spline: UniformBspline, config: PlannerConfig):
    """Per-axis limit penalty over V, A, J difference points, with gradient."""
    value = 0.0
    grad = np.zeros((spline.n_ctrl, 3))
    for order in (1, 2, 3):
        pts = _diff_points(spline.ctrl, order, spline.dt)
        f, df = _axis_penalty(
            pts, config.limit(order), config.lambda_e, config.c_j_factor
        )
        value += float(f.sum())
        grad += _diff_adjoint(df, order, spline.dt, spline.n_ctrl)
    return value, grad


def total_objective(spline: UniformBspline, anchors: AnchorSet, config: PlannerConfig):
    """Weighted objective and gradient; boundary control points carry zero gradient."""
    j_s, g_s = smoothness(spline)
    j_c, g_c = collision(spline, anchors, config)
    j_d, g_d = feasibility(spline, config)
    value = config.lambda_s * j_s + config.lambda_c * j_c + config.lambda_d * j_d
    grad = config.lambda_s * g_s + config.lambda_c * g_c + config.lambda_d * g_d
    grad[:FIXED_BOUNDARY] = 0.0
    grad[-FIXED_BOUNDARY:] = 0.0
    return value, grad


@dataclass
class OptimizeResult:
    spline: UniformBspline
    anchors: AnchorSet
    rounds: int
    traces: list[list[float]] = field(default_factory=list)  # objective per round

    @property
    def trace(self) -> list[float]:
        return [f for t in self.traces for f in t]


def _anchor_tangent(spline: UniformBspline, index: int) -> np.ndarray:
    return spline.evaluate(spline.greville_time(index), 1)


def _add_anchors(spline, grid, guide, anchors: AnchorSet, segments) -> int:
    n = spline.n_ctrl
    added = 0
    for lo, hi in segments:
        for i in range(max(lo, FIXED_BOUNDARY), min(hi, n - FIXED_BOUNDARY - 1) + 1):
            try:
                pair = generate_anchor_with_fallback(
                    spline.ctrl[i], guide, _anchor_tangent(spline, i), grid
                )
            except DegenerateDirectionError:
                continue
            if anchors.add(i, pair):
                added += 1
    return added


def _clearance_violation(spline: UniformBspline, anchors: AnchorSet, s_f: float) -> float:
    """Worst shortfall of anchored interior control points below s_f clearance."""
    n = spline.n_ctrl
    worst = 0.0
    for i, pairs in anchors.items():
        if i < FIXED_BOUNDARY or i >= n - FIXED_BOUNDARY:
            continue
        for pair in pairs:
            worst = max(worst, s_f - signed_dist(spline.ctrl[i], pair))
    return worst


def _smooth_preconditioner(n: int, dt: float, lambda_s: float) -> np.ndarray:
    """Cholesky factor of the interior smoothness Hessian.

    The smoothness term is quadratic in the control points with Hessian
    2*lambda_s*(D2'D2/dt^4 + D3'D3/dt^6); its condition number grows like
    n^6, which stalls the quasi-Newton solve.  Changing variables to
    y = L' x with L L' the interior block of that Hessian makes the
    smoothness term an identity quadratic and the solve converges in tens
    of iterations instead of thousands.
    """
    eye = np.eye(n)
    d2 = np.diff(eye, n=2, axis=0) / dt**2
    d3 = np.diff(eye, n=3, axis=0) / dt**3
    h = 2.0 * max(lambda_s, 1e-8) * (d2.T @ d2 + d3.T @ d3)
    interior = np.arange(FIXED_BOUNDARY, n - FIXED_BOUNDARY)
    h = h[np.ix_(interior, interior)] + 1e-8 * np.eye(len(interior))
    return sla.cholesky(h, lower=True)


def optimize(
    spline: UniformBspline,
    grid: OccupancyGrid,
    guide,
    config: PlannerConfig,
) -> OptimizeResult:
    """Minimize the weighted objective, regrowing anchors between rounds.

    ``guide`` is the collision-free waypoint polyline (a SearchResult path
    or a pruned version of it).  Each round runs a short preconditioned
    quasi-Newton solve, then re-detects collisions: colliding stretches get
    fresh anchor pairs, stale pairs are pruned, and the collision weight is
    escalated only when several consecutive rounds fail to clear the curve.
    Once collision-free, remaining clearance shortfall below ``s_f`` drives
    further weight escalation.  Raises PlanningFailedError with the best
    iterate when the round budget runs out with collisions remaining.
    """
    guide = np.asarray(guide, dtype=float).reshape(-1, 3)
    anchors = AnchorSet()
    n = spline.n_ctrl
    current = spline
    traces: list[list[float]] = []
    solver = config.solver
    weight = config.lambda_c
    stall = 0

    segments = find_collision_segments(current, grid)
    _add_anchors(current, grid, guide, anchors, segments)

    for rounds in range(1, solver.max_anchor_rounds + 1):
        round_config = replace(config, lambda_c=weight)
        current, res = _minimize_interior(current, anchors, round_config)
        traces.append(res.trace)

        # Drop pairs that can only fight this round's geometry: points still
        # inside an obstacle get their pairs regenerated from the current
        # curve (stops contradictory push directions from accumulating), and
        # free points shed pairs they have escaped far behind (the point went
        # around the obstacle, the plane no longer separates anything).
        anchors.prune(
            lambda i, pair: not grid.is_occupied(current.ctrl[i])
            and signed_dist(current.ctrl[i], pair) > -grid.resolution
        )

        segments = find_collision_segments(current, grid)
        movable = [
            (lo, hi)
            for lo, hi in segments
            if hi >= FIXED_BOUNDARY and lo <= n - FIXED_BOUNDARY - 1
        ]
        if movable:
            _add_anchors(current, grid, guide, anchors, movable)
            stall += 1
            if stall >= solver.stall_rounds:
                weight = min(weight * solver.escalation, solver.max_weight)
                stall = 0
            continue
        stall = 0
        if _clearance_violation(current, anchors, config.s_f) <= solver.clearance_slack:
            return OptimizeResult(current, anchors, rounds, traces)
        weight = min(weight * solver.clearance_escalation, solver.max_weight)

    result = OptimizeResult(current, anchors, solver.max_anchor_rounds, traces)
    if movable:
        raise PlanningFailedError(
            f"collisions remain after {solver.max_anchor_rounds} anchor rounds",
            best=result,
        )
    return result  # collision-free; clearance slack unmet within the budget


def _minimize_interior(
    spline: UniformBspline,
    anchors: AnchorSet,
    config: PlannerConfig,
):
    n = spline.n_ctrl
    fixed = spline.ctrl.copy()
    interior = slice(FIXED_BOUNDARY, n - FIXED_BOUNDARY)

    if n <= 2 * FIXED_BOUNDARY:
        value, _ = total_objective(spline, anchors, config)
        return spline, lbfgs.MinimizeResult(
            x=np.empty(0), fun=value, grad=np.empty(0), iterations=0, trace=[value]
        )

    lower = _smooth_preconditioner(n, spline.dt, config.lambda_s)

    def assemble(y: np.ndarray) -> UniformBspline:
        ctrl = fixed.copy()
        ctrl[interior] = sla.solve_triangular(lower.T, y.reshape(-1, 3), lower=False)
        return spline.with_ctrl(ctrl)

    def fun_and_grad(y: np.ndarray):
        s = assemble(y)
        value, grad = total_objective(s, anchors, config)
        g_y = sla.solve_triangular(lower, grad[interior], lower=True)
        return value, g_y.ravel()

    solver = config.solver
    y0 = (lower.T @ spline.ctrl[interior]).ravel()
    res = lbfgs.minimize(
        fun_and_grad,
        y0,
        max_iterations=solver.round_iterations,
        gradient_tolerance=solver.gradient_tolerance,
        objective_tolerance=solver.objective_tolerance,
        memory=solver.memory,
    )
    return assemble(res.x), res
