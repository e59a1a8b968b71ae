"""Cubic uniform B-spline trajectory representation.

A trajectory is a knot interval ``dt`` plus control points ``ctrl``
(N_c x 3).  Derivative control points follow the uniform difference rule:
V_i = (Q_{i+1} - Q_i)/dt, A_i = (V_{i+1} - V_i)/dt, J_i = (A_{i+1} - A_i)/dt,
and the order-k derivative curve is the degree-(3-k) uniform spline over
the k-th difference points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEGREE = 3

# Power-basis coefficient matrices for uniform B-spline segments:
# curve(u) = sum_k u^k * (M[k] @ window).
_M3 = np.array(
    [[1, 4, 1, 0], [-3, 0, 3, 0], [3, -6, 3, 0], [-1, 3, -3, 1]], dtype=float
) / 6.0
_M2 = np.array([[1, 1, 0], [-2, 2, 0], [1, -2, 1]], dtype=float) / 2.0
_M1 = np.array([[1, 0], [-1, 1]], dtype=float)
_M0 = np.array([[1]], dtype=float)
_BASIS = {3: _M3, 2: _M2, 1: _M1, 0: _M0}


@dataclass(frozen=True)
class UniformBspline:
    dt: float
    ctrl: np.ndarray  # (N_c, 3)

    def __post_init__(self):
        ctrl = np.ascontiguousarray(self.ctrl, dtype=float)
        if ctrl.ndim != 2 or ctrl.shape[1] != 3:
            raise InvalidInputError("control points must be (N_c, 3)")
        if ctrl.shape[0] < DEGREE + 1:
            raise InvalidInputError("need at least 4 control points")
        if self.dt <= 0:
            raise InvalidInputError("knot interval must be positive")
        ctrl.setflags(write=False)
        object.__setattr__(self, "ctrl", ctrl)

    @property
    def n_ctrl(self) -> int:
        return self.ctrl.shape[0]

    @property
    def duration(self) -> float:
        return (self.n_ctrl - DEGREE) * self.dt

    def with_ctrl(self, ctrl) -> "UniformBspline":
        return UniformBspline(self.dt, np.asarray(ctrl, dtype=float))

    def with_dt(self, dt: float) -> "UniformBspline":
        return UniformBspline(dt, self.ctrl)

    # -- derivative control points ------------------------------------------

    def derivative_ctrl_points(self):
        """(V, A, J) difference control points; lengths N_c-1, N_c-2, N_c-3."""
        v = np.diff(self.ctrl, axis=0) / self.dt
        a = np.diff(v, axis=0) / self.dt
        j = np.diff(a, axis=0) / self.dt
        return v, a, j

    def _points_for_order(self, order: int) -> np.ndarray:
        pts = self.ctrl
        for _ in range(order):
            pts = np.diff(pts, axis=0) / self.dt
        return pts

    # -- evaluation ----------------------------------------------------------

    def _segment(self, t: float):
        if not -1e-9 <= t <= self.duration + 1e-9:
            raise InvalidInputError(f"t={t} outside [0, {self.duration}]")
        n_seg = self.n_ctrl - DEGREE
        seg = min(max(int(t / self.dt), 0), n_seg - 1)
        u = t / self.dt - seg
        return seg, min(max(u, 0.0), 1.0)

    def evaluate(self, t: float, order: int = 0) -> np.ndarray:
        """Position (order 0) or derivative of the given order at time t."""
        if not 0 <= order <= DEGREE:
            raise InvalidInputError("order must be in 0..3")
        seg, u = self._segment(t)
        deg = DEGREE - order
        pts = self._points_for_order(order)
        powers = u ** np.arange(deg + 1)
        weights = powers @ _BASIS[deg]
        return weights @ pts[seg : seg + deg + 1]

    def evaluate_many(self, ts, order: int = 0) -> np.ndarray:
        return np.array([self.evaluate(t, order) for t in np.asarray(ts, dtype=float)])

    def position_basis(self, t: float):
        """(window start index, 4 basis weights) of the position at time t.

        The position is ``weights @ ctrl[start:start+4]``; gradients of
        sampled-position objectives distribute through these weights.
        """
        seg, u = self._segment(t)
        powers = u ** np.arange(DEGREE + 1)
        return seg, powers @ _M3

    def greville_time(self, i: int) -> float:
        """Curve parameter associated with control point i, clamped to [0, T]."""
        return min(max((i - 1) * self.dt, 0.0), self.duration)


def derivative_ctrl_points(spline: UniformBspline):
    return spline.derivative_ctrl_points()


def evaluate(spline: UniformBspline, t: float, order: int = 0) -> np.ndarray:
    return spline.evaluate(t, order)


def boundary_ctrl_points(pos, vel, acc, dt: float) -> np.ndarray:
    """Three consecutive control points realizing pos/vel/acc at a curve end.

    Inverts the cubic end-point relations: p = (Q_a + 4 Q_b + Q_c)/6,
    v = (Q_c - Q_a)/(2 dt), a = (Q_c - 2 Q_b + Q_a)/dt^2.  The same ordering
    (increasing index) applies at both ends.
    """
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    acc = np.asarray(acc, dtype=float)
    q_mid = pos - acc * dt * dt / 6.0
    lo = q_mid + acc * dt * dt / 2.0 - vel * dt
    hi = q_mid + acc * dt * dt / 2.0 + vel * dt
    return np.stack([lo, q_mid, hi])


def fit_from_waypoints(waypoints, dt: float, start_state, goal_state) -> UniformBspline:
    """Fit a cubic spline through waypoints with pinned boundary states.

    ``start_state``/``goal_state`` are (pos, vel, acc) triples.  The first
    and last three control points are solved from the boundary relations;
    interior points come from a least-squares pass over chord-length
    waypoint parameters.
    """
    wps = np.asarray(waypoints, dtype=float).reshape(-1, 3)
    m = len(wps)
    if m < 2:
        raise InvalidInputError("need at least 2 waypoints")
    if dt <= 0:
        raise InvalidInputError("dt must be positive")

    n = m + 4
    ctrl = np.zeros((n, 3))
    ctrl[:3] = boundary_ctrl_points(*start_state, dt)
    ctrl[-3:] = boundary_ctrl_points(*goal_state, dt)

    spline = UniformBspline(dt, ctrl.copy())
    if n == 6:
        return spline

    duration = spline.duration
    chords = np.linalg.norm(np.diff(wps, axis=0), axis=1)
    total = chords.sum()
    if total > 0:
        fractions = np.concatenate([[0.0], np.cumsum(chords)]) / total
    else:
        fractions = np.linspace(0.0, 1.0, m)
    at_rest = (
        np.linalg.norm(start_state[1]) < 1e-9 and np.linalg.norm(goal_state[1]) < 1e-9
    )
    if at_rest:
        # Rest-to-rest time law: arc fraction follows the smoothstep
        # 3 tau^2 - 2 tau^3, so invert it to place waypoint parameters.
        taus = np.linspace(0.0, 1.0, 1001)
        fractions = np.interp(fractions, 3 * taus**2 - 2 * taus**3, taus)
    params = fractions * duration

    # Rows: interior waypoints; unknowns: interior control points 3..n-4.
    n_unknown = n - 6
    a_mat = np.zeros((m - 2, n_unknown))
    rhs = wps[1:-1].copy()
    for row, t in enumerate(params[1:-1]):
        seg, w = spline.position_basis(t)
        for k in range(4):
            col = seg + k
            if 3 <= col <= n - 4:
                a_mat[row, col - 3] = w[k]
            else:
                rhs[row] -= w[k] * ctrl[col]

    # Curvature regularization: the rest-boundary pinning makes the plain
    # square system ill-conditioned (waypoints near t=0 are governed almost
    # entirely by pinned points), so penalize second differences lightly.
    mu = 1e-2
    reg_rows = []
    reg_rhs = []
    for i in range(1, n - 1):
        row = np.zeros(n_unknown)
        target = np.zeros(3)
        for col, coef in ((i - 1, 1.0), (i, -2.0), (i + 1, 1.0)):
            if 3 <= col <= n - 4:
                row[col - 3] = coef
            else:
                target -= coef * ctrl[col]
        if row.any():
            reg_rows.append(mu * row)
            reg_rhs.append(mu * target)
    a_full = np.vstack([a_mat, np.asarray(reg_rows)])
    rhs_full = np.vstack([rhs, np.asarray(reg_rhs)])
    solution, *_ = np.linalg.lstsq(a_full, rhs_full, rcond=None)
    ctrl[3 : n - 3] = solution
    return UniformBspline(dt, ctrl)
