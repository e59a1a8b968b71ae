"""Time reallocation and anisotropic refit.

After the collision-aware solve, the knot interval is stretched by the
limit-exceeding rate so every velocity/acceleration/jerk difference point
falls back inside its limit, then the control points are re-optimized
against the frozen reference trajectory with a low-weight axial /
high-weight radial displacement integral holding the shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lbfgs
from .bspline import UniformBspline, boundary_ctrl_points
from .config import PlannerConfig
from .errors import InvalidInputError
from .optimizer import FIXED_BOUNDARY, feasibility, smoothness

_ZERO_TANGENT = 1e-9


@dataclass(frozen=True)
class FitWeights:
    w_a: float = 10.0  # axial (along-tangent) displacement weight, low
    w_r: float = 100.0  # radial displacement weight, high
    samples: int | None = None  # None -> 2 * N_c at use

    def __post_init__(self):
        if self.w_a < 0 or self.w_r < self.w_a:
            raise InvalidInputError("need w_r >= w_a >= 0")
        if self.samples is not None and self.samples < 2:
            raise InvalidInputError("need at least 2 integral samples")


def exceed_ratio(spline: UniformBspline, config: PlannerConfig) -> float:
    """Largest limit-violation factor across V, A, J components, floored at 1.

    Acceleration and jerk ratios enter under square and cube roots because
    stretching the knot interval by r scales them by 1/r^2 and 1/r^3.
    """
    v, a, j = spline.derivative_ctrl_points()
    r = 1.0
    if v.size:
        r = max(r, float(np.abs(v).max()) / config.v_m)
    if a.size:
        r = max(r, float(np.sqrt(np.abs(a).max() / config.a_m)))
    if j.size:
        r = max(r, float(np.cbrt(np.abs(j).max() / config.j_m)))
    return r


def reallocate(spline: UniformBspline, config: PlannerConfig) -> UniformBspline:
    """Same control points with the knot interval stretched by the exceed ratio."""
    r = exceed_ratio(spline, config)
    if r == 1.0:
        return spline
    return spline.with_dt(r * spline.dt)


def fitting_term(phi_f: UniformBspline, phi_s: UniformBspline, weights: FitWeights):
    """Anisotropic displacement integral between the refit and reference curves.

    Sampled at uniform fractions of both durations with trapezoid weights;
    the displacement splits along the reference tangent (axial, weight w_a)
    and perpendicular to it (radial, weight w_r).  Returns the value and
    its gradient w.r.t. the refit curve's control points.
    """
    n_samples = weights.samples if weights.samples is not None else 2 * phi_f.n_ctrl
    alphas = np.linspace(0.0, 1.0, n_samples)
    quad = np.full(n_samples, 1.0 / (n_samples - 1))
    quad[0] *= 0.5
    quad[-1] *= 0.5

    t_f = phi_f.duration
    t_s = phi_s.duration
    value = 0.0
    grad = np.zeros((phi_f.n_ctrl, 3))

    for alpha, w_q in zip(alphas, quad):
        e = phi_f.evaluate(alpha * t_f) - phi_s.evaluate(alpha * t_s)
        tangent = phi_s.evaluate(alpha * t_s, 1)
        norm = float(np.linalg.norm(tangent))
        if norm < _ZERO_TANGENT:
            d_axial = 0.0
            that = np.zeros(3)
        else:
            that = tangent / norm
            d_axial = float(e @ that)
        radial = e - d_axial * that
        value += w_q * (weights.w_a * d_axial**2 + weights.w_r * float(radial @ radial))
        de = 2.0 * weights.w_a * d_axial * that + 2.0 * weights.w_r * radial
        seg, basis = phi_f.position_basis(alpha * t_f)
        for k in range(4):
            grad[seg + k] += w_q * basis[k] * de
    return value, grad


@dataclass
class RefineResult:
    spline: UniformBspline
    fallback: bool = False  # solver failed; reallocated spline returned as-is
    trace: list[float] = field(default_factory=list)


def _pin_boundary(ctrl: np.ndarray, states, dt: float) -> np.ndarray:
    (p0, v0, a0), (p1, v1, a1) = states
    out = ctrl.copy()
    out[:3] = boundary_ctrl_points(p0, v0, a0, dt)
    out[-3:] = boundary_ctrl_points(p1, v1, a1, dt)
    return out


def refine(
    phi_s: UniformBspline, config: PlannerConfig, weights: FitWeights | None = None
) -> RefineResult:
    """Reallocate time, then refit control points against the frozen reference.

    The refit objective is smoothness + feasibility + the anisotropic
    fitting term; boundary control points are re-pinned to the reference's
    end states at the stretched knot interval.  A final exact rescale
    guards the hard limit when the soft feasibility penalty leaves a
    residual violation.
    """
    if weights is None:
        weights = FitWeights()
    duration = phi_s.duration
    states = (
        tuple(phi_s.evaluate(0.0, k) for k in range(3)),
        tuple(phi_s.evaluate(duration, k) for k in range(3)),
    )

    current = reallocate(phi_s, config)
    # Re-pinning boundary points at the new dt can nudge a difference point
    # back over a limit; iterate the (rescale, re-pin) pair to a fixed point.
    for _ in range(5):
        current = current.with_ctrl(_pin_boundary(current.ctrl, states, current.dt))
        r = exceed_ratio(current, config)
        if r <= 1.0 + 1e-9:
            break
        current = current.with_dt(r * current.dt)

    n = current.n_ctrl
    if n <= 2 * FIXED_BOUNDARY:
        return RefineResult(current)

    fixed = current.ctrl.copy()
    interior = slice(FIXED_BOUNDARY, n - FIXED_BOUNDARY)
    dt_new = current.dt

    def assemble(x: np.ndarray) -> UniformBspline:
        ctrl = fixed.copy()
        ctrl[interior] = x.reshape(-1, 3)
        return UniformBspline(dt_new, ctrl)

    def fun_and_grad(x: np.ndarray):
        s = assemble(x)
        j_s, g_s = smoothness(s)
        j_d, g_d = feasibility(s, config)
        j_f, g_f = fitting_term(s, phi_s, weights)
        value = config.lambda_s * j_s + config.lambda_d * j_d + config.lambda_f * j_f
        grad = config.lambda_s * g_s + config.lambda_d * g_d + config.lambda_f * g_f
        return value, grad[interior].ravel()

    solver = config.solver
    try:
        res = lbfgs.minimize(
            fun_and_grad,
            current.ctrl[interior].ravel(),
            max_iterations=solver.max_iterations,
            gradient_tolerance=solver.gradient_tolerance,
            objective_tolerance=solver.objective_tolerance,
            memory=solver.memory,
        )
    except FloatingPointError:
        return RefineResult(current, fallback=True)
    if not np.all(np.isfinite(res.x)):
        return RefineResult(current, fallback=True)

    result = assemble(res.x)
    # Final guard: the feasibility term is soft, the contract is hard.
    for _ in range(5):
        r = exceed_ratio(result, config)
        if r <= 1.0 + 1e-9:
            break
        result = UniformBspline(
            r * result.dt, _pin_boundary(result.ctrl, states, r * result.dt)
        )
    return RefineResult(result, fallback=False, trace=res.trace)
