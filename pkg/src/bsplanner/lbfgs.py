"""Limited-memory quasi-Newton minimizer with Armijo backtracking.

Gradient-only, warm-startable, and cheap to restart, which is what the
replanning loop needs.  The two-loop recursion approximates curvature
from the most recent (s, y) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_ARMIJO_C = 1e-4
_MAX_BACKTRACKS = 40


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    trace: list[float] = field(default_factory=list)
    status: str = "converged"


def minimize(
    fun_and_grad,
    x0,
    max_iterations: int = 200,
    gradient_tolerance: float = 1e-4,
    objective_tolerance: float = 1e-6,
    memory: int = 8,
    stall_iterations: int = 3,
) -> MinimizeResult:
    """Minimize f(x) given ``fun_and_grad(x) -> (f, g)``.

    Stops on gradient max-norm, on relative objective decrease staying
    below ``objective_tolerance`` for ``stall_iterations`` consecutive
    accepted steps, or on the iteration budget.
    """
    x = np.asarray(x0, dtype=float).copy()
    f, g = fun_and_grad(x)
    trace = [f]
    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    rho_list: list[float] = []
    stalled = 0
    status = "max_iterations"
    it = 0

    for it in range(1, max_iterations + 1):
        gmax = float(np.max(np.abs(g))) if g.size else 0.0
        if gmax < gradient_tolerance:
            status = "gradient"
            break

        d = _two_loop(g, s_list, y_list, rho_list)
        slope = float(d @ g)
        if slope >= 0.0:  # not a descent direction; fall back to steepest descent
            d = -g
            slope = float(d @ g)

        step = 1.0
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            x_new = x + step * d
            f_new, g_new = fun_and_grad(x_new)
            if np.isfinite(f_new) and f_new <= f + _ARMIJO_C * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            status = "line_search_failed"
            break

        s = x_new - x
        y = g_new - g
        ys = float(y @ s)
        if ys > 1e-12:
            s_list.append(s)
            y_list.append(y)
            rho_list.append(1.0 / ys)
            if len(s_list) > memory:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)

        rel_drop = (f - f_new) / max(abs(f), 1.0)
        stalled = stalled + 1 if rel_drop < objective_tolerance else 0
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        if stalled >= stall_iterations:
            status = "objective"
            break

    return MinimizeResult(x=x, fun=f, grad=g, iterations=it, trace=trace, status=status)


def _two_loop(g, s_list, y_list, rho_list) -> np.ndarray:
    q = -g.copy()
    if not s_list:
        return q
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    y_last, s_last = y_list[-1], s_list[-1]
    gamma = float(s_last @ y_last) / max(float(y_last @ y_last), 1e-300)
    q *= gamma
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q
