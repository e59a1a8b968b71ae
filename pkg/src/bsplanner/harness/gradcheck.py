"""Finite-difference verification of every analytic gradient."""

from __future__ import annotations

import numpy as np

from ..bspline import UniformBspline
from ..collision_anchor import AnchorPair, AnchorSet
from ..config import PlannerConfig
from ..optimizer import collision, feasibility, smoothness, total_objective
from ..refinement import FitWeights, fitting_term

TERMS = ("J_s", "J_c", "J_d", "J_f", "total")
TOLERANCE = 1e-5
_FD_EPS = 1e-6


def _random_spline(rng: np.random.Generator) -> UniformBspline:
    n = int(rng.integers(8, 13))
    dt = float(rng.uniform(0.3, 0.8))
    ctrl = np.cumsum(rng.normal(scale=0.5, size=(n, 3)), axis=0)
    return UniformBspline(dt, ctrl)


def _random_anchors(rng: np.random.Generator, n_ctrl: int) -> AnchorSet:
    anchors = AnchorSet()
    for i in rng.choice(np.arange(2, n_ctrl - 2), size=3, replace=False):
        for _ in range(int(rng.integers(1, 3))):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            anchors.add(int(i), AnchorPair(rng.normal(scale=1.0, size=3), v))
    return anchors


def _config(rng: np.random.Generator) -> PlannerConfig:
    return PlannerConfig(
        lambda_s=float(rng.uniform(0.5, 2.0)),
        lambda_c=float(rng.uniform(5.0, 20.0)),
        lambda_d=float(rng.uniform(0.5, 2.0)),
        s_f=float(rng.uniform(0.2, 0.5)),
        v_m=float(rng.uniform(1.0, 3.0)),
        a_m=float(rng.uniform(2.0, 4.0)),
        j_m=float(rng.uniform(5.0, 15.0)),
    )


def _fd_grad(fun, ctrl: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(ctrl)
    flat = ctrl.ravel()
    for k in range(flat.size):
        saved = flat[k]
        flat[k] = saved + _FD_EPS
        hi = fun(ctrl)
        flat[k] = saved - _FD_EPS
        lo = fun(ctrl)
        flat[k] = saved
        grad.ravel()[k] = (hi - lo) / (2.0 * _FD_EPS)
    return grad


def _rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.abs(numeric).max(), 1.0)
    return float(np.abs(analytic - numeric).max() / scale)


def gradcheck(seed: int = 0, instances: int = 20, corrupt: str | None = None) -> dict:
    """Max relative error per term over random instances.

    ``corrupt`` names a term whose analytic gradient is perturbed before
    comparison — a negative control that must fail.
    """
    rng = np.random.default_rng(seed)
    errors = {term: 0.0 for term in TERMS}
    for _ in range(instances):
        spline = _random_spline(rng)
        config = _config(rng)
        anchors = _random_anchors(rng, spline.n_ctrl)
        fit_ref = _random_spline(rng)
        weights = FitWeights(samples=24)

        def _term(name, fun_and_grad, mask_boundary=False):
            value, grad = fun_and_grad(spline.ctrl)
            if corrupt == name:
                grad = grad + 1e-3
            numeric = _fd_grad(lambda c: fun_and_grad(c)[0], spline.ctrl.copy())
            if mask_boundary:
                numeric[:3] = 0.0
                numeric[-3:] = 0.0
            errors[name] = max(errors[name], _rel_err(grad, numeric))

        _term("J_s", lambda c: smoothness(spline.with_ctrl(c)))
        _term("J_c", lambda c: collision(spline.with_ctrl(c), anchors, config))
        _term("J_d", lambda c: feasibility(spline.with_ctrl(c), config))
        _term("J_f", lambda c: fitting_term(spline.with_ctrl(c), fit_ref, weights))
        _term(
            "total",
            lambda c: total_objective(spline.with_ctrl(c), anchors, config),
            mask_boundary=True,
        )
    return errors


def report_lines(errors: dict) -> list[str]:
    lines = []
    for term in TERMS:
        err = errors[term]
        status = "ok" if err < TOLERANCE else "FAIL"
        lines.append(f"{term:6s} max_rel_err={err:.3e}  {status}")
    return lines


def passed(errors: dict) -> bool:
    return all(errors[term] < TOLERANCE for term in TERMS)
