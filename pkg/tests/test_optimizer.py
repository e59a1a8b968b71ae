import numpy as np
import pytest

from bsplanner.bspline import UniformBspline, fit_from_waypoints
from bsplanner.collision_anchor import AnchorPair, AnchorSet, signed_dist
from bsplanner.config import PlannerConfig, SolverConfig
from bsplanner.errors import PlanningFailedError
from bsplanner.graph_search import astar, prune_path
from bsplanner.grid_map import OccupancyGrid
from bsplanner.optimizer import (
    FIXED_BOUNDARY,
    collision,
    feasibility,
    optimize,
    smoothness,
    total_objective,
)

from conftest import make_grid, slab_grid


def random_spline(rng, n_ctrl=10, dt=0.5, scale=1.0):
    return UniformBspline(dt, scale * rng.normal(size=(n_ctrl, 3)))


def random_anchors(rng, n_ctrl):
    anchors = AnchorSet()
    for i in rng.choice(n_ctrl, size=4, replace=False):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        anchors.add(int(i), AnchorPair(p=rng.normal(size=3), v=v))
    return anchors


def fd_grad(fun, ctrl):
    grad = np.zeros_like(ctrl)
    for idx in np.ndindex(*ctrl.shape):
        h = 1e-6 * (1.0 + abs(ctrl[idx]))
        up = ctrl.copy()
        up[idx] += h
        dn = ctrl.copy()
        dn[idx] -= h
        grad[idx] = (fun(up) - fun(dn)) / (2 * h)
    return grad


def assert_grad_close(analytic, numeric, tol=1e-5):
    scale = max(np.abs(numeric).max(), 1.0)
    assert np.abs(analytic - numeric).max() / scale < tol


class TestSmoothness:
    def test_collinear_zero(self):
        ctrl = np.outer(np.arange(8, dtype=float), [1.0, 2.0, -1.0])
        value, grad = smoothness(UniformBspline(0.5, ctrl))
        assert value == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(grad, 0.0, atol=1e-12)

    def test_quadratic_homogeneity(self, rng):
        sp = random_spline(rng)
        v1, _ = smoothness(sp)
        v2, _ = smoothness(sp.with_ctrl(2.0 * sp.ctrl))
        assert v2 == pytest.approx(4.0 * v1, rel=1e-12)

    def test_gradient_matches_fd(self, rng):
        sp = random_spline(rng)
        _, grad = smoothness(sp)
        numeric = fd_grad(lambda c: smoothness(sp.with_ctrl(c))[0], sp.ctrl.copy())
        assert_grad_close(grad, numeric)


class TestCollision:
    def test_far_anchors_zero(self, rng):
        sp = random_spline(rng)
        config = PlannerConfig()
        anchors = AnchorSet()
        # anchor far behind every control point: d >> s_f
        anchors.add(4, AnchorPair(p=sp.ctrl[4] - np.array([10.0, 0, 0]),
                                  v=np.array([1.0, 0.0, 0.0])))
        value, grad = collision(sp, anchors, config)
        assert value == 0.0
        assert np.allclose(grad, 0.0)

    def test_gradient_matches_fd(self, rng):
        sp = random_spline(rng)
        config = PlannerConfig()
        anchors = random_anchors(rng, sp.n_ctrl)
        _, grad = collision(sp, anchors, config)
        numeric = fd_grad(
            lambda c: collision(sp.with_ctrl(c), anchors, config)[0], sp.ctrl.copy()
        )
        assert_grad_close(grad, numeric)

    def test_monotone_in_distance(self):
        # penalty never increases as the control point moves away from the surface
        config = PlannerConfig()
        pair = AnchorPair(p=np.zeros(3), v=np.array([1.0, 0.0, 0.0]))
        anchors = AnchorSet()
        anchors.add(0, pair)
        values = []
        for d in np.linspace(-1.0, 1.0, 41):
            ctrl = np.zeros((4, 3))
            ctrl[0, 0] = d
            sp = UniformBspline(0.5, ctrl)
            values.append(collision(sp, anchors, config)[0])
        assert np.all(np.diff(values) <= 1e-12)


class TestFeasibility:
    def test_within_limits_zero(self):
        config = PlannerConfig()
        ctrl = 0.1 * np.outer(np.arange(8, dtype=float), [1.0, 1.0, 1.0])
        value, grad = feasibility(UniformBspline(1.0, ctrl), config)
        assert value == 0.0
        assert np.allclose(grad, 0.0)

    def test_gradient_matches_fd(self, rng):
        config = PlannerConfig()
        sp = random_spline(rng, scale=2.0)  # large enough to violate limits
        _, grad = feasibility(sp, config)
        numeric = fd_grad(
            lambda c: feasibility(sp.with_ctrl(c), config)[0], sp.ctrl.copy()
        )
        assert_grad_close(grad, numeric)


class TestTotalObjective:
    def test_zero_weights(self, rng):
        sp = random_spline(rng)
        config = PlannerConfig(lambda_s=0.0, lambda_c=0.0, lambda_d=0.0)
        anchors = random_anchors(rng, sp.n_ctrl)
        value, grad = total_objective(sp, anchors, config)
        assert value == 0.0
        assert np.allclose(grad, 0.0)

    def test_additivity_without_collision(self, rng):
        sp = random_spline(rng, scale=2.0)
        config = PlannerConfig(lambda_c=0.0)
        value, _ = total_objective(sp, AnchorSet(), config)
        j_s, _ = smoothness(sp)
        j_d, _ = feasibility(sp, config)
        assert value == pytest.approx(
            config.lambda_s * j_s + config.lambda_d * j_d, rel=1e-12)

    def test_boundary_gradient_zero(self, rng):
        sp = random_spline(rng)
        config = PlannerConfig()
        _, grad = total_objective(sp, random_anchors(rng, sp.n_ctrl), config)
        assert np.allclose(grad[:FIXED_BOUNDARY], 0.0)
        assert np.allclose(grad[-FIXED_BOUNDARY:], 0.0)

    def test_gradient_matches_fd_on_interior(self, rng):
        sp = random_spline(rng)
        config = PlannerConfig()
        anchors = random_anchors(rng, sp.n_ctrl)
        _, grad = total_objective(sp, anchors, config)
        numeric = fd_grad(
            lambda c: total_objective(sp.with_ctrl(c), anchors, config)[0],
            sp.ctrl.copy(),
        )
        interior = slice(FIXED_BOUNDARY, sp.n_ctrl - FIXED_BOUNDARY)
        assert_grad_close(grad[interior], numeric[interior])


def _straight_fit(start, goal, n=8, dt=1.0):
    wps = np.linspace(start, goal, n)
    states = ((wps[0], np.zeros(3), np.zeros(3)), (wps[-1], np.zeros(3), np.zeros(3)))
    return fit_from_waypoints(wps, dt, *states)


def _wall_setup():
    """Wall across x in [2, 3) with a gap at y >= 6; straight line collides."""
    occ = np.zeros((20, 16, 4), dtype=bool)
    occ[4:6, :12, :] = True
    grid = OccupancyGrid(
        resolution=0.5, origin=np.zeros(3), dims=(20, 16, 4), occupancy=occ
    )
    start = np.array([0.75, 4.25, 1.25])
    goal = np.array([8.75, 4.25, 1.25])
    guide = prune_path(astar(grid, start, goal), grid)
    sp = _straight_fit(start, goal, n=10, dt=0.8)
    return grid, guide, sp


class TestOptimize:
    def test_free_map_keeps_feasible_start(self):
        grid = make_grid((20, 10, 4), resolution=0.5)
        start = np.array([0.75, 2.25, 1.25])
        goal = np.array([9.25, 2.25, 1.25])
        guide = astar(grid, start, goal)
        sp = _straight_fit(start, goal)
        result = optimize(sp, grid, prune_path(guide, grid), PlannerConfig())
        config = PlannerConfig()
        assert smoothness(result.spline)[0] <= smoothness(sp)[0] + 1e-9
        assert collision(result.spline, result.anchors, config)[0] == 0.0
        assert feasibility(result.spline, config)[0] == pytest.approx(0.0, abs=1e-12)

    def test_wall_scenario_reaches_clearance(self):
        grid, guide, sp = _wall_setup()
        config = PlannerConfig()
        result = optimize(sp, grid, guide, config)
        for i in result.anchors.indices():
            if FIXED_BOUNDARY <= i < result.spline.n_ctrl - FIXED_BOUNDARY:
                for pair in result.anchors.get(i):
                    assert signed_dist(result.spline.ctrl[i], pair) >= config.s_f - 1e-3

    def test_objective_trace_non_increasing_within_rounds(self):
        grid, guide, sp = _wall_setup()
        result = optimize(sp, grid, guide, PlannerConfig())
        assert result.traces
        for trace in result.traces:
            assert np.all(np.diff(trace) <= 1e-9)

    def test_rounds_exhausted_raises_with_best(self):
        grid, guide, sp = _wall_setup()
        starved = PlannerConfig(
            solver=SolverConfig(round_iterations=1, max_anchor_rounds=1))
        with pytest.raises(PlanningFailedError) as info:
            optimize(sp, grid, guide, starved)
        assert info.value.best is not None

    def test_boundary_states_preserved(self):
        grid, guide, sp = _wall_setup()
        result = optimize(sp, grid, guide, PlannerConfig())
        out = result.spline
        for k in range(3):
            assert np.allclose(out.evaluate(0.0, k), sp.evaluate(0.0, k), atol=1e-6)
            assert np.allclose(
                out.evaluate(out.duration, k), sp.evaluate(sp.duration, k), atol=1e-6)
