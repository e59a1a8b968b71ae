"""Single-shot planning pipeline: search, prune, fit, optimize, refine."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..bspline import UniformBspline, fit_from_waypoints
from ..collision_anchor import signed_dist
from ..errors import NoPathError, PlanningFailedError
from ..graph_search import SearchResult, bidirectional_astar, prune_path
from ..grid_map import OccupancyGrid
from ..optimizer import optimize
from ..refinement import FitWeights, exceed_ratio, refine
from .scenario import Scenario
from .trajcsv import write_trajectory_csv

SAFETY_SAMPLES = 200

# Extra inflation for the guide-path search: routing the guide through
# corridors at least this much wider than strictly necessary leaves the
# optimizer room to hold the s_f clearance.  The optimizer itself still
# works against the plain inflated grid; if the widened grid disconnects
# start from goal the search falls back to the plain grid.
_WIDE_MARGIN = 0.2

# The anisotropic refit can drift radially off the collision-free reference;
# when the refit clips an obstacle, retry with the fitting weights scaled up.
_REFIT_SCALES = (1.0, 10.0, 100.0)


@dataclass
class PlanReport:
    search: SearchResult
    guide: np.ndarray
    phi_s: UniformBspline
    phi_f: UniformBspline
    timings: dict[str, float]
    traces: list[list[float]]
    clearance_min: float  # min anchor signed distance at phi_s control points
    exceed_final: float
    refine_fallback: bool
    free_samples: int  # of SAFETY_SAMPLES positions of phi_f in free cells

    @property
    def success(self) -> bool:
        return self.free_samples == SAFETY_SAMPLES

    def summary(self) -> dict:
        return {
            "search_cost_m": self.search.cost,
            "search_expanded": self.search.expanded,
            "guide_waypoints": int(len(self.guide)),
            "phi_s": {"n_ctrl": self.phi_s.n_ctrl, "dt": self.phi_s.dt,
                      "duration": self.phi_s.duration},
            "phi_f": {"n_ctrl": self.phi_f.n_ctrl, "dt": self.phi_f.dt,
                      "duration": self.phi_f.duration},
            "timings_s": self.timings,
            "clearance_min_m": self.clearance_min,
            "exceed_final": self.exceed_final,
            "refine_fallback": self.refine_fallback,
            "free_samples": self.free_samples,
        }


def densify_waypoints(waypoints: np.ndarray, spacing: float) -> np.ndarray:
    """Subdivide polyline segments so consecutive waypoints are <= spacing apart."""
    out = [waypoints[0]]
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        length = float(np.linalg.norm(b - a))
        pieces = max(int(np.ceil(length / spacing)), 1)
        for j in range(1, pieces + 1):
            out.append(a + (b - a) * (j / pieces))
    return np.asarray(out)


_SPEED_SLACK = 0.6


def initial_fit(
    waypoints: np.ndarray, start_state, goal_state, v_m: float
) -> UniformBspline:
    """Fit the guide waypoints with the knot interval sized below the speed limit.

    The slack keeps obstacle detours from activating the feasibility penalty
    during optimization; refinement stretches time if limits are still hit.
    """
    length = float(np.linalg.norm(np.diff(waypoints, axis=0), axis=1).sum())
    n_ctrl = len(waypoints) + 4
    dt = max(length / n_ctrl / (_SPEED_SLACK * v_m), 1e-3)
    return fit_from_waypoints(waypoints, dt, start_state, goal_state)


def _free_samples(spline: UniformBspline, grid: OccupancyGrid) -> int:
    ts = np.linspace(0.0, spline.duration, SAFETY_SAMPLES)
    return int(sum(0 if grid.is_occupied(spline.evaluate(t)) else 1 for t in ts))


def _refine_with_retry(phi_s: UniformBspline, grid, config, timings):
    """Refine, scaling the fitting weights up if the refit clips obstacles."""
    t0 = time.perf_counter()
    base = FitWeights()
    best = None
    best_free = -1
    for scale in _REFIT_SCALES:
        weights = FitWeights(base.w_a * scale, base.w_r * scale, base.samples)
        refined = refine(phi_s, config, weights)
        free = _free_samples(refined.spline, grid)
        if free > best_free:
            best, best_free = refined, free
        if free == SAFETY_SAMPLES:
            break
    timings["refine"] = time.perf_counter() - t0
    return best, best_free


def _pipeline(scenario, grid, search_grid, start_state, goal, goal_state) -> PlanReport:
    """One search-fit-optimize-refine pass; the guide comes from search_grid."""
    config = scenario.config
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    search = bidirectional_astar(search_grid, start_state[0], goal)
    timings["search"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    guide = prune_path(search, search_grid)
    spacing = max(4.0 * grid.resolution, 0.5)
    waypoints = densify_waypoints(guide, spacing)
    phi_0 = initial_fit(waypoints, start_state, goal_state, config.v_m)
    timings["fit"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    opt = optimize(phi_0, grid, guide, config)
    timings["optimize"] = time.perf_counter() - t0

    refined, free = _refine_with_retry(opt.spline, grid, config, timings)

    phi_s = opt.spline
    phi_f = refined.spline
    clearance = min(
        (
            signed_dist(phi_s.ctrl[i], pair)
            for i, pairs in opt.anchors.items()
            for pair in pairs
        ),
        default=float("inf"),
    )

    return PlanReport(
        search=search,
        guide=guide,
        phi_s=phi_s,
        phi_f=phi_f,
        timings=timings,
        traces=opt.traces,
        clearance_min=clearance,
        exceed_final=exceed_ratio(phi_f, config),
        refine_fallback=refined.fallback,
        free_samples=free,
    )


def plan_on_grid(
    scenario: Scenario,
    grid: OccupancyGrid,
    start_state=None,
    goal=None,
) -> PlanReport:
    """Run the pipeline on a prepared (inflated) grid.

    ``start_state``/``goal`` default to the scenario's; the simulator
    passes the agent's current state and a horizon-clamped goal instead.
    The guide path is searched on a widened copy of the grid first so it
    favors roomy corridors; the plain grid is the fallback (for goals only
    reachable through tight gaps) and the collision model throughout.
    """
    if start_state is None:
        start_state = scenario.start_state
    if goal is None:
        goal = scenario.goal
    goal = np.asarray(goal, dtype=float)
    goal_state = (goal, np.zeros(3), np.zeros(3))

    clear = _WIDE_MARGIN + scenario.inflation + 2.0 * grid.resolution
    wide = (
        grid.inflate(_WIDE_MARGIN)
        .clear_sphere(start_state[0], clear)
        .clear_sphere(goal, clear)
    )

    best: PlanReport | None = None
    failure: PlanningFailedError | None = None
    for search_grid in (wide, grid):
        try:
            report = _pipeline(scenario, grid, search_grid, start_state, goal, goal_state)
        except NoPathError:
            if search_grid is grid:
                raise
            continue
        except PlanningFailedError as exc:
            failure = exc
            continue
        if report.success:
            return report
        if best is None or report.free_samples > best.free_samples:
            best = report
    if best is not None:
        return best
    raise failure


def plan_once(scenario: Scenario, out_dir=None) -> PlanReport:
    """Plan on the scenario's inflated world; optionally write the trajectory CSV.

    Raises NoPathError or PlanningFailedError with stage attribution.
    """
    grid = scenario.planning_grid()
    try:
        report = plan_on_grid(scenario, grid)
    except NoPathError as exc:
        raise NoPathError(f"search stage: {exc}") from exc
    except PlanningFailedError as exc:
        raise PlanningFailedError(f"optimize stage: {exc}", best=exc.best) from exc
    if not report.success:
        raise PlanningFailedError(
            f"refine stage: {SAFETY_SAMPLES - report.free_samples} of "
            f"{SAFETY_SAMPLES} trajectory samples fall in occupied cells",
            best=report,
        )
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_trajectory_csv(out_dir / "trajectory.csv", report.phi_f)
    return report
