"""Replanning simulator with limited sensing.

The agent tracks the committed trajectory by exact evaluation (no tracking
controller) while occupancy is revealed only within a sensing radius.  It
replans immediately when newly revealed cells threaten the committed
trajectory, and on the replan period when the current plan is stale (new
occupancy since the last plan, or the plan targets a horizon-clamped local
goal short of the global one).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoPathError, PlanningFailedError
from ..grid_map import OccupancyGrid
from .planner import plan_on_grid
from .scenario import Scenario, add_boundary_shell

DEFAULT_SENSING = 5.0
DEFAULT_PERIOD = 1.0
DEFAULT_HORIZON = 7.5
_STEP = 0.05
_GOAL_TOL = 0.2


@dataclass
class SimReport:
    success: bool
    replans: int
    collision: bool
    path_length: float
    elapsed: float  # simulated seconds (goal-reach time when successful)


def _reveal(known: np.ndarray, truth: OccupancyGrid, center: np.ndarray,
            radius: float) -> np.ndarray:
    """Copy true occupancy into ``known`` within ``radius`` of ``center``.

    Returns centers of newly revealed occupied cells, shape (k, 3).
    """
    lo = truth.world_to_cell(center - radius)
    hi = truth.world_to_cell(center + radius)
    lo = np.clip(lo, 0, np.asarray(truth.dims) - 1)
    hi = np.clip(hi, 0, np.asarray(truth.dims) - 1)
    sl = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
    idx = np.indices([b - a + 1 for a, b in zip(lo, hi)]).reshape(3, -1).T + lo
    centers = truth.origin + (idx + 0.5) * truth.resolution
    near = np.linalg.norm(centers - center, axis=1) <= radius
    cells = idx[near]
    fresh = known[cells[:, 0], cells[:, 1], cells[:, 2]] == 0
    new_occ = truth.occupancy[cells[:, 0], cells[:, 1], cells[:, 2]] == 1
    known[cells[:, 0], cells[:, 1], cells[:, 2]] = np.where(
        new_occ, 1, known[cells[:, 0], cells[:, 1], cells[:, 2]]
    )
    picked = cells[fresh & new_occ]
    return truth.origin + (picked + 0.5) * truth.resolution


def _planning_grid(known: np.ndarray, truth: OccupancyGrid, inflation: float,
                   agent: np.ndarray, goal: np.ndarray) -> OccupancyGrid:
    grid = OccupancyGrid(truth.resolution, truth.origin, truth.dims,
                         known.copy(), 0.0)
    grid = add_boundary_shell(grid.inflate(inflation), 0.0)
    clear = inflation + 2.0 * truth.resolution
    grid = grid.clear_sphere(agent, clear).clear_sphere(goal, clear)
    return grid


def _local_goal(guide: np.ndarray, agent: np.ndarray, goal: np.ndarray,
                horizon: float) -> np.ndarray:
    """Point at ``horizon`` arc length along the guide past the agent."""
    seg = guide[1:] - guide[:-1]
    lens = np.linalg.norm(seg, axis=1)
    # project the agent onto the guide to find where to start measuring
    best, best_d = 0, float("inf")
    ts = np.zeros(len(seg))
    for i, (a, l) in enumerate(zip(guide[:-1], lens)):
        t = 0.0 if l < 1e-12 else float(
            np.clip(np.dot(agent - a, seg[i]) / (l * l), 0.0, 1.0))
        d = float(np.linalg.norm(a + t * seg[i] - agent))
        ts[i] = t
        if d < best_d:
            best, best_d = i, d
    remaining = horizon
    point = guide[best] + ts[best] * seg[best]
    for i in range(best, len(seg)):
        a = point if i == best else guide[i]
        step = float(np.linalg.norm(guide[i + 1] - a))
        if step >= remaining:
            if step < 1e-12:
                return guide[i + 1].copy()
            return a + (guide[i + 1] - a) * (remaining / step)
        remaining -= step
    return goal.copy()


def simulate(
    scenario: Scenario,
    sensing_radius: float = DEFAULT_SENSING,
    replan_period: float = DEFAULT_PERIOD,
    horizon: float = DEFAULT_HORIZON,
    timeout: float = 120.0,
) -> SimReport:
    if sensing_radius <= 0:
        raise ValueError("sensing_radius must be positive")
    truth = scenario.world_grid()
    goal = np.asarray(scenario.goal, dtype=float)
    known = np.zeros(truth.dims, dtype=np.uint8)
    pos = np.asarray(scenario.start_pos, dtype=float)
    state = scenario.start_state
    _reveal(known, truth, pos, sensing_radius)

    replans = 0
    new_since_plan = False
    traveled = 0.0
    t = 0.0
    plan_t = 0.0
    report = None
    local = goal

    def _replan(target):
        nonlocal report, replans, new_since_plan, plan_t, local
        grid = _planning_grid(known, truth, scenario.inflation, pos, target)
        report = plan_on_grid(scenario, grid, start_state=state, goal=target)
        replans += 1
        new_since_plan = False
        plan_t = t
        local = np.asarray(target, dtype=float)

    try:
        _replan(goal)
    except (NoPathError, PlanningFailedError):
        return SimReport(False, replans, False, traveled, t)

    while t < timeout:
        t += _STEP
        tau = min(t - plan_t, report.phi_f.duration)
        new_pos = report.phi_f.evaluate(tau, 0)
        traveled += float(np.linalg.norm(new_pos - pos))
        pos = new_pos
        state = (pos, report.phi_f.evaluate(tau, 1), report.phi_f.evaluate(tau, 2))

        if truth.is_occupied(pos):
            return SimReport(False, replans, True, traveled, t)
        if np.linalg.norm(pos - goal) < _GOAL_TOL:
            return SimReport(True, replans, False, traveled, t)

        fresh = _reveal(known, truth, pos, sensing_radius)
        if len(fresh):
            new_since_plan = True
        threatened = False
        if len(fresh):
            rest = np.linspace(tau, report.phi_f.duration, 50)
            pts = report.phi_f.evaluate_many(rest, 0)
            d = np.linalg.norm(pts[:, None, :] - fresh[None, :, :], axis=2)
            threatened = bool(
                (d < scenario.inflation + truth.resolution).any())

        periodic = (t - plan_t >= replan_period and
                    (new_since_plan or np.linalg.norm(local - goal) > 1e-9))
        stalled = (tau >= report.phi_f.duration - 1e-9 and
                   np.linalg.norm(local - goal) > 1e-9)
        if threatened or periodic or stalled:
            target = _local_goal(report.guide, pos, goal, horizon)
            if np.linalg.norm(target - goal) < truth.resolution:
                target = goal
            try:
                _replan(target)
            except (NoPathError, PlanningFailedError):
                return SimReport(False, replans, False, traveled, t)

    return SimReport(False, replans, False, traveled, t)
