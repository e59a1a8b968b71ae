"""Guide-path search over the occupancy grid.

Three searches share one contract: 26-connected moves with Euclidean step
costs, an admissible straight-line heuristic, and fixed tie-breaking
(f, then h, then lexicographic flat cell index), so results are
reproducible bit-for-bit and all three return minimum-cost paths.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NoPathError, PreconditionError
from .grid_map import OccupancyGrid


@dataclass(frozen=True)
class SearchResult:
    path: np.ndarray  # (K, 3) cell-center waypoints, meters
    cost: float  # meters
    expanded: int
    elapsed: float  # seconds


def _endpoints(grid: OccupancyGrid, start, goal):
    s = grid.world_to_cell(start)
    g = grid.world_to_cell(goal)
    if grid.is_occupied_cell(s):
        raise PreconditionError("start cell is occupied or out of bounds")
    if grid.is_occupied_cell(g):
        raise PreconditionError("goal cell is occupied or out of bounds")
    nx, ny, nz = grid.dims
    return (s[0] * ny + s[1]) * nz + s[2], (g[0] * ny + g[1]) * nz + g[2]


def _run(kernel, grid: OccupancyGrid, start, goal, use_heuristic) -> SearchResult:
    s, g = _endpoints(grid, start, goal)
    nx, ny, nz = grid.dims
    t0 = time.perf_counter()
    if s == g:
        cell = grid.world_to_cell(start)
        path = grid.cell_center(cell)[None, :]
        return SearchResult(path, 0.0, 0, time.perf_counter() - t0)
    flat_path, cost, expanded = kernel(
        grid._flat, nx, ny, nz, s, g, grid.resolution, use_heuristic
    )
    elapsed = time.perf_counter() - t0
    if flat_path is None:
        raise NoPathError("goal is unreachable from start")
    flat_path = np.asarray(flat_path, dtype=np.int64)
    cells = np.stack(
        [flat_path // (ny * nz), (flat_path // nz) % ny, flat_path % nz], axis=1
    )
    waypoints = grid.origin + (cells.astype(float) + 0.5) * grid.resolution
    return SearchResult(waypoints, float(cost), int(expanded), elapsed)


def dijkstra(grid: OccupancyGrid, start, goal) -> SearchResult:
    """Optimal baseline; serves as the cost oracle for the other searches."""
    return _run(_kernels.search, grid, start, goal, False)


def astar(grid: OccupancyGrid, start, goal) -> SearchResult:
    return _run(_kernels.search, grid, start, goal, True)


def bidirectional_astar(grid: OccupancyGrid, start, goal) -> SearchResult:
    """Searches from both ends and stitches the halves at the meeting node."""
    return _run(_kernels.bidi_search, grid, start, goal, True)


def prune_path(result: SearchResult, grid: OccupancyGrid) -> np.ndarray:
    """Greedy line-of-sight shortcutting of a collision-free path.

    A waypoint is kept only when the straight segment from the last kept
    waypoint to the following candidate is blocked.
    """
    path = result.path
    if len(path) <= 2:
        return path.copy()
    kept = [path[0]]
    anchor = path[0]
    i = 1
    while i < len(path) - 1:
        if grid.segment_free(anchor, path[i + 1]):
            i += 1
            continue
        kept.append(path[i])
        anchor = path[i]
        i += 1
    kept.append(path[-1])
    return np.asarray(kept)
