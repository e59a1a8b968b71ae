"""ESDF-free B-spline local planner.

Pipeline: grid search for a guide path, cubic uniform B-spline fit,
penalty-based control-point optimization with obstacle anchor pairs, and
a time-reallocation refit that enforces dynamic limits.
"""

from ._kernels import COMPILED
from .bspline import UniformBspline, fit_from_waypoints
from .config import PlannerConfig, SolverConfig
from .errors import (
    AnchorFallbackError,
    DegenerateDirectionError,
    InvalidInputError,
    NoPathError,
    PlannerError,
    PlanningFailedError,
    PreconditionError,
)
from .graph_search import SearchResult, astar, bidirectional_astar, dijkstra, prune_path
from .grid_map import OccupancyGrid, build_grid, inflate, random_forest, raycast
from .optimizer import optimize
from .refinement import FitWeights, exceed_ratio, reallocate, refine

__all__ = [
    "COMPILED",
    "AnchorFallbackError",
    "DegenerateDirectionError",
    "FitWeights",
    "InvalidInputError",
    "NoPathError",
    "OccupancyGrid",
    "PlannerConfig",
    "PlannerError",
    "PlanningFailedError",
    "PreconditionError",
    "SearchResult",
    "SolverConfig",
    "UniformBspline",
    "astar",
    "bidirectional_astar",
    "build_grid",
    "dijkstra",
    "exceed_ratio",
    "fit_from_waypoints",
    "inflate",
    "optimize",
    "prune_path",
    "random_forest",
    "raycast",
    "reallocate",
    "refine",
]

__version__ = "0.1.0"
