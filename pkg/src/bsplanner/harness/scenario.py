"""Scenario files: JSON schema, validation, and world assembly.

Schema (unknown fields rejected):

    {
      "seed": 7,
      "bounds": {"min": [0,0,0], "max": [20,20,3]},
      "resolution": 0.1,
      "map": {"type": "forest", "density": 0.1}
             | {"type": "boxes", "boxes": [{"min": [..], "max": [..]}, ..]}
             | {"type": "points", "points": [[x,y,z], ..]}
             | {"type": "points", "file": "cloud.xyz"},
      "start": {"pos": [..], "vel": [..], "acc": [..]},
      "goal": [x, y, z],
      "limits": {"v_m": 2.0, "a_m": 3.0, "j_m": 10.0},
      "weights": {"lambda_s": 1, "lambda_c": 10, "lambda_d": 1, "lambda_f": 5},
      "s_f": 0.3,
      "inflation": 0.3,          # optional
      "solver": {"max_iterations": 500, ...}   # optional overrides
    }

``vel``/``acc``, ``limits``, ``weights``, ``s_f``, ``inflation`` and
``solver`` are optional and default as shown by PlannerConfig.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from ..config import PlannerConfig, SolverConfig
from ..errors import InvalidInputError
from ..grid_map import OccupancyGrid, build_grid, load_xyz, random_forest

DEFAULT_INFLATION = 0.3


@dataclass(frozen=True)
class Scenario:
    seed: int
    bounds: tuple[np.ndarray, np.ndarray]
    resolution: float
    map_spec: dict
    start_pos: np.ndarray
    start_vel: np.ndarray
    start_acc: np.ndarray
    goal: np.ndarray
    config: PlannerConfig
    inflation: float = DEFAULT_INFLATION
    base_dir: Path | None = None  # resolves relative point-cloud files

    @property
    def start_state(self):
        return (self.start_pos, self.start_vel, self.start_acc)

    @property
    def goal_state(self):
        return (self.goal, np.zeros(3), np.zeros(3))

    def world_grid(self) -> OccupancyGrid:
        """Ground-truth occupancy, with start/goal neighborhoods kept clear."""
        kind = self.map_spec.get("type")
        if kind == "forest":
            grid = random_forest(
                self.seed, self.map_spec["density"], self.bounds, self.resolution
            )
        elif kind == "boxes":
            pts = _box_points(self.map_spec["boxes"], self.resolution)
            grid = build_grid(pts, self.resolution, self.bounds)
        elif kind == "points":
            if "file" in self.map_spec:
                path = Path(self.map_spec["file"])
                if not path.is_absolute() and self.base_dir is not None:
                    path = self.base_dir / path
                pts = load_xyz(path)
            else:
                pts = np.asarray(self.map_spec["points"], dtype=float)
            grid = build_grid(pts, self.resolution, self.bounds)
        else:
            raise InvalidInputError(f"unknown map type {kind!r}")
        clear = self.inflation + 2.0 * self.resolution
        return grid.clear_sphere(self.start_pos, clear).clear_sphere(self.goal, clear)

    def planning_grid(self, world: OccupancyGrid | None = None) -> OccupancyGrid:
        """Inflated copy of the world grid used by search and optimization."""
        if world is None:
            world = self.world_grid()
        grid = add_boundary_shell(world.inflate(self.inflation), 0.0)
        clear = self.inflation + 2.0 * self.resolution
        grid = grid.clear_sphere(self.start_pos, clear).clear_sphere(self.goal, clear)
        if grid.is_occupied(self.start_pos):
            raise InvalidInputError("start lies outside the world bounds")
        if grid.is_occupied(self.goal):
            raise InvalidInputError("goal lies outside the world bounds")
        return grid


def add_boundary_shell(grid: OccupancyGrid, margin: float) -> OccupancyGrid:
    """Mark cells within ``margin`` of the domain boundary as occupied.

    Keeps the planner off the map edge so it presents a normal obstacle
    surface instead of a bare out-of-bounds cliff.
    """
    shell = max(int(np.ceil(margin / grid.resolution)), 1) if margin > 0 else 1
    occ = grid.occupancy.copy()
    occ[:shell] = 1
    occ[-shell:] = 1
    occ[:, :shell] = 1
    occ[:, -shell:] = 1
    occ[:, :, :shell] = 1
    occ[:, :, -shell:] = 1
    return OccupancyGrid(grid.resolution, grid.origin, grid.dims, occ,
                         grid.inflation_radius)


def _box_points(boxes, resolution: float) -> np.ndarray:
    """Fill axis-aligned boxes with points at half-resolution spacing."""
    pts = []
    step = resolution / 2.0
    for box in boxes:
        lo = np.asarray(box["min"], dtype=float)
        hi = np.asarray(box["max"], dtype=float)
        axes = [np.arange(lo[a] + step / 2.0, hi[a], step) for a in range(3)]
        grid = np.meshgrid(*axes, indexing="ij")
        pts.append(np.stack([g.ravel() for g in grid], axis=1))
    if not pts:
        return np.empty((0, 3))
    return np.concatenate(pts)


def _vec3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must be a finite 3-vector")
    return arr


def _check_keys(obj: dict, allowed: set[str], context: str):
    unknown = set(obj) - allowed
    if unknown:
        raise InvalidInputError(f"unknown fields in {context}: {sorted(unknown)}")


def scenario_from_dict(raw: dict, base_dir: Path | None = None) -> Scenario:
    _check_keys(
        raw,
        {
            "seed", "bounds", "resolution", "map", "start", "goal",
            "limits", "weights", "s_f", "inflation", "solver",
        },
        "scenario",
    )
    for key in ("bounds", "resolution", "map", "start", "goal"):
        if key not in raw:
            raise InvalidInputError(f"scenario missing required field {key!r}")

    _check_keys(raw["bounds"], {"min", "max"}, "bounds")
    lo = _vec3(raw["bounds"]["min"], "bounds.min")
    hi = _vec3(raw["bounds"]["max"], "bounds.max")
    if np.any(hi <= lo):
        raise InvalidInputError("bounds are degenerate")

    _check_keys(raw["start"], {"pos", "vel", "acc"}, "start")
    start_pos = _vec3(raw["start"]["pos"], "start.pos")
    start_vel = _vec3(raw["start"].get("vel", [0, 0, 0]), "start.vel")
    start_acc = _vec3(raw["start"].get("acc", [0, 0, 0]), "start.acc")
    goal = _vec3(raw["goal"], "goal")
    for name, p in (("start", start_pos), ("goal", goal)):
        if np.any(p < lo) or np.any(p > hi):
            raise InvalidInputError(f"{name} lies outside bounds")

    map_spec = dict(raw["map"])
    _check_keys(
        map_spec, {"type", "density", "boxes", "points", "file"}, "map"
    )

    cfg_kwargs = {}
    limits = raw.get("limits", {})
    _check_keys(limits, {"v_m", "a_m", "j_m"}, "limits")
    cfg_kwargs.update(limits)
    weights = raw.get("weights", {})
    _check_keys(
        weights,
        {"lambda_s", "lambda_c", "lambda_d", "lambda_f", "lambda_e", "c_j_factor"},
        "weights",
    )
    cfg_kwargs.update(weights)
    if "s_f" in raw:
        cfg_kwargs["s_f"] = float(raw["s_f"])

    solver_raw = raw.get("solver", {})
    solver_fields = {f.name for f in fields(SolverConfig)}
    _check_keys(solver_raw, solver_fields, "solver")
    config = PlannerConfig(**cfg_kwargs)
    if solver_raw:
        config = replace(config, solver=replace(config.solver, **solver_raw))

    try:
        return Scenario(
            seed=int(raw.get("seed", 0)),
            bounds=(lo, hi),
            resolution=float(raw["resolution"]),
            map_spec=map_spec,
            start_pos=start_pos,
            start_vel=start_vel,
            start_acc=start_acc,
            goal=goal,
            config=config,
            inflation=float(raw.get("inflation", DEFAULT_INFLATION)),
            base_dir=base_dir,
        )
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(str(exc)) from exc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidInputError("scenario file must hold a JSON object")
    return scenario_from_dict(raw, base_dir=path.parent)
