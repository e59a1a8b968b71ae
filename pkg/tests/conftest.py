"""Shared scenario builders and grid helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from bsplanner.grid_map import OccupancyGrid
from bsplanner.harness.scenario import Scenario, scenario_from_dict


def make_grid(dims, occupied=(), resolution=1.0, origin=(0.0, 0.0, 0.0)):
    """Grid with the given cells occupied."""
    occ = np.zeros(dims, dtype=bool)
    for cell in occupied:
        occ[cell] = True
    return OccupancyGrid(
        resolution=resolution,
        origin=np.asarray(origin, dtype=float),
        dims=tuple(dims),
        occupancy=occ,
    )


def slab_grid(dims=(20, 10, 4), resolution=0.5, x_cells=(4, 6)):
    """Free grid with a full-height slab over the given x cell range."""
    occ = np.zeros(dims, dtype=bool)
    occ[x_cells[0]:x_cells[1], :, :] = True
    return OccupancyGrid(
        resolution=resolution, origin=np.zeros(3), dims=dims, occupancy=occ
    )


def forest_scenario_dict(seed: int) -> dict:
    return {
        "seed": seed,
        "bounds": {"min": [0, 0, 0], "max": [20, 20, 3]},
        "resolution": 0.1,
        "map": {"type": "forest", "density": 0.1},
        "start": {"pos": [1, 1, 1], "vel": [0, 0, 0], "acc": [0, 0, 0]},
        "goal": [19, 19, 1],
        "limits": {"v_m": 2.0, "a_m": 3.0, "j_m": 10.0},
    }


def forest_scenario(seed: int) -> Scenario:
    return scenario_from_dict(forest_scenario_dict(seed))


def empty_scenario() -> Scenario:
    raw = forest_scenario_dict(0)
    raw["map"] = {"type": "forest", "density": 0.0}
    return scenario_from_dict(raw)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
