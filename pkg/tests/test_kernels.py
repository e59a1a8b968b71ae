"""Compiled and pure-Python kernels must be behaviorally identical."""

import numpy as np
import pytest

from bsplanner._kernels import pure
from bsplanner.harness.bench import random_grid

try:
    from bsplanner._kernels import core
except ImportError:  # pragma: no cover - source-only install
    core = None

pytestmark = pytest.mark.skipif(core is None, reason="compiled kernels unavailable")


def _flat_index(grid, point):
    nx, ny, nz = grid.dims
    c = grid.world_to_cell(point)
    return (c[0] * ny + c[1]) * nz + c[2]


def _corner_case(seed):
    grid = random_grid(seed)
    start = grid.origin + 0.5 * grid.resolution
    goal = grid.origin + grid.resolution * (np.asarray(grid.dims) - 0.5)
    return grid, _flat_index(grid, start), _flat_index(grid, goal)


class TestSearchEquivalence:
    @pytest.mark.parametrize("use_heuristic", [False, True])
    def test_unidirectional(self, use_heuristic):
        for seed in range(10):
            grid, s, g = _corner_case(seed)
            nx, ny, nz = grid.dims
            res_c = core.search(grid._flat, nx, ny, nz, s, g,
                                grid.resolution, use_heuristic)
            res_p = pure.search(grid._flat, nx, ny, nz, s, g,
                                grid.resolution, use_heuristic)
            self._assert_same(res_c, res_p)

    def test_bidirectional(self):
        for seed in range(10):
            grid, s, g = _corner_case(seed)
            nx, ny, nz = grid.dims
            res_c = core.bidi_search(grid._flat, nx, ny, nz, s, g,
                                     grid.resolution, True)
            res_p = pure.bidi_search(grid._flat, nx, ny, nz, s, g,
                                     grid.resolution, True)
            self._assert_same(res_c, res_p)

    @staticmethod
    def _assert_same(res_c, res_p):
        path_c, cost_c, exp_c = res_c
        path_p, cost_p, exp_p = res_p
        assert exp_c == exp_p
        if path_c is None:
            assert path_p is None
            return
        assert cost_c == pytest.approx(cost_p, abs=1e-12)
        assert list(path_c) == list(path_p)


class TestRaycastEquivalence:
    def test_first_hit_and_last_exit(self, rng):
        grid = random_grid(11)
        nx, ny, nz = grid.dims
        lo = np.zeros(3)
        hi = np.asarray(grid.dims, dtype=float)
        for _ in range(200):
            a = rng.uniform(lo, hi)
            b = rng.uniform(lo, hi)
            hit_c = core.first_hit(grid._flat, nx, ny, nz, a, b)
            hit_p = pure.first_hit(grid._flat, nx, ny, nz, a, b)
            assert hit_c == pytest.approx(hit_p, abs=1e-12)
            exit_c = core.last_exit(grid._flat, nx, ny, nz, a, b)
            exit_p = pure.last_exit(grid._flat, nx, ny, nz, a, b)
            assert exit_c == pytest.approx(exit_p, abs=1e-12)


def test_compiled_flags():
    assert core.COMPILED is True
    assert pure.COMPILED is False
