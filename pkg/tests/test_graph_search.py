import numpy as np
import pytest

from bsplanner.errors import NoPathError, PreconditionError
from bsplanner.graph_search import astar, bidirectional_astar, dijkstra, prune_path
from bsplanner.harness.bench import random_grid

from conftest import make_grid

ALGOS = (dijkstra, astar, bidirectional_astar)


def _corner_points(grid):
    start = grid.origin + 0.5 * grid.resolution
    goal = grid.origin + grid.resolution * (np.asarray(grid.dims) - 0.5)
    return start, goal


class TestBasics:
    def test_start_equals_goal(self):
        grid = make_grid((5, 5, 5))
        for algo in ALGOS:
            res = algo(grid, [2.5, 2.5, 2.5], [2.5, 2.5, 2.5])
            assert res.cost == 0.0
            assert len(res.path) == 1

    def test_straight_corridor_cost(self):
        # free 5x1x1 corridor at resolution 1: four unit steps
        grid = make_grid((5, 1, 1))
        for algo in ALGOS:
            res = algo(grid, [0.5, 0.5, 0.5], [4.5, 0.5, 0.5])
            assert res.cost == pytest.approx(4.0, abs=1e-12)

    def test_empty_diagonal_10x10(self):
        grid = make_grid((10, 10, 1))
        expect = 9.0 * np.sqrt(2.0)
        for algo in ALGOS:
            res = algo(grid, [0.5, 0.5, 0.5], [9.5, 9.5, 0.5])
            assert res.cost == pytest.approx(expect, abs=1e-9)

    def test_sealed_goal_no_path(self):
        occupied = [(x, y, z)
                    for x in range(5, 8) for y in range(5, 8) for z in range(0, 1)
                    if not (x == 6 and y == 6)]
        grid = make_grid((10, 10, 1), occupied=occupied)
        for algo in ALGOS:
            with pytest.raises(NoPathError):
                algo(grid, [0.5, 0.5, 0.5], [6.5, 6.5, 0.5])

    def test_occupied_endpoints_rejected(self):
        grid = make_grid((5, 5, 5), occupied=[(0, 0, 0), (4, 4, 4)])
        for algo in ALGOS:
            with pytest.raises(PreconditionError):
                algo(grid, [0.5, 0.5, 0.5], [2.5, 2.5, 2.5])
            with pytest.raises(PreconditionError):
                algo(grid, [2.5, 2.5, 2.5], [4.5, 4.5, 4.5])


class TestPathInvariants:
    def test_path_structure_on_random_grids(self):
        for seed in range(5):
            grid = random_grid(seed)
            start, goal = _corner_points(grid)
            for algo in ALGOS:
                res = algo(grid, start, goal)
                assert np.allclose(res.path[0], start)
                assert np.allclose(res.path[-1], goal)
                steps = np.diff(res.path, axis=0) / grid.resolution
                # consecutive waypoints are 26-neighbors
                assert np.abs(np.round(steps) - steps).max() < 1e-9
                assert np.abs(steps).max() < 1.5
                # no waypoint in an occupied cell
                for p in res.path:
                    assert not grid.is_occupied(p)
                # cost equals the sum of Euclidean steps
                assert res.cost == pytest.approx(
                    float(np.linalg.norm(np.diff(res.path, axis=0), axis=1).sum()),
                    abs=1e-9,
                )

    def test_bidirectional_path_has_no_duplicate_vertex(self):
        for seed in range(5):
            grid = random_grid(seed)
            start, goal = _corner_points(grid)
            path = bidirectional_astar(grid, start, goal).path
            cells = {tuple(np.floor(p / grid.resolution).astype(int)) for p in path}
            assert len(cells) == len(path)


class TestOptimality:
    def test_costs_match_dijkstra_on_random_grids(self):
        for seed in range(50):
            grid = random_grid(seed)
            start, goal = _corner_points(grid)
            try:
                base = dijkstra(grid, start, goal)
            except NoPathError:
                for algo in (astar, bidirectional_astar):
                    with pytest.raises(NoPathError):
                        algo(grid, start, goal)
                continue
            for algo in (astar, bidirectional_astar):
                assert algo(grid, start, goal).cost == pytest.approx(
                    base.cost, abs=1e-9
                )

    def test_astar_expansion_dominance(self):
        for seed in range(10):
            grid = random_grid(seed)
            start, goal = _corner_points(grid)
            try:
                base = dijkstra(grid, start, goal)
            except NoPathError:
                continue
            assert astar(grid, start, goal).expanded <= base.expanded

    def test_long_corridor_bidirectional_expands_less(self):
        grid = make_grid((100, 10, 1))
        res_a = astar(grid, [0.5, 5.5, 0.5], [99.5, 5.5, 0.5])
        res_b = bidirectional_astar(grid, [0.5, 5.5, 0.5], [99.5, 5.5, 0.5])
        assert res_b.expanded < res_a.expanded
        assert res_b.cost == pytest.approx(res_a.cost, abs=1e-9)


class TestDeterminism:
    def test_repeated_runs_identical(self):
        grid = random_grid(3)
        start, goal = _corner_points(grid)
        for algo in ALGOS:
            a = algo(grid, start, goal)
            b = algo(grid, start, goal)
            assert a.cost == b.cost
            assert a.expanded == b.expanded
            assert np.array_equal(a.path, b.path)


class TestPrunePath:
    def test_straight_path_prunes_to_endpoints(self):
        grid = make_grid((10, 1, 1))
        res = dijkstra(grid, [0.5, 0.5, 0.5], [9.5, 0.5, 0.5])
        pruned = prune_path(res, grid)
        assert len(pruned) == 2
        assert np.allclose(pruned[0], res.path[0])
        assert np.allclose(pruned[-1], res.path[-1])

    def test_pruned_segments_are_collision_free(self):
        for seed in range(5):
            grid = random_grid(seed)
            start, goal = _corner_points(grid)
            try:
                res = astar(grid, start, goal)
            except NoPathError:
                continue
            pruned = prune_path(res, grid)
            assert len(pruned) <= len(res.path)
            for a, b in zip(pruned[:-1], pruned[1:]):
                assert grid.segment_free(a, b)

    def test_l_shape_around_box_corner(self):
        # single box forces an L-shaped detour; pruning keeps one knee point
        occupied = [(x, y, 0) for x in range(4, 11) for y in range(0, 8)]
        grid = make_grid((12, 12, 1), occupied=occupied)
        res = astar(grid, [0.5, 0.5, 0.5], [11.5, 11.5, 0.5])
        pruned = prune_path(res, grid)
        assert len(pruned) == 3
        for a, b in zip(pruned[:-1], pruned[1:]):
            assert grid.segment_free(a, b)
