import json

import numpy as np
import pytest
from click.testing import CliRunner

from bsplanner.bspline import UniformBspline
from bsplanner.errors import InvalidInputError, NoPathError
from bsplanner.harness import bench
from bsplanner.harness.cli import main as cli_main
from bsplanner.harness.gradcheck import gradcheck, passed, report_lines
from bsplanner.harness.planner import SAFETY_SAMPLES, plan_once
from bsplanner.harness.render import obstacle_columns, render_svg
from bsplanner.harness.scenario import scenario_from_dict
from bsplanner.harness.sim import simulate
from bsplanner.harness.trajcsv import (
    HEADER,
    sample_trajectory,
    write_trajectory_csv,
    yaw_from_velocity,
)

from conftest import empty_scenario, forest_scenario, forest_scenario_dict


class TestScenarioValidation:
    def test_unknown_field_rejected(self):
        raw = forest_scenario_dict(0)
        raw["bogus"] = 1
        with pytest.raises(InvalidInputError):
            scenario_from_dict(raw)

    def test_missing_required_field_rejected(self):
        raw = forest_scenario_dict(0)
        del raw["resolution"]
        with pytest.raises(InvalidInputError):
            scenario_from_dict(raw)

    def test_degenerate_bounds_rejected(self):
        raw = forest_scenario_dict(0)
        raw["bounds"]["max"] = raw["bounds"]["min"]
        with pytest.raises(InvalidInputError):
            scenario_from_dict(raw)

    def test_start_outside_bounds_rejected(self):
        raw = forest_scenario_dict(0)
        raw["start"]["pos"] = [-5.0, 1.0, 1.0]
        with pytest.raises(InvalidInputError):
            scenario_from_dict(raw)

    def test_unknown_map_type_rejected(self):
        raw = forest_scenario_dict(0)
        raw["map"] = {"type": "maze"}
        with pytest.raises(InvalidInputError):
            scenario_from_dict(raw).world_grid()


class TestPlanOnce:
    def test_empty_map(self, tmp_path):
        report = plan_once(empty_scenario(), out_dir=tmp_path)
        assert report.success
        assert report.free_samples == SAFETY_SAMPLES
        assert report.exceed_final == pytest.approx(1.0, abs=1e-6)
        assert (tmp_path / "trajectory.csv").exists()
        assert all(v >= 0.0 for v in report.timings.values())

    def test_forest_seed_7(self):
        scenario = forest_scenario(7)
        report = plan_once(scenario)
        assert report.success
        assert report.clearance_min >= scenario.config.s_f - 1e-3
        assert report.exceed_final == pytest.approx(1.0, abs=1e-6)

    def test_sealed_goal_raises_no_path(self):
        raw = forest_scenario_dict(0)
        raw["map"] = {"type": "boxes", "boxes": [
            {"min": [14.0, 14.0, 0.0], "max": [20.0, 20.0, 3.0]}]}
        raw["goal"] = [18.0, 18.0, 1.0]
        with pytest.raises(NoPathError):
            plan_once(scenario_from_dict(raw))


class TestSimulate:
    def test_fully_known_empty_map_plans_once(self):
        report = simulate(empty_scenario(), sensing_radius=100.0)
        assert report.success
        assert report.replans == 1
        assert not report.collision
        assert report.path_length > 0.0

    def test_success_implies_no_collision_forest(self):
        report = simulate(forest_scenario(7))
        assert report.success
        assert not report.collision
        assert report.replans >= 1


class TestYawAndCsv:
    def test_yaw_axis_cases(self):
        # straight +x motion
        ctrl = np.outer(np.arange(6, dtype=float), [1.0, 0.0, 0.0])
        sp = UniformBspline(1.0, ctrl)
        assert yaw_from_velocity(sp, sp.duration / 2) == pytest.approx(0.0, abs=1e-12)
        # straight +y motion
        sp_y = UniformBspline(1.0, np.outer(np.arange(6, dtype=float), [0, 1.0, 0]))
        assert yaw_from_velocity(sp_y, sp_y.duration / 2) == pytest.approx(np.pi / 2)

    def test_hover_holds_zero_yaw(self):
        sp = UniformBspline(1.0, np.tile([1.0, 2.0, 3.0], (6, 1)))
        for t in np.linspace(0, sp.duration, 5):
            assert yaw_from_velocity(sp, t) == 0.0

    def test_csv_format(self, tmp_path):
        ctrl = np.outer(np.arange(6, dtype=float), [1.0, 0.5, 0.0])
        sp = UniformBspline(0.5, ctrl)
        path = tmp_path / "traj.csv"
        write_trajectory_csv(path, sp)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ",".join(HEADER)
        rows = sample_trajectory(sp)
        assert len(lines) == len(rows) + 1
        # fixed 1e-2 s sampling
        assert rows[1, 0] - rows[0, 0] == pytest.approx(0.01)


class TestRender:
    def test_deterministic_and_empty_map_has_no_obstacles(self, tmp_path):
        scenario = empty_scenario()
        grid = scenario.world_grid()
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert render_svg(grid, None, None, None, a) == 0
        render_svg(grid, None, None, None, b)
        assert a.read_bytes() == b.read_bytes()
        assert 'class="obstacle"' not in a.read_text()

    def test_forest_seed_7_pinned_column_count(self, tmp_path):
        grid = forest_scenario(7).world_grid()
        count = render_svg(grid, None, None, None, tmp_path / "f.svg")
        assert count == len(obstacle_columns(grid)) == 1584


class TestBench:
    def test_cost_parity_and_csv(self, tmp_path):
        entry = bench.dense_entry()
        rows = bench.bench_entries([entry], trials=1, warmups=0)
        med = bench.medians(rows)
        costs = {med[key]["cost_m"] for key in med}
        assert max(costs) - min(costs) < 1e-9
        out = tmp_path / "metrics.csv"
        bench.write_metrics_csv(out, rows)
        header = out.read_text().splitlines()[0]
        assert header == ",".join(bench.CSV_HEADER)

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(InvalidInputError):
            bench.bench_entries([bench.dense_entry()], ["bogus"], trials=1, warmups=0)


class TestGradcheck:
    def test_default_passes(self):
        errors = gradcheck(seed=0, instances=3)
        assert passed(errors)
        assert set(errors) == {"J_s", "J_c", "J_d", "J_f", "total"}
        assert len(report_lines(errors)) == 5

    def test_corrupted_gradient_fails(self):
        errors = gradcheck(seed=0, instances=2, corrupt="J_c")
        assert not passed(errors)


class TestCli:
    def _write_scenario(self, tmp_path, raw):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(raw))
        return str(path)

    def test_invalid_input_exit_3(self, tmp_path):
        path = self._write_scenario(tmp_path, {"seed": 1, "bogus": True})
        result = CliRunner().invoke(cli_main, ["plan", path])
        assert result.exit_code == 3

    def test_planning_failure_exit_2(self, tmp_path):
        raw = forest_scenario_dict(0)
        raw["map"] = {"type": "boxes", "boxes": [
            {"min": [14.0, 14.0, 0.0], "max": [20.0, 20.0, 3.0]}]}
        raw["goal"] = [18.0, 18.0, 1.0]
        path = self._write_scenario(tmp_path, raw)
        result = CliRunner().invoke(cli_main, ["plan", path])
        assert result.exit_code == 2

    def test_gradcheck_exit_0(self):
        result = CliRunner().invoke(cli_main, ["gradcheck", "--seed", "1"])
        assert result.exit_code == 0
        assert "total" in result.output

    def test_plan_success_writes_artifacts(self, tmp_path):
        raw = forest_scenario_dict(0)
        raw["map"] = {"type": "forest", "density": 0.0}
        path = self._write_scenario(tmp_path, raw)
        out = tmp_path / "out"
        result = CliRunner().invoke(cli_main, ["plan", path, "--out", str(out)])
        assert result.exit_code == 0
        assert (out / "trajectory.csv").exists()
        assert (out / "plan.svg").exists()
