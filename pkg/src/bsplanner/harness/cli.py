"""Command-line front end.

Exit codes: 0 success, 2 planning failure, 3 invalid input.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from ..errors import InvalidInputError, NoPathError, PlanningFailedError
from . import bench as bench_mod
from . import gradcheck as gradcheck_mod
from .planner import plan_once
from .render import render_svg
from .scenario import load_scenario
from .sim import DEFAULT_PERIOD, DEFAULT_SENSING, simulate

EXIT_PLANNING = 2
EXIT_INVALID = 3


def _load(path):
    try:
        return load_scenario(path)
    except (InvalidInputError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"invalid scenario: {exc}", err=True)
        sys.exit(EXIT_INVALID)


@click.group()
def main():
    """Guide-path search and gradient-based trajectory planning."""


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for trajectory.csv and plan.svg.")
def plan(scenario_file, out):
    """Plan once on SCENARIO_FILE and print a report."""
    scenario = _load(scenario_file)
    try:
        report = plan_once(scenario, out_dir=out)
    except (NoPathError, PlanningFailedError) as exc:
        click.echo(f"planning failed: {exc}", err=True)
        sys.exit(EXIT_PLANNING)
    click.echo(json.dumps(report.summary(), indent=2))
    if out is not None:
        render_svg(scenario.world_grid(), report.guide, report.phi_s,
                   report.phi_f, Path(out) / "plan.svg",
                   start=np.asarray(scenario.start_pos),
                   goal=np.asarray(scenario.goal))
    if not report.success:
        click.echo("trajectory not collision-free", err=True)
        sys.exit(EXIT_PLANNING)


@main.command("simulate")
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--sense", type=float, default=DEFAULT_SENSING,
              help="Sensing radius, meters.")
@click.option("--period", type=float, default=DEFAULT_PERIOD,
              help="Replan period, seconds.")
def simulate_cmd(scenario_file, sense, period):
    """Run the limited-sensing replanning simulation."""
    scenario = _load(scenario_file)
    if sense <= 0 or period <= 0:
        click.echo("sense and period must be positive", err=True)
        sys.exit(EXIT_INVALID)
    report = simulate(scenario, sensing_radius=sense, replan_period=period)
    click.echo(json.dumps({
        "success": report.success,
        "replans": report.replans,
        "collision": report.collision,
        "path_length_m": report.path_length,
        "elapsed_s": report.elapsed,
    }, indent=2))
    if not report.success:
        sys.exit(EXIT_PLANNING)


@main.command("bench")
@click.argument("suite_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--algos", default="dijkstra,astar,bidirectional",
              help="Comma-separated algorithm subset.")
@click.option("--out", type=click.Path(dir_okay=False), default="metrics.csv",
              help="Metrics CSV path.")
def bench_cmd(suite_file, algos, out):
    """Benchmark search algorithms over a scenario suite."""
    algorithms = [a.strip() for a in algos.split(",") if a.strip()]
    try:
        entries, trials, warmups = bench_mod.load_suite(suite_file)
        rows = bench_mod.bench_entries(entries, algorithms, trials, warmups)
    except (InvalidInputError, json.JSONDecodeError, OSError) as exc:
        click.echo(f"invalid suite: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    bench_mod.write_metrics_csv(out, rows)
    for (scen, algo), stats in sorted(bench_mod.medians(rows).items()):
        click.echo(f"{scen:20s} {algo:14s} median_time={stats['time_s']:.4f}s "
                   f"expanded={stats['expanded']:.0f} cost={stats['cost_m']:.3f}")


@main.command("gradcheck")
@click.option("--seed", type=int, default=0)
def gradcheck_cmd(seed):
    """Verify analytic gradients against finite differences."""
    errors = gradcheck_mod.gradcheck(seed=seed)
    for line in gradcheck_mod.report_lines(errors):
        click.echo(line)
    if not gradcheck_mod.passed(errors):
        sys.exit(1)


@main.command("render")
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_svg", type=click.Path(dir_okay=False))
def render_cmd(scenario_file, out_svg):
    """Plan on SCENARIO_FILE and render the scene to OUT_SVG."""
    scenario = _load(scenario_file)
    try:
        report = plan_once(scenario)
    except (NoPathError, PlanningFailedError) as exc:
        click.echo(f"planning failed: {exc}", err=True)
        sys.exit(EXIT_PLANNING)
    try:
        count = render_svg(scenario.world_grid(), report.guide, report.phi_s,
                           report.phi_f, out_svg,
                           start=np.asarray(scenario.start_pos),
                           goal=np.asarray(scenario.goal))
    except OSError as exc:
        click.echo(f"cannot write svg: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    click.echo(f"wrote {out_svg} ({count} obstacle columns)")


if __name__ == "__main__":
    main()
