"""Trajectory sampling and CSV export."""

from __future__ import annotations

import csv

import numpy as np

from ..bspline import UniformBspline

SAMPLE_STEP = 0.01
HEADER = ["t", "x", "y", "z", "vx", "vy", "vz", "ax", "ay", "az", "yaw"]


def _planar_yaw(vel: np.ndarray, last_yaw: float = 0.0) -> float:
    """Heading from the planar velocity; hold ``last_yaw`` when near-hover."""
    vx, vy = float(vel[0]), float(vel[1])
    if np.hypot(vx, vy) < 1e-6:
        return last_yaw
    return float(np.arctan2(vy, vx))


def yaw_from_velocity(spline: UniformBspline, t: float) -> float:
    """Yaw at time ``t``: angle of the planar velocity, holding the last
    well-defined heading (0 if there has been none) through near-hover."""
    yaw = _planar_yaw(spline.evaluate(t, 1))
    if yaw != 0.0 or np.hypot(*spline.evaluate(t, 1)[:2]) >= 1e-6:
        return yaw
    n = int(np.floor(t / SAMPLE_STEP))
    for k in range(n, -1, -1):
        vel = spline.evaluate(k * SAMPLE_STEP, 1)
        if np.hypot(float(vel[0]), float(vel[1])) >= 1e-6:
            return _planar_yaw(vel)
    return 0.0


def sample_trajectory(spline: UniformBspline, step: float = SAMPLE_STEP) -> np.ndarray:
    """Rows of [t, pos, vel, acc, yaw] at a fixed step including the endpoint."""
    n = int(np.floor(spline.duration / step + 1e-9))
    ts = np.arange(n + 1) * step
    if spline.duration - ts[-1] > 1e-9:
        ts = np.append(ts, spline.duration)
    pos = spline.evaluate_many(ts, 0)
    vel = spline.evaluate_many(ts, 1)
    acc = spline.evaluate_many(ts, 2)
    yaw = np.zeros(len(ts))
    last = 0.0
    for i, v in enumerate(vel):
        last = _planar_yaw(v, last)
        yaw[i] = last
    return np.column_stack([ts, pos, vel, acc, yaw])


def write_trajectory_csv(path, spline: UniformBspline, step: float = SAMPLE_STEP):
    rows = sample_trajectory(spline, step)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow([f"{v:.9g}" for v in row])
