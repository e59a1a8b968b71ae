"""Voxel occupancy world model.

World coordinates are meters; cell (i, j, k) spans
``origin + [i, j, k] * resolution`` to ``origin + [i+1, j+1, k+1] * resolution``.
Queries outside the bounding box always report occupied, which keeps the
search and the optimizer confined to the known world.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import InvalidInputError, PreconditionError


@dataclass(frozen=True)
class OccupancyGrid:
    resolution: float
    origin: np.ndarray  # (3,) world position of cell (0,0,0) corner
    dims: tuple[int, int, int]
    occupancy: np.ndarray  # bool, shape dims
    inflation_radius: float = 0.0
    _flat: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.resolution <= 0:
            raise InvalidInputError("resolution must be positive")
        if any(d <= 0 for d in self.dims):
            raise InvalidInputError("grid dims must be positive")
        occ = np.ascontiguousarray(self.occupancy, dtype=bool)
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "_flat", occ.reshape(-1).view(np.uint8))

    # -- coordinate transforms -------------------------------------------

    def world_to_cell(self, p) -> tuple[int, int, int]:
        c = np.floor((np.asarray(p, dtype=float) - self.origin) / self.resolution)
        return int(c[0]), int(c[1]), int(c[2])

    def cell_center(self, cell) -> np.ndarray:
        return self.origin + (np.asarray(cell, dtype=float) + 0.5) * self.resolution

    def in_bounds_cell(self, cell) -> bool:
        return all(0 <= cell[a] < self.dims[a] for a in range(3))

    def to_local(self, p) -> np.ndarray:
        """World point -> grid-local coordinates with unit cells."""
        return (np.asarray(p, dtype=float) - self.origin) / self.resolution

    # -- queries -----------------------------------------------------------

    def is_occupied_cell(self, cell) -> bool:
        if not self.in_bounds_cell(cell):
            return True
        return bool(self.occupancy[cell[0], cell[1], cell[2]])

    def is_occupied(self, p) -> bool:
        return self.is_occupied_cell(self.world_to_cell(p))

    def occupied_count(self) -> int:
        return int(self.occupancy.sum())

    # -- operations ----------------------------------------------------------

    def inflate(self, radius: float) -> "OccupancyGrid":
        """Copy with every cell within ``radius`` of an occupied cell center marked.

        Distance is Euclidean between cell centers, so the result matches a
        brute-force distance transform exactly.
        """
        if radius < 0:
            raise InvalidInputError("inflation radius must be nonnegative")
        if radius == 0 or not self.occupancy.any():
            return replace(self, inflation_radius=self.inflation_radius + radius)
        dist = ndimage.distance_transform_edt(
            ~self.occupancy, sampling=self.resolution
        )
        occ = dist <= radius + 1e-12
        return OccupancyGrid(
            resolution=self.resolution,
            origin=self.origin,
            dims=self.dims,
            occupancy=occ,
            inflation_radius=self.inflation_radius + radius,
        )

    def raycast(self, p_from, p_to):
        """First entry point of the segment into an occupied cell, or None.

        The start point must lie in a free cell.  Out-of-bounds cells count
        as occupied, so a segment leaving the grid hits at the boundary face.
        """
        p_from = np.asarray(p_from, dtype=float)
        p_to = np.asarray(p_to, dtype=float)
        if self.is_occupied(p_from):
            raise PreconditionError("raycast start point lies in an occupied cell")
        t = _kernels.first_hit(
            self._flat, *self.dims, self.to_local(p_from), self.to_local(p_to)
        )
        if t < 0:
            return None
        return p_from + t * (p_to - p_from)

    def segment_free(self, p_from, p_to) -> bool:
        """True if the segment never enters an occupied or out-of-bounds cell."""
        if self.is_occupied(p_from):
            return False
        t = _kernels.first_hit(
            self._flat, *self.dims, self.to_local(p_from), self.to_local(p_to)
        )
        return t < 0

    def last_surface_exit(self, p_from, p_to):
        """Last crossing out of occupied space along the segment, or None.

        Unlike :meth:`raycast` the start point may be inside an obstacle;
        this is how anchor surface points are recovered.
        """
        p_from = np.asarray(p_from, dtype=float)
        p_to = np.asarray(p_to, dtype=float)
        t = _kernels.last_exit(
            self._flat, *self.dims, self.to_local(p_from), self.to_local(p_to)
        )
        if t < 0:
            return None
        return p_from + t * (p_to - p_from)

    def clear_sphere(self, center, radius: float) -> "OccupancyGrid":
        """Copy with cells whose center lies within ``radius`` of ``center`` freed.

        Scenario assembly uses this to guarantee free start/goal cells.
        """
        idx = np.indices(self.dims, dtype=float)
        centers = self.origin[:, None, None, None] + (idx + 0.5) * self.resolution
        d2 = ((centers - np.asarray(center, dtype=float)[:, None, None, None]) ** 2).sum(axis=0)
        occ = self.occupancy & (d2 > radius * radius)
        return replace(self, occupancy=occ)


def build_grid(points, resolution: float, bounds) -> OccupancyGrid:
    """Voxelize a point list: a cell is occupied iff it contains a point.

    ``bounds`` is ``(min_corner, max_corner)``; points outside are ignored,
    non-finite coordinates are rejected.
    """
    lo = np.asarray(bounds[0], dtype=float)
    hi = np.asarray(bounds[1], dtype=float)
    if resolution <= 0:
        raise InvalidInputError("resolution must be positive")
    if np.any(hi <= lo):
        raise InvalidInputError("bounds are degenerate")

    dims = tuple(int(np.ceil((hi[a] - lo[a]) / resolution - 1e-9)) for a in range(3))
    occ = np.zeros(dims, dtype=bool)

    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if pts.size:
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("point list contains non-finite coordinates")
        cells = np.floor((pts - lo) / resolution).astype(np.int64)
        inside = np.all((cells >= 0) & (cells < np.asarray(dims)), axis=1)
        cells = cells[inside]
        occ[cells[:, 0], cells[:, 1], cells[:, 2]] = True

    return OccupancyGrid(resolution=resolution, origin=lo, dims=dims, occupancy=occ)


def inflate(grid: OccupancyGrid, radius: float) -> OccupancyGrid:
    return grid.inflate(radius)


def raycast(grid: OccupancyGrid, p_from, p_to):
    return grid.raycast(p_from, p_to)


def random_forest(
    seed: int,
    density: float,
    bounds,
    resolution: float,
    radius_range: tuple[float, float] = (0.2, 0.5),
) -> OccupancyGrid:
    """Deterministic pillar forest: vertical cylinders at full world height.

    Pillar count is ``round(density * xy_area)``; centers and radii come
    from a seeded generator, so the same arguments give identical grids.
    """
    if density < 0:
        raise InvalidInputError("density must be nonnegative")
    lo = np.asarray(bounds[0], dtype=float)
    hi = np.asarray(bounds[1], dtype=float)
    grid = build_grid([], resolution, bounds)
    area = (hi[0] - lo[0]) * (hi[1] - lo[1])
    n_pillars = int(round(density * area))
    if n_pillars == 0:
        return grid

    rng = np.random.default_rng(seed)
    cx = rng.uniform(lo[0], hi[0], n_pillars)
    cy = rng.uniform(lo[1], hi[1], n_pillars)
    rad = rng.uniform(radius_range[0], radius_range[1], n_pillars)

    nx, ny, nz = grid.dims
    xs = lo[0] + (np.arange(nx) + 0.5) * resolution
    ys = lo[1] + (np.arange(ny) + 0.5) * resolution
    occ = np.zeros(grid.dims, dtype=bool)
    for x0, y0, r in zip(cx, cy, rad):
        mask = (xs[:, None] - x0) ** 2 + (ys[None, :] - y0) ** 2 <= r * r
        occ |= mask[:, :, None]
    return OccupancyGrid(resolution=resolution, origin=lo, dims=grid.dims, occupancy=occ)


def load_xyz(path) -> np.ndarray:
    """Read a plain-text xyz file: one whitespace-separated triple per line."""
    try:
        pts = np.loadtxt(path, dtype=float, ndmin=2)
    except ValueError as exc:
        raise InvalidInputError(f"malformed xyz file {path}: {exc}") from exc
    if pts.size == 0:
        return np.empty((0, 3))
    if pts.shape[1] != 3:
        raise InvalidInputError(f"xyz file {path} must have 3 columns")
    return pts
