"""Pure-Python kernels: grid search and voxel traversal.

Reference implementation of the hot loops.  The compiled module in
``core.pyx`` mirrors these semantics exactly (same tie-breaking, same
traversal order) so the two are interchangeable at import time.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

import numpy as np

COMPILED = False

_INF = math.inf

# 26-connected neighborhood, fixed order (lexicographic in (dx, dy, dz)).
_OFFSETS = [
    (dx, dy, dz)
    for dx in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dz in (-1, 0, 1)
    if (dx, dy, dz) != (0, 0, 0)
]
_STEP_COSTS = [math.sqrt(dx * dx + dy * dy + dz * dz) for dx, dy, dz in _OFFSETS]


def _sub_offsets(off):
    """Proper nonzero sub-offsets of a diagonal move.

    A diagonal step is legal only when every cell obtained by zeroing some
    of its components is free; this forbids cutting corners, so the straight
    segment between the two cell centers stays in free space.
    """
    dx, dy, dz = off
    subs = {(dx, 0, 0), (0, dy, 0), (0, 0, dz), (dx, dy, 0), (dx, 0, dz), (0, dy, dz)}
    subs.discard((0, 0, 0))
    subs.discard(off)
    return tuple(sorted(subs))


_SUBS = [_sub_offsets(off) for off in _OFFSETS]


def _reconstruct(parent, node):
    out = []
    while node >= 0:
        out.append(node)
        node = parent[node]
    out.reverse()
    return out


def search(occ, nx, ny, nz, start, goal, resolution, use_heuristic):
    """Unidirectional best-first search over the flat occupancy array.

    ``start``/``goal`` are flat cell indices.  With ``use_heuristic`` the
    Euclidean straight-line heuristic makes this A*; without it, Dijkstra.
    Ties break on (f, h, flat index).

    Returns ``(path_flat_indices or None, cost, expanded)``.
    """
    nyz = ny * nz
    gx, gy, gz = goal // nyz, (goal // nz) % ny, goal % nz

    def heur(node):
        if not use_heuristic:
            return 0.0
        dx = node // nyz - gx
        dy = (node // nz) % ny - gy
        dz = node % nz - gz
        return resolution * math.sqrt(dx * dx + dy * dy + dz * dz)

    n = nx * nyz
    gscore = np.full(n, _INF)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=bool)

    gscore[start] = 0.0
    h0 = heur(start)
    heap = [(h0, h0, start)]
    expanded = 0

    while heap:
        f, h, u = heappop(heap)
        if closed[u]:
            continue
        closed[u] = True
        expanded += 1
        if u == goal:
            return _reconstruct(parent, u), float(gscore[u]), expanded
        ux, uy, uz = u // nyz, (u // nz) % ny, u % nz
        gu = gscore[u]
        for (dx, dy, dz), scale, subs in zip(_OFFSETS, _STEP_COSTS, _SUBS):
            vx, vy, vz = ux + dx, uy + dy, uz + dz
            if not (0 <= vx < nx and 0 <= vy < ny and 0 <= vz < nz):
                continue
            v = (vx * ny + vy) * nz + vz
            if occ[v] or closed[v]:
                continue
            ng = gu + resolution * scale
            if ng < gscore[v]:
                # diagonal moves may not cut corners: the cells spanned by
                # the step's axis projections must all be free
                if any(occ[((ux + sx) * ny + uy + sy) * nz + uz + sz]
                       for sx, sy, sz in subs):
                    continue
                gscore[v] = ng
                parent[v] = u
                hv = heur(v)
                heappush(heap, (ng + hv, hv, v))

    return None, _INF, expanded


def _fmin(heap, closed):
    while heap and closed[heap[0][2]]:
        heappop(heap)
    return heap[0][0] if heap else _INF


def bidi_search(occ, nx, ny, nz, start, goal, resolution, use_heuristic):
    """Bidirectional A* with front-to-back heuristics.

    Terminates when the best meeting cost mu satisfies
    mu <= max(fmin_forward, fmin_backward).  Until the frontiers meet the
    sides alternate by expansion count; afterwards the side with the larger
    frontier f-minimum is expanded, since it is closest to certifying mu
    and the other side's remaining work never has to be paid.
    Same return contract and tie-breaking as :func:`search`.
    """
    nyz = ny * nz
    n = nx * nyz
    targets = (goal, start)  # heuristic target per side

    def heur(node, side):
        if not use_heuristic:
            return 0.0
        t = targets[side]
        dx = node // nyz - t // nyz
        dy = (node // nz) % ny - (t // nz) % ny
        dz = node % nz - t % nz
        return resolution * math.sqrt(dx * dx + dy * dy + dz * dz)

    gscore = [np.full(n, _INF), np.full(n, _INF)]
    parent = [np.full(n, -1, dtype=np.int64), np.full(n, -1, dtype=np.int64)]
    closed = [np.zeros(n, dtype=bool), np.zeros(n, dtype=bool)]
    heaps = [[], []]

    gscore[0][start] = 0.0
    gscore[1][goal] = 0.0
    h0 = heur(start, 0)
    h1 = heur(goal, 1)
    heappush(heaps[0], (h0, h0, start))
    heappush(heaps[1], (h1, h1, goal))

    mu = _INF
    meet = -1
    n_exp = [0, 0]

    while heaps[0] or heaps[1]:
        f0 = _fmin(heaps[0], closed[0])
        f1 = _fmin(heaps[1], closed[1])
        if mu <= max(f0, f1):
            break
        if not heaps[0] and not heaps[1]:
            break
        if not heaps[1]:
            side = 0
        elif not heaps[0]:
            side = 1
        elif mu < _INF:
            side = 0 if f0 >= f1 else 1
        else:
            side = 0 if n_exp[0] <= n_exp[1] else 1
        f, h, u = heappop(heaps[side])
        if closed[side][u]:
            continue
        closed[side][u] = True
        n_exp[side] += 1
        other = 1 - side
        gu = gscore[side][u]
        if gscore[other][u] < _INF and gu + gscore[other][u] < mu:
            mu = gu + gscore[other][u]
            meet = u
        ux, uy, uz = u // nyz, (u // nz) % ny, u % nz
        for (dx, dy, dz), scale, subs in zip(_OFFSETS, _STEP_COSTS, _SUBS):
            vx, vy, vz = ux + dx, uy + dy, uz + dz
            if not (0 <= vx < nx and 0 <= vy < ny and 0 <= vz < nz):
                continue
            v = (vx * ny + vy) * nz + vz
            if occ[v] or closed[side][v]:
                continue
            ng = gu + resolution * scale
            if ng < gscore[side][v]:
                if any(occ[((ux + sx) * ny + uy + sy) * nz + uz + sz]
                       for sx, sy, sz in subs):
                    continue
                gscore[side][v] = ng
                parent[side][v] = u
                hv = heur(v, side)
                heappush(heaps[side], (ng + hv, hv, v))
                if gscore[other][v] < _INF and ng + gscore[other][v] < mu:
                    mu = ng + gscore[other][v]
                    meet = v

    if meet < 0:
        return None, _INF, n_exp[0] + n_exp[1]

    fwd = _reconstruct(parent[0], meet)
    bwd = _reconstruct(parent[1], meet)  # meet -> ... -> goal after reversal
    path = fwd + bwd[::-1][1:]
    return path, float(mu), n_exp[0] + n_exp[1]


def _blocked(occ, nx, ny, nz, ix, iy, iz):
    if not (0 <= ix < nx and 0 <= iy < ny and 0 <= iz < nz):
        return True
    return bool(occ[(ix * ny + iy) * nz + iz])


def _traverse(occ, nx, ny, nz, p0, p1, want_last_exit):
    """Amanatides-Woo voxel walk in grid-local coordinates (unit cells).

    ``want_last_exit`` False: return t of the first entry into a blocked
    cell (occupied or out of bounds), or -1.0.  True: return t of the last
    blocked-to-free crossing along the whole segment, or -1.0.
    """
    x0, y0, z0 = p0
    x1, y1, z1 = p1
    dx, dy, dz = x1 - x0, y1 - y0, z1 - z0

    ix, iy, iz = int(math.floor(x0)), int(math.floor(y0)), int(math.floor(z0))
    if dx == 0.0 and dy == 0.0 and dz == 0.0:
        return -1.0

    step = [0, 0, 0]
    tmax = [_INF, _INF, _INF]
    tdelta = [_INF, _INF, _INF]
    pos = (x0, y0, z0)
    cell = [ix, iy, iz]
    d = (dx, dy, dz)
    for a in range(3):
        if d[a] > 0.0:
            step[a] = 1
            tmax[a] = (cell[a] + 1.0 - pos[a]) / d[a]
            tdelta[a] = 1.0 / d[a]
        elif d[a] < 0.0:
            step[a] = -1
            tmax[a] = (cell[a] - pos[a]) / d[a]
            tdelta[a] = -1.0 / d[a]

    prev_blocked = _blocked(occ, nx, ny, nz, ix, iy, iz)
    last_exit = -1.0

    while True:
        # Deterministic axis tie-break: x before y before z.
        a = 0
        if tmax[1] < tmax[a]:
            a = 1
        if tmax[2] < tmax[a]:
            a = 2
        t = tmax[a]
        if t > 1.0:
            return last_exit if want_last_exit else -1.0
        cell[a] += step[a]
        tmax[a] += tdelta[a]
        blocked = _blocked(occ, nx, ny, nz, cell[0], cell[1], cell[2])
        if want_last_exit:
            if prev_blocked and not blocked:
                last_exit = t
            prev_blocked = blocked
        elif blocked:
            return t


def first_hit(occ, nx, ny, nz, p0, p1):
    """t in [0, 1] of the segment's first entry into a blocked cell, or -1."""
    return _traverse(occ, nx, ny, nz, p0, p1, False)


def last_exit(occ, nx, ny, nz, p0, p1):
    """t of the last blocked-to-free crossing along the segment, or -1."""
    return _traverse(occ, nx, ny, nz, p0, p1, True)
