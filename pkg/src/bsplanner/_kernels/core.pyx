# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: grid search and voxel traversal.

Semantics (tie-breaking, expansion order, traversal order) match the
pure-Python module exactly; the two are interchangeable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, floor, sqrt
from libc.stdlib cimport free, malloc, realloc

cnp.import_array()

COMPILED = True

cdef struct Entry:
    double f
    double h
    long long idx

cdef int N_OFF = 26
cdef long long[26] OFF_X
cdef long long[26] OFF_Y
cdef long long[26] OFF_Z
cdef double[26] OFF_COST
# Diagonal moves may not cut corners: every cell obtained by zeroing some
# components of the offset (its axis projections) must be free too.  Up to
# 6 such sub-offsets per move, ordered lexicographically like the pure
# kernel's list.
cdef int N_SUB[26]
cdef long long[26][6] SUB_X
cdef long long[26][6] SUB_Y
cdef long long[26][6] SUB_Z

cdef void _init_offsets():
    cdef int i = 0
    cdef int dx, dy, dz
    for dx in range(-1, 2):
        for dy in range(-1, 2):
            for dz in range(-1, 2):
                if dx == 0 and dy == 0 and dz == 0:
                    continue
                OFF_X[i] = dx
                OFF_Y[i] = dy
                OFF_Z[i] = dz
                OFF_COST[i] = sqrt(<double>(dx * dx + dy * dy + dz * dz))
                subs = {(dx, 0, 0), (0, dy, 0), (0, 0, dz),
                        (dx, dy, 0), (dx, 0, dz), (0, dy, dz)}
                subs.discard((0, 0, 0))
                subs.discard((dx, dy, dz))
                N_SUB[i] = len(subs)
                for j, (sx, sy, sz) in enumerate(sorted(subs)):
                    SUB_X[i][j] = sx
                    SUB_Y[i][j] = sy
                    SUB_Z[i][j] = sz
                i += 1

_init_offsets()


cdef inline bint _cuts_corner(const unsigned char* occ, int k,
                              long long ux, long long uy, long long uz,
                              long long ny, long long nz) nogil:
    cdef int j
    for j in range(N_SUB[k]):
        if occ[((ux + SUB_X[k][j]) * ny + uy + SUB_Y[k][j]) * nz
               + uz + SUB_Z[k][j]]:
            return True
    return False


cdef inline bint _less(Entry a, Entry b) nogil:
    if a.f != b.f:
        return a.f < b.f
    if a.h != b.h:
        return a.h < b.h
    return a.idx < b.idx


cdef class _Heap:
    cdef Entry* data
    cdef Py_ssize_t size
    cdef Py_ssize_t cap

    def __cinit__(self):
        self.cap = 1024
        self.size = 0
        self.data = <Entry*>malloc(self.cap * sizeof(Entry))
        if self.data == NULL:
            raise MemoryError()

    def __dealloc__(self):
        if self.data != NULL:
            free(self.data)

    cdef void push(self, double f, double h, long long idx):
        cdef Entry* nd
        cdef Entry e
        cdef Py_ssize_t i, p
        if self.size == self.cap:
            self.cap *= 2
            nd = <Entry*>realloc(self.data, self.cap * sizeof(Entry))
            if nd == NULL:
                raise MemoryError()
            self.data = nd
        e.f = f
        e.h = h
        e.idx = idx
        i = self.size
        self.size += 1
        while i > 0:
            p = (i - 1) >> 1
            if _less(e, self.data[p]):
                self.data[i] = self.data[p]
                i = p
            else:
                break
        self.data[i] = e

    cdef Entry pop(self):
        cdef Entry top = self.data[0]
        cdef Entry e
        cdef Py_ssize_t i = 0, c
        self.size -= 1
        if self.size > 0:
            e = self.data[self.size]
            while True:
                c = 2 * i + 1
                if c >= self.size:
                    break
                if c + 1 < self.size and _less(self.data[c + 1], self.data[c]):
                    c += 1
                if _less(self.data[c], e):
                    self.data[i] = self.data[c]
                    i = c
                else:
                    break
            self.data[i] = e
        return top


cdef inline double _heur(long long node, long long target,
                         long long ny, long long nz, long long nyz,
                         double resolution, bint use_heuristic) nogil:
    cdef double dx, dy, dz
    if not use_heuristic:
        return 0.0
    dx = <double>(node // nyz - target // nyz)
    dy = <double>((node // nz) % ny - (target // nz) % ny)
    dz = <double>(node % nz - target % nz)
    return resolution * sqrt(dx * dx + dy * dy + dz * dz)


cdef inline double _heur_xyz(long long x, long long y, long long z,
                             long long tx, long long ty, long long tz,
                             double resolution, bint use_heuristic) nogil:
    cdef double dx, dy, dz
    if not use_heuristic:
        return 0.0
    dx = <double>(x - tx)
    dy = <double>(y - ty)
    dz = <double>(z - tz)
    return resolution * sqrt(dx * dx + dy * dy + dz * dz)


cdef object _reconstruct(long long[::1] parent, long long node):
    cdef Py_ssize_t count = 0
    cdef long long u = node
    while u >= 0:
        count += 1
        u = parent[u]
    out = np.empty(count, dtype=np.int64)
    cdef long long[::1] vout = out
    cdef Py_ssize_t i = count - 1
    u = node
    while u >= 0:
        vout[i] = u
        i -= 1
        u = parent[u]
    return out


def search(const unsigned char[::1] occ, long long nx, long long ny, long long nz,
           long long start, long long goal, double resolution, bint use_heuristic):
    """Unidirectional A* (Dijkstra when use_heuristic is false)."""
    cdef long long nyz = ny * nz
    cdef long long n = nx * nyz
    gscore_a = np.full(n, np.inf)
    parent_a = np.full(n, -1, dtype=np.int64)
    closed_a = np.zeros(n, dtype=np.uint8)
    cdef double[::1] gscore = gscore_a
    cdef long long[::1] parent = parent_a
    cdef unsigned char[::1] closed = closed_a

    cdef _Heap heap = _Heap()
    cdef double h0 = _heur(start, goal, ny, nz, nyz, resolution, use_heuristic)
    gscore[start] = 0.0
    heap.push(h0, h0, start)

    cdef long long expanded = 0
    cdef Entry top
    cdef long long u, v, ux, uy, uz, vx, vy, vz
    cdef long long tx = goal // nyz, ty = (goal // nz) % ny, tz = goal % nz
    cdef double gu, ng, hv
    cdef int k

    while heap.size > 0:
        top = heap.pop()
        u = top.idx
        if closed[u]:
            continue
        closed[u] = 1
        expanded += 1
        if u == goal:
            return _reconstruct(parent, u), gscore[u], expanded
        ux = u // nyz
        uy = (u // nz) % ny
        uz = u % nz
        gu = gscore[u]
        for k in range(N_OFF):
            vx = ux + OFF_X[k]
            vy = uy + OFF_Y[k]
            vz = uz + OFF_Z[k]
            if vx < 0 or vx >= nx or vy < 0 or vy >= ny or vz < 0 or vz >= nz:
                continue
            v = (vx * ny + vy) * nz + vz
            if occ[v] or closed[v]:
                continue
            ng = gu + resolution * OFF_COST[k]
            if ng < gscore[v]:
                if _cuts_corner(&occ[0], k, ux, uy, uz, ny, nz):
                    continue
                gscore[v] = ng
                parent[v] = u
                hv = _heur_xyz(vx, vy, vz, tx, ty, tz, resolution, use_heuristic)
                heap.push(ng + hv, hv, v)

    return None, INFINITY, expanded


cdef double _fmin(_Heap heap, unsigned char* closed):
    while heap.size > 0 and closed[heap.data[0].idx]:
        heap.pop()
    if heap.size > 0:
        return heap.data[0].f
    return INFINITY


def bidi_search(const unsigned char[::1] occ, long long nx, long long ny, long long nz,
                long long start, long long goal, double resolution, bint use_heuristic):
    """Bidirectional A*; stops when mu <= max of the two frontier f-minima.

    Until the frontiers meet the sides alternate by expansion count;
    afterwards the side with the larger frontier f-minimum is expanded,
    since it is closest to certifying mu.
    """
    cdef long long nyz = ny * nz
    cdef long long n = nx * nyz

    g0_a = np.full(n, np.inf)
    g1_a = np.full(n, np.inf)
    p0_a = np.full(n, -1, dtype=np.int64)
    p1_a = np.full(n, -1, dtype=np.int64)
    c0_a = np.zeros(n, dtype=np.uint8)
    c1_a = np.zeros(n, dtype=np.uint8)
    cdef double[::1] g0v = g0_a
    cdef double[::1] g1v = g1_a
    cdef long long[::1] p0v = p0_a
    cdef long long[::1] p1v = p1_a
    cdef unsigned char[::1] c0v = c0_a
    cdef unsigned char[::1] c1v = c1_a
    # Raw pointers: the expansion loop swaps the active side every
    # iteration, and rebinding typed memoryviews there costs more than the
    # expansion itself.
    cdef double* g0 = &g0v[0]
    cdef double* g1 = &g1v[0]
    cdef long long* p0 = &p0v[0]
    cdef long long* p1 = &p1v[0]
    cdef unsigned char* c0 = &c0v[0]
    cdef unsigned char* c1 = &c1v[0]
    cdef const unsigned char* occp = &occ[0]

    cdef _Heap h0 = _Heap()
    cdef _Heap h1 = _Heap()
    cdef double hs = _heur(start, goal, ny, nz, nyz, resolution, use_heuristic)
    cdef double hg = _heur(goal, start, ny, nz, nyz, resolution, use_heuristic)
    g0[start] = 0.0
    g1[goal] = 0.0
    h0.push(hs, hs, start)
    h1.push(hg, hg, goal)

    cdef double mu = INFINITY
    cdef long long meet = -1
    cdef long long exp0 = 0
    cdef long long exp1 = 0

    cdef int side
    cdef _Heap heap
    cdef double* gs
    cdef double* go
    cdef long long* ps
    cdef unsigned char* cs
    cdef long long sx = start // nyz, sy = (start // nz) % ny, sz = start % nz
    cdef long long gx = goal // nyz, gy = (goal // nz) % ny, gz = goal % nz
    cdef long long tx, ty, tz
    cdef Entry top
    cdef long long u, v, ux, uy, uz, vx, vy, vz
    cdef double gu, ng, hv, f0, f1
    cdef int k

    while h0.size > 0 or h1.size > 0:
        f0 = _fmin(h0, c0)
        f1 = _fmin(h1, c1)
        if mu <= (f0 if f0 > f1 else f1):
            break
        if h0.size == 0 and h1.size == 0:
            break
        if h1.size == 0:
            side = 0
        elif h0.size == 0:
            side = 1
        elif mu < INFINITY:
            side = 0 if f0 >= f1 else 1
        else:
            side = 0 if exp0 <= exp1 else 1
        if side == 0:
            heap = h0
            gs = g0
            go = g1
            ps = p0
            cs = c0
            tx = gx
            ty = gy
            tz = gz
        else:
            heap = h1
            gs = g1
            go = g0
            ps = p1
            cs = c1
            tx = sx
            ty = sy
            tz = sz
        top = heap.pop()
        u = top.idx
        if cs[u]:
            continue
        cs[u] = 1
        if side == 0:
            exp0 += 1
        else:
            exp1 += 1
        gu = gs[u]
        if go[u] < INFINITY and gu + go[u] < mu:
            mu = gu + go[u]
            meet = u
        ux = u // nyz
        uy = (u // nz) % ny
        uz = u % nz
        for k in range(N_OFF):
            vx = ux + OFF_X[k]
            vy = uy + OFF_Y[k]
            vz = uz + OFF_Z[k]
            if vx < 0 or vx >= nx or vy < 0 or vy >= ny or vz < 0 or vz >= nz:
                continue
            v = (vx * ny + vy) * nz + vz
            if occp[v] or cs[v]:
                continue
            ng = gu + resolution * OFF_COST[k]
            if ng < gs[v]:
                if _cuts_corner(occp, k, ux, uy, uz, ny, nz):
                    continue
                gs[v] = ng
                ps[v] = u
                hv = _heur_xyz(vx, vy, vz, tx, ty, tz, resolution, use_heuristic)
                heap.push(ng + hv, hv, v)
                if go[v] < INFINITY and ng + go[v] < mu:
                    mu = ng + go[v]
                    meet = v

    if meet < 0:
        return None, INFINITY, exp0 + exp1

    fwd = _reconstruct(p0v, meet)
    bwd = _reconstruct(p1v, meet)
    path = np.concatenate([fwd, bwd[::-1][1:]])
    return path, mu, exp0 + exp1


cdef inline bint _blocked(const unsigned char[::1] occ,
                          long long nx, long long ny, long long nz,
                          long long ix, long long iy, long long iz) nogil:
    if ix < 0 or ix >= nx or iy < 0 or iy >= ny or iz < 0 or iz >= nz:
        return True
    return occ[(ix * ny + iy) * nz + iz] != 0


cdef double _traverse(const unsigned char[::1] occ,
                      long long nx, long long ny, long long nz,
                      double x0, double y0, double z0,
                      double x1, double y1, double z1,
                      bint want_last_exit):
    cdef double dx = x1 - x0, dy = y1 - y0, dz = z1 - z0
    cdef long long[3] cell
    cdef long long[3] step
    cdef double[3] tmax
    cdef double[3] tdelta
    cdef double[3] d
    cdef double[3] pos
    cdef int a
    cdef double t
    cdef bint prev_blocked, blocked
    cdef double last = -1.0

    cell[0] = <long long>floor(x0)
    cell[1] = <long long>floor(y0)
    cell[2] = <long long>floor(z0)
    if dx == 0.0 and dy == 0.0 and dz == 0.0:
        return -1.0

    d[0] = dx
    d[1] = dy
    d[2] = dz
    pos[0] = x0
    pos[1] = y0
    pos[2] = z0
    for a in range(3):
        if d[a] > 0.0:
            step[a] = 1
            tmax[a] = (<double>cell[a] + 1.0 - pos[a]) / d[a]
            tdelta[a] = 1.0 / d[a]
        elif d[a] < 0.0:
            step[a] = -1
            tmax[a] = (<double>cell[a] - pos[a]) / d[a]
            tdelta[a] = -1.0 / d[a]
        else:
            step[a] = 0
            tmax[a] = INFINITY
            tdelta[a] = INFINITY

    prev_blocked = _blocked(occ, nx, ny, nz, cell[0], cell[1], cell[2])

    while True:
        a = 0
        if tmax[1] < tmax[a]:
            a = 1
        if tmax[2] < tmax[a]:
            a = 2
        t = tmax[a]
        if t > 1.0:
            return last if want_last_exit else -1.0
        cell[a] += step[a]
        tmax[a] += tdelta[a]
        blocked = _blocked(occ, nx, ny, nz, cell[0], cell[1], cell[2])
        if want_last_exit:
            if prev_blocked and not blocked:
                last = t
            prev_blocked = blocked
        elif blocked:
            return t


def first_hit(const unsigned char[::1] occ, long long nx, long long ny, long long nz,
              p0, p1):
    """t in [0, 1] of the segment's first entry into a blocked cell, or -1."""
    return _traverse(occ, nx, ny, nz, p0[0], p0[1], p0[2], p1[0], p1[1], p1[2], False)


def last_exit(const unsigned char[::1] occ, long long nx, long long ny, long long nz,
              p0, p1):
    """t of the last blocked-to-free crossing along the segment, or -1."""
    return _traverse(occ, nx, ny, nz, p0[0], p0[1], p0[2], p1[0], p1[1], p1[2], True)
