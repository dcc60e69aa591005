"""Hot numerical kernels, each with a numba and a pure-numpy implementation.

The public names at the bottom dispatch on :data:`hopwire._numba.USE_NUMBA`.
Both implementations are importable directly (``*_numba`` / ``*_numpy``) so
tests and benchmarks can compare them in one process.
"""
import numpy as np

from ._numba import USE_NUMBA, njit

UNREACHABLE = -1
INT64_MAX = np.iinfo(np.int64).max


# --------------------------------------------------------------------------
# breadth-first search on a dense boolean adjacency matrix


@njit
def _bfs_rows_numba(adj, sources, cap):
    n = adj.shape[0]
    # adjacency lists once, so each search costs O(n + edges) instead of O(n^2)
    starts = np.zeros(n + 1, dtype=np.int64)
    for u in range(n):
        for v in range(n):
            if adj[u, v]:
                starts[u + 1] += 1
    for u in range(n):
        starts[u + 1] += starts[u]
    nbrs = np.empty(starts[n], dtype=np.int64)
    fill = starts[:n].copy()
    for u in range(n):
        for v in range(n):
            if adj[u, v]:
                nbrs[fill[u]] = v
                fill[u] += 1

    out = np.full((sources.shape[0], n), -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for row in range(sources.shape[0]):
        s = sources[row]
        dist = out[row]
        dist[s] = 0
        head = 0
        tail = 0
        queue[tail] = s
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du >= cap:
                continue
            for k in range(starts[u], starts[u + 1]):
                v = nbrs[k]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
    return out


def _bfs_rows_numpy(adj, sources, cap):
    n = adj.shape[0]
    m = sources.shape[0]
    out = np.full((m, n), UNREACHABLE, dtype=np.int64)
    frontier = np.zeros((m, n), dtype=bool)
    frontier[np.arange(m), sources] = True
    out[frontier] = 0
    visited = frontier.copy()
    a = adj.astype(np.float64)
    level = 0
    while frontier.any() and level < cap:
        level += 1
        frontier = ((frontier.astype(np.float64) @ a) > 0) & ~visited
        out[frontier] = level
        visited |= frontier
    return out


# --------------------------------------------------------------------------
# non-negative int64 matrix product with overflow detection


@njit
def _matmul_checked_numba(a, b):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m), dtype=np.int64)
    for i in range(n):
        for t in range(k):
            ait = a[i, t]
            if ait == 0:
                continue
            for j in range(m):
                btj = b[t, j]
                if btj == 0:
                    continue
                acc = out[i, j]
                if btj > (INT64_MAX - acc) // ait:
                    return out, False
                out[i, j] = acc + ait * btj
    return out, True


def _matmul_checked_numpy(a, b):
    # float64 bound first; exact python-int fallback only near the int64 limit
    approx = a.astype(np.float64) @ b.astype(np.float64)
    if approx.size == 0 or approx.max() < 2.0**62:
        return a @ b, True
    exact = a.astype(object) @ b.astype(object)
    if max(exact.ravel()) > INT64_MAX:
        return np.zeros(exact.shape, dtype=np.int64), False
    return exact.astype(np.int64), True


# --------------------------------------------------------------------------
# cyclic Jacobi eigenvalue sweeps (unsorted output)


@njit
def _jacobi_numba(m, tol, max_sweeps):
    a = m.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = np.sqrt(np.sum(a * a))
    sweeps = 0
    off = 0.0
    while True:
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        off = np.sqrt(off)
        if off <= tol * scale or sweeps >= max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweeps, off


def _jacobi_numpy(m, tol, max_sweeps):
    a = np.array(m, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.sqrt(np.sum(a * a))
    mask = ~np.eye(n, dtype=bool)
    sweeps = 0
    while True:
        off = float(np.sqrt(np.sum(a[mask] ** 2)))
        if off <= tol * scale or sweeps >= max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweeps, off


# --------------------------------------------------------------------------
# row scatter-add, the backward of a row gather


@njit
def _scatter_add_rows_numba(index, values, n):
    out = np.zeros((n, values.shape[1]), dtype=values.dtype)
    for r in range(index.shape[0]):
        i = index[r]
        for c in range(values.shape[1]):
            out[i, c] += values[r, c]
    return out


def _scatter_add_rows_numpy(index, values, n):
    out = np.zeros((n, values.shape[1]), dtype=values.dtype)
    np.add.at(out, index, values)
    return out


# --------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    bfs_rows = _bfs_rows_numba
    matmul_checked = _matmul_checked_numba
    jacobi_sweeps = _jacobi_numba
    _scatter_impl = _scatter_add_rows_numba
else:
    bfs_rows = _bfs_rows_numpy
    matmul_checked = _matmul_checked_numpy
    jacobi_sweeps = _jacobi_numpy
    _scatter_impl = _scatter_add_rows_numpy


def scatter_add_rows(index, values, n):
    """Sum rows of ``values`` into an ``(n, d)`` array at positions ``index``."""
    values = np.ascontiguousarray(values)
    shape = values.shape
    flat = values.reshape(shape[0], -1)
    out = _scatter_impl(np.ascontiguousarray(index, dtype=np.int64), flat, n)
    return out.reshape((n,) + shape[1:])


IMPLEMENTATIONS = {
    "bfs_rows": (_bfs_rows_numba, _bfs_rows_numpy),
    "matmul_checked": (_matmul_checked_numba, _matmul_checked_numpy),
    "jacobi_sweeps": (_jacobi_numba, _jacobi_numpy),
    "scatter_add_rows": (_scatter_add_rows_numba, _scatter_add_rows_numpy),
}
