# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: pairwise Jensen-Shannon divergence and Lance-Williams agglomeration.

Must stay numerically interchangeable with ``_pykernels`` (same per-bin term,
same bin order, same update formulas).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, INFINITY

cnp.import_array()

cdef double LN2 = 0.6931471805599453


cdef inline double _js(const double* p, const double* q, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef double a, b, m, term, acc = 0.0
    for k in range(n):
        a = p[k]
        b = q[k]
        if a == 0.0 and b == 0.0:
            continue
        m = 0.5 * (a + b)
        term = 0.0
        if a > 0.0:
            term = a * log(a / m)
        if b > 0.0:
            term = term + b * log(b / m)
        acc += term
    acc *= 0.5
    if acc < 0.0:
        return 0.0
    if acc > LN2:
        return LN2
    return acc


def js_pair(const double[::1] p, const double[::1] q):
    if p.shape[0] != q.shape[0]:
        raise ValueError("length mismatch")
    if p.shape[0] == 0:
        return 0.0
    return _js(&p[0], &q[0], p.shape[0])


def js_matrix(const double[:, ::1] probs):
    """JS divergence between every pair of rows; returns an (N, N) array."""
    cdef Py_ssize_t n = probs.shape[0], nb = probs.shape[1], i, j
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double v
    if nb == 0:
        return out
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                v = _js(&probs[i, 0], &probs[j, 0], nb)
                o[i, j] = v
                o[j, i] = v
    return out


def agglomerate(const double[:, ::1] dist, int method):
    """Naive agglomeration with Lance-Williams updates.

    method: 0 single, 1 complete, 2 average (UPGMA).
    Returns (children (N-1, 2) int64 with left < right node ids, heights (N-1,)).
    Ties on distance go to the lexicographically smallest node-id pair.
    """
    cdef Py_ssize_t n = dist.shape[0], i, j, k, step, bi, bj
    cdef double best, d, da, db
    cdef cnp.int64_t lo, hi, blo, bhi
    D_arr = np.array(dist, dtype=np.float64, copy=True)
    cdef double[:, ::1] D = D_arr
    ids_arr = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] ids = ids_arr
    size_arr = np.ones(n, dtype=np.float64)
    cdef double[::1] size = size_arr
    active_arr = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] active = active_arr
    children = np.zeros((max(n - 1, 0), 2), dtype=np.int64)
    heights = np.zeros(max(n - 1, 0), dtype=np.float64)
    cdef cnp.int64_t[:, ::1] ch = children
    cdef double[::1] hs = heights

    with nogil:
        for step in range(n - 1):
            best = INFINITY
            bi = -1
            bj = -1
            blo = -1
            bhi = -1
            for i in range(n):
                if not active[i]:
                    continue
                for j in range(i + 1, n):
                    if not active[j]:
                        continue
                    d = D[i, j]
                    if ids[i] < ids[j]:
                        lo = ids[i]
                        hi = ids[j]
                    else:
                        lo = ids[j]
                        hi = ids[i]
                    if bi < 0 or d < best or (d == best and (lo < blo or (lo == blo and hi < bhi))):
                        best = d
                        bi = i
                        bj = j
                        blo = lo
                        bhi = hi
            ch[step, 0] = blo
            ch[step, 1] = bhi
            hs[step] = best
            for k in range(n):
                if not active[k] or k == bi or k == bj:
                    continue
                da = D[bi, k]
                db = D[bj, k]
                if method == 0:
                    d = da if da < db else db
                elif method == 1:
                    d = da if da > db else db
                else:
                    d = (size[bi] * da + size[bj] * db) / (size[bi] + size[bj])
                D[bi, k] = d
                D[k, bi] = d
            size[bi] = size[bi] + size[bj]
            active[bj] = 0
            ids[bi] = n + step
    return children, heights
