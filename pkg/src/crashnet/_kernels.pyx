# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled TMFG and power-iteration kernels.

Mirrors ``crashnet._pykernels`` exactly: same summation order, same tie-breaks.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline bint _face_less(long a0, long a1, long a2, long b0, long b1, long b2) noexcept nogil:
    if a0 != b0:
        return a0 < b0
    if a1 != b1:
        return a1 < b1
    return a2 < b2


def seed_search(double[:, ::1] S):
    """Lexicographically first 4-clique maximising the sum of its 6 similarities."""
    cdef Py_ssize_t n = S.shape[0]
    cdef Py_ssize_t a, b, c, d
    cdef double sab, sabc, s, best = -1e308
    cdef long ba = 0, bb = 1, bc = 2, bd = 3
    cdef bint found = False
    with nogil:
        for a in range(n):
            for b in range(a + 1, n):
                sab = S[a, b]
                for c in range(b + 1, n):
                    sabc = sab + S[a, c]
                    for d in range(c + 1, n):
                        s = sabc + S[a, d] + S[b, c] + S[b, d] + S[c, d]
                        if not found or s > best:
                            found = True
                            best = s
                            ba = a; bb = b; bc = c; bd = d
    return (ba, bb, bc, bd)


cdef inline void _sort3(long* t) noexcept nogil:
    cdef long tmp
    if t[0] > t[1]:
        tmp = t[0]; t[0] = t[1]; t[1] = tmp
    if t[1] > t[2]:
        tmp = t[1]; t[1] = t[2]; t[2] = tmp
    if t[0] > t[1]:
        tmp = t[0]; t[0] = t[1]; t[1] = tmp


def greedy_insert(double[:, ::1] S, seed):
    """Insert every non-seed vertex into the face of maximal gain.

    Returns (vertices, hosts, gains): insertion order, the sorted host face
    of each insertion, and the gain realised.
    """
    cdef Py_ssize_t n = S.shape[0]
    cdef Py_ssize_t nf_max = 3 * n - 8  # dead faces are kept
    cdef Py_ssize_t steps = n - 4
    cdef cnp.ndarray[cnp.int64_t, ndim=2] faces_arr = np.zeros((nf_max, 3), dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] alive_arr = np.zeros(nf_max, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gain_arr = np.zeros((nf_max, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_v = np.zeros(steps, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out_f = np.zeros((steps, 3), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_g = np.zeros(steps, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] fv = faces_arr
    cdef cnp.uint8_t[::1] alive = alive_arr
    cdef cnp.uint8_t[::1] used = used_arr
    cdef double[:, ::1] G = gain_arr
    cdef Py_ssize_t nf, f, u, step, k, bf
    cdef long v, x, y, z, bv
    cdef double g, best
    cdef bint have
    cdef long q[4]
    cdef long tri[3][3]
    cdef int tri_i

    for k in range(4):
        q[k] = seed[k]
        used[q[k]] = 1
    # the four triangles of the seed tetrahedron
    nf = 0
    for k in range(4):
        tri_i = 0
        for u in range(4):
            if u != k:
                fv[nf, tri_i] = q[u]
                tri_i += 1
        alive[nf] = 1
        nf += 1
    with nogil:
        for f in range(nf):
            x = fv[f, 0]; y = fv[f, 1]; z = fv[f, 2]
            for u in range(n):
                G[f, u] = S[u, x] + S[u, y] + S[u, z]

        for step in range(steps):
            have = False
            best = 0.0
            bv = -1
            bf = -1
            for f in range(nf):
                if not alive[f]:
                    continue
                for u in range(n):
                    if used[u]:
                        continue
                    g = G[f, u]
                    if (not have or g > best or
                            (g == best and (u < bv or (u == bv and _face_less(
                                fv[f, 0], fv[f, 1], fv[f, 2], fv[bf, 0], fv[bf, 1], fv[bf, 2]))))):
                        have = True
                        best = g
                        bv = u
                        bf = f
            x = fv[bf, 0]; y = fv[bf, 1]; z = fv[bf, 2]
            out_v[step] = bv
            out_f[step, 0] = x; out_f[step, 1] = y; out_f[step, 2] = z
            out_g[step] = best
            used[bv] = 1
            alive[bf] = 0
            # new faces (x,y,v), (x,z,v), (y,z,v), each kept sorted
            tri[0][0] = x; tri[0][1] = y; tri[0][2] = bv
            tri[1][0] = x; tri[1][1] = z; tri[1][2] = bv
            tri[2][0] = y; tri[2][1] = z; tri[2][2] = bv
            for k in range(3):
                _sort3(tri[k])
                fv[nf, 0] = tri[k][0]; fv[nf, 1] = tri[k][1]; fv[nf, 2] = tri[k][2]
                alive[nf] = 1
                for u in range(n):
                    G[nf, u] = S[u, tri[k][0]] + S[u, tri[k][1]] + S[u, tri[k][2]]
                nf += 1
    return out_v, out_f, out_g


def power_iteration(double[:, ::1] A, double tol, long max_iter):
    """Dominant eigenvector of a nonnegative matrix from a uniform start.

    Returns (v, iterations, last_change); the caller decides what a stall means.
    """
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_arr = np.full(n, 1.0 / sqrt(<double>n))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y_arr = np.zeros(n)
    cdef double[::1] v = v_arr
    cdef double[::1] y = y_arr
    cdef Py_ssize_t i, j
    cdef long it = 0
    cdef double acc, norm, delta = 1e308, dd
    with nogil:
        while it < max_iter:
            it += 1
            norm = 0.0
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc = acc + A[i, j] * v[j]
                y[i] = acc
                norm = norm + acc * acc
            norm = sqrt(norm)
            if norm == 0.0:
                break
            delta = 0.0
            for i in range(n):
                y[i] = y[i] / norm
                dd = y[i] - v[i]
                delta = delta + dd * dd
                v[i] = y[i]
            delta = sqrt(delta)
            if delta < tol:
                break
    return v_arr, it, delta
