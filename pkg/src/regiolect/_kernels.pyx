# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled top-k selection over a block of the distance matrix.

Same contract as _kernels_py.select_block: exact selection, ties on
equal distance resolve to the smaller row index. Releases the GIL so
blocks can run on a thread pool. This is the hot loop: the distance
matmul itself stays in BLAS, but per-row selection dominates once the
matrix has hundreds of thousands of rows.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def select_block(double[:, ::1] dists, Py_ssize_t lo, Py_ssize_t k,
                 long long[:, ::1] out_idx, double[:, ::1] out_dist):
    cdef Py_ssize_t rows = dists.shape[0]
    cdef Py_ssize_t n = dists.shape[1]
    cdef Py_ssize_t r, q, j, m, pos, t
    cdef double d
    cdef double[::1] best_d = np.empty(k, dtype=np.float64)
    cdef long long[::1] best_i = np.empty(k, dtype=np.int64)

    with nogil:
        for r in range(rows):
            q = lo + r
            m = 0
            for j in range(n):
                if j == q:
                    continue
                d = dists[r, j]
                if m == k:
                    # full list: only a strictly better candidate enters
                    # (on a tie the stored, smaller index wins)
                    if d > best_d[k - 1]:
                        continue
                    if d == best_d[k - 1] and j > best_i[k - 1]:
                        continue
                # insertion point: after entries that beat (d, j); scan
                # order makes stored indices smaller, so ties keep them
                pos = m if m < k else k - 1
                while pos > 0 and (best_d[pos - 1] > d or
                                   (best_d[pos - 1] == d and best_i[pos - 1] > j)):
                    best_d[pos] = best_d[pos - 1]
                    best_i[pos] = best_i[pos - 1]
                    pos -= 1
                best_d[pos] = d
                best_i[pos] = j
                if m < k:
                    m += 1
            for t in range(k):
                out_idx[q, t] = best_i[t]
                out_dist[q, t] = best_d[t]
