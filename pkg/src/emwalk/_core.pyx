# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batched walk steps and exhaustive cut scans."""

from libc.stdint cimport int64_t, uint64_t

import numpy as np


def walk_step_batch(double[:, ::1] M, int64_t[::1] indptr, int64_t[::1] indices,
                    double[::1] w_self, double[::1] w_move):
    """Advance k distributions (rows of M) by one walk transition.

    The transition is out[:, v] = sum_u M[:, u] * (w_self[u]*[u==v] +
    w_move[u]*[u~v]) over the sorted-CSR adjacency. Zero entries are skipped,
    so point masses early in a propagation cost O(deg) instead of O(m).
    """
    cdef Py_ssize_t k = M.shape[0]
    cdef Py_ssize_t n = M.shape[1]
    out_np = np.zeros((k, n), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef Py_ssize_t i, u
    cdef int64_t j
    cdef double mass, a
    for i in range(k):
        for u in range(n):
            mass = M[i, u]
            if mass == 0.0:
                continue
            if w_self[u] != 0.0:
                out[i, u] += mass * w_self[u]
            a = mass * w_move[u]
            if a != 0.0:
                for j in range(indptr[u], indptr[u + 1]):
                    out[i, indices[j]] += a
    return out_np


cdef inline int64_t popcount64(uint64_t x):
    x = x - ((x >> 1) & <uint64_t>0x5555555555555555)
    x = (x & <uint64_t>0x3333333333333333) + ((x >> 2) & <uint64_t>0x3333333333333333)
    x = (x + (x >> 4)) & <uint64_t>0x0F0F0F0F0F0F0F0F
    return <int64_t>((x * <uint64_t>0x0101010101010101) >> 56)


def min_cut_scan(int64_t n, int64_t[::1] deg, uint64_t[::1] adj_mask):
    """Minimum of boundary/volume over all subsets with 1 <= vol(S) <= vol(V)/2.

    Subsets are bitmasks over n <= 20 vertices; volumes and inside-edge counts
    are built by subset DP, so the scan is O(2^n). Returns (phi, mask), or
    (0.0, 0) when no subset qualifies (edgeless graph).
    """
    cdef uint64_t full = (<uint64_t>1) << n
    cdef int64_t vol_total = 0
    cdef Py_ssize_t v
    for v in range(n):
        vol_total += deg[v]
    vol_np = np.zeros(full, dtype=np.int64)
    ins_np = np.zeros(full, dtype=np.int64)
    cdef int64_t[::1] vol = vol_np
    cdef int64_t[::1] ins = ins_np
    cdef uint64_t mask, low, prev
    cdef int64_t b, volume, boundary
    cdef double best = 2.0
    cdef double phi
    cdef uint64_t best_mask = 0
    cdef bint found = False
    for mask in range(1, full):
        low = mask & (~mask + 1)
        b = 0
        while not ((low >> b) & 1):
            b += 1
        prev = mask ^ low
        vol[mask] = vol[prev] + deg[b]
        ins[mask] = ins[prev] + popcount64(adj_mask[b] & prev)
        volume = vol[mask]
        if volume >= 1 and 2 * volume <= vol_total:
            boundary = volume - 2 * ins[mask]
            phi = (<double>boundary) / (<double>volume)
            if (not found) or phi < best:
                best = phi
                best_mask = mask
                found = True
    if not found:
        return 0.0, 0
    return best, int(best_mask)
