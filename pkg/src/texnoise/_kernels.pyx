# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled descriptor kernels: per-pixel LBP/LDP code maps.

Mirrors _kernels_py operation-for-operation; both backends must stay
bit-identical, so no fast-math style reordering is permitted here.
"""

from libc.math cimport fabs, floor

import numpy as np


def lbp_code_map_r1n8(const double[:, ::1] px):
    """8-bit LBP codes over the literal 3x3 integer neighborhood."""
    cdef Py_ssize_t h = px.shape[0], w = px.shape[1]
    out = np.empty((h - 2, w - 2), dtype=np.int64)
    cdef long long[:, ::1] ov = out
    cdef Py_ssize_t x, y
    cdef double c
    cdef long long code
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            c = px[y, x]
            code = 0
            if px[y, x + 1] >= c:
                code |= 1
            if px[y - 1, x + 1] >= c:
                code |= 2
            if px[y - 1, x] >= c:
                code |= 4
            if px[y - 1, x - 1] >= c:
                code |= 8
            if px[y, x - 1] >= c:
                code |= 16
            if px[y + 1, x - 1] >= c:
                code |= 32
            if px[y + 1, x] >= c:
                code |= 64
            if px[y + 1, x + 1] >= c:
                code |= 128
            ov[y - 1, x - 1] = code
    return out


def lbp_code_map_circular(const double[:, ::1] px, const double[:, ::1] offsets, int margin):
    """LBP codes from interpolated circular sampling (lerp-form bilinear)."""
    cdef Py_ssize_t h = px.shape[0], w = px.shape[1]
    cdef int n = offsets.shape[0]
    cdef int[32] x0s, y0s, x1s, y1s
    cdef double[32] txs, tys
    cdef int p
    cdef double dx, dy
    if n > 32:
        raise ValueError("at most 32 sample points supported")
    for p in range(n):
        dx = offsets[p, 0]
        dy = offsets[p, 1]
        x0s[p] = <int> floor(dx)
        y0s[p] = <int> floor(dy)
        txs[p] = dx - floor(dx)
        tys[p] = dy - floor(dy)
        x1s[p] = x0s[p] + 1 if txs[p] > 0.0 else x0s[p]
        y1s[p] = y0s[p] + 1 if tys[p] > 0.0 else y0s[p]

    out = np.empty((h - 2 * margin, w - 2 * margin), dtype=np.int64)
    cdef long long[:, ::1] ov = out
    cdef Py_ssize_t x, y
    cdef double c, a, b, cc, dd, top, bot, sample
    cdef long long code
    for y in range(margin, h - margin):
        for x in range(margin, w - margin):
            c = px[y, x]
            code = 0
            for p in range(n):
                a = px[y + y0s[p], x + x0s[p]]
                b = px[y + y0s[p], x + x1s[p]]
                cc = px[y + y1s[p], x + x0s[p]]
                dd = px[y + y1s[p], x + x1s[p]]
                top = a + txs[p] * (b - a)
                bot = cc + txs[p] * (dd - cc)
                sample = top + tys[p] * (bot - top)
                if sample >= c:
                    code |= (<long long> 1) << p
            ov[y - margin, x - margin] = code
    return out


def ldp_code_map(const double[:, ::1] px, int k, const double[:, ::1] cell_coeffs):
    """8-bit LDP codes: bits mark the k largest absolute compass responses."""
    cdef Py_ssize_t h = px.shape[0], w = px.shape[1]
    out = np.empty((h - 2, w - 2), dtype=np.int64)
    cdef long long[:, ::1] ov = out
    cdef double[8][8] cf
    cdef int i, j
    for i in range(8):
        for j in range(8):
            cf[i][j] = cell_coeffs[i, j]

    cdef Py_ssize_t x, y
    cdef double[8] m
    cdef double acc
    cdef int best
    cdef long long code
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            for i in range(8):
                # Border cells in row-major order, center excluded; the
                # accumulation order must match the numpy fallback exactly.
                acc = cf[i][0] * px[y - 1, x - 1]
                acc += cf[i][1] * px[y - 1, x]
                acc += cf[i][2] * px[y - 1, x + 1]
                acc += cf[i][3] * px[y, x - 1]
                acc += cf[i][4] * px[y, x + 1]
                acc += cf[i][5] * px[y + 1, x - 1]
                acc += cf[i][6] * px[y + 1, x]
                acc += cf[i][7] * px[y + 1, x + 1]
                m[i] = fabs(acc)
            code = 0
            for j in range(k):
                best = 0
                for i in range(1, 8):
                    if m[i] > m[best]:
                        best = i
                code |= (<long long> 1) << best
                m[best] = -1.0
            ov[y - 1, x - 1] = code
    return out
