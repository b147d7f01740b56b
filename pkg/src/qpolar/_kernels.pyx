# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the numerical hot paths.

Mirror of qpolar._kernels_py; see that module for the contract.  Long
reductions use Kahan compensated summation, and all loops release the
GIL so tree branches and sampled paths can overlap across threads.
"""

from libc.math cimport log, INFINITY

import numpy as np


cdef inline double _kahan_add(double total, double term, double *comp) noexcept nogil:
    cdef double y = term - comp[0]
    cdef double t = total + y
    comp[0] = (t - total) - y
    return t


def entropy_nats(mass):
    mass_arr = np.ascontiguousarray(mass, dtype=np.float64)
    out_arr = np.empty(mass_arr.shape[0], dtype=np.float64)
    cdef const double[:, ::1] M = mass_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n = M.shape[0], q = M.shape[1], i, j
    cdef double acc, comp, p
    with nogil:
        for i in range(n):
            acc = 0.0
            comp = 0.0
            for j in range(q):
                p = M[i, j]
                if p > 0.0:
                    acc = _kahan_add(acc, -p * log(p), &comp)
            out[i] = acc
    return out_arr


def capacity_nats(table):
    table_arr = np.ascontiguousarray(table, dtype=np.float64)
    marg_arr = np.empty(table_arr.shape[1], dtype=np.float64)
    cdef const double[:, ::1] T = table_arr
    cdef double[::1] marg = marg_arr
    cdef Py_ssize_t q = T.shape[0], m = T.shape[1], x, y
    cdef double acc, comp, w
    with nogil:
        for y in range(m):
            acc = 0.0
            for x in range(q):
                acc += T[x, y]
            marg[y] = acc / q
        acc = 0.0
        comp = 0.0
        for x in range(q):
            for y in range(m):
                w = T[x, y]
                if w > 0.0:
                    acc = _kahan_add(acc, w * log(w / marg[y]), &comp)
    return acc / q


def split_tables(table_a, table_b, want_plus=True):
    a_arr = np.ascontiguousarray(table_a, dtype=np.float64)
    b_arr = np.ascontiguousarray(table_b, dtype=np.float64)
    cdef const double[:, ::1] A = a_arr
    cdef const double[:, ::1] B = b_arr
    cdef Py_ssize_t q = A.shape[0], m = A.shape[1]
    cdef Py_ssize_t u1, u2, y1, y2, d
    cdef double inv_q = 1.0 / q
    cdef double a, term
    cdef bint build_plus = bool(want_plus)
    minus_arr = np.zeros((q, m * m), dtype=np.float64)
    plus_arr = np.zeros((q, m * m * q), dtype=np.float64) if build_plus \
        else np.empty((1, 1), dtype=np.float64)
    cdef double[:, ::1] minus = minus_arr
    cdef double[:, ::1] plus = plus_arr
    with nogil:
        for u1 in range(q):
            for u2 in range(q):
                d = u1 - u2
                if d < 0:
                    d += q
                for y1 in range(m):
                    a = A[d, y1] * inv_q
                    if a == 0.0:
                        continue
                    for y2 in range(m):
                        term = a * B[u2, y2]
                        minus[u1, y1 * m + y2] += term
                        if build_plus:
                            plus[u2, (y1 * m + y2) * q + u1] = term
    if build_plus:
        return minus_arr, plus_arr
    return minus_arr, None


def min_shift_l1(mass):
    mass_arr = np.ascontiguousarray(mass, dtype=np.float64)
    out_arr = np.empty(mass_arr.shape[0], dtype=np.float64)
    cdef const double[:, ::1] M = mass_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n = M.shape[0], q = M.shape[1], i, d, k, kk
    cdef double best, acc, diff
    with nogil:
        for i in range(n):
            best = INFINITY
            for d in range(1, q):
                acc = 0.0
                for k in range(q):
                    kk = k - d
                    if kk < 0:
                        kk += q
                    diff = M[i, k] - M[i, kk]
                    acc += diff if diff >= 0.0 else -diff
                if acc < best:
                    best = acc
            out[i] = best
    return out_arr


def convolve_pairs(p_rows, r_rows):
    p_arr = np.ascontiguousarray(p_rows, dtype=np.float64)
    r_arr = np.ascontiguousarray(r_rows, dtype=np.float64)
    out_arr = np.zeros_like(p_arr)
    cdef const double[:, ::1] P = p_arr
    cdef const double[:, ::1] R = r_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t n = P.shape[0], q = P.shape[1], row, i, k, kk
    cdef double pi
    with nogil:
        for row in range(n):
            for i in range(q):
                pi = P[row, i]
                if pi == 0.0:
                    continue
                for k in range(q):
                    kk = k - i
                    if kk < 0:
                        kk += q
                    out[row, k] += pi * R[row, kk]
    return out_arr


def mixture_convolution_entropy_nats(w1, posts1, w2, posts2):
    w1_arr = np.ascontiguousarray(w1, dtype=np.float64)
    w2_arr = np.ascontiguousarray(w2, dtype=np.float64)
    p1_arr = np.ascontiguousarray(posts1, dtype=np.float64)
    p2_arr = np.ascontiguousarray(posts2, dtype=np.float64)
    cdef const double[::1] W1 = w1_arr
    cdef const double[::1] W2 = w2_arr
    cdef const double[:, ::1] P1 = p1_arr
    cdef const double[:, ::1] P2 = p2_arr
    cdef Py_ssize_t n1 = P1.shape[0], n2 = P2.shape[0], q = P1.shape[1]
    cdef Py_ssize_t a, b, i, k, kk
    conv_arr = np.empty(q, dtype=np.float64)
    cdef double[::1] conv = conv_arr
    cdef double total = 0.0, comp = 0.0, ent, c, pi
    with nogil:
        for a in range(n1):
            for b in range(n2):
                for k in range(q):
                    conv[k] = 0.0
                for i in range(q):
                    pi = P1[a, i]
                    if pi == 0.0:
                        continue
                    for k in range(q):
                        kk = k - i
                        if kk < 0:
                            kk += q
                        conv[k] += pi * P2[b, kk]
                ent = 0.0
                for k in range(q):
                    c = conv[k]
                    if c > 0.0:
                        ent -= c * log(c)
                total = _kahan_add(total, W1[a] * W2[b] * ent, &comp)
    return total
