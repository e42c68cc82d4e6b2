# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled QCLP subgradient kernel.

Operates on column-stacked vectors: an anchor row is A_k.ravel(order="F"),
so each block of ``c`` consecutive entries is one column and the per-column
simplex projection runs on contiguous memory. Semantics match
``_qclp_fallback.subgradient_loop`` exactly.
"""

from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double _dot(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(n):
        s += a[i] * b[i]
    return s


cdef void _project_block(double* v, double* buf, Py_ssize_t c) noexcept nogil:
    """Project one length-c block onto the probability simplex (sort-threshold)."""
    cdef Py_ssize_t i, j
    cdef double key, tmpsum, tmax
    cdef bint found = False
    # insertion sort into buf, descending
    for i in range(c):
        key = v[i]
        j = i
        while j > 0 and buf[j - 1] < key:
            buf[j] = buf[j - 1]
            j -= 1
        buf[j] = key
    tmpsum = 0.0
    tmax = 0.0
    for j in range(c - 1):
        tmpsum += buf[j]
        tmax = (tmpsum - 1.0) / (j + 1)
        if tmax >= buf[j + 1]:
            found = True
            break
    if not found:
        tmax = (tmpsum + buf[c - 1] - 1.0) / c
    for i in range(c):
        v[i] = v[i] - tmax
        if v[i] < 0.0:
            v[i] = 0.0


def subgradient_loop(
    double[:, ::1] anchors,  # (m, c*t), rows column-stacked
    double[::1] cvec,        # (m,)
    double[::1] anorm2,      # (m,)
    double g_star,
    double[::1] y0,          # (c*t,)
    double tol,
    long max_iters,
    long c,
    long t,
):
    cdef Py_ssize_t m = anchors.shape[0]
    cdef Py_ssize_t dim = anchors.shape[1]
    cdef cnp.ndarray[double, ndim=1] y_arr = np.array(y0, dtype=np.float64, copy=True)
    cdef cnp.ndarray[double, ndim=1] yb_arr = y_arr.copy()
    cdef double* y = <double*> cnp.PyArray_DATA(y_arr)
    cdef double* y_best = <double*> cnp.PyArray_DATA(yb_arr)
    cdef double* buf = <double*> malloc(c * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double phi_best = np.inf
    cdef double yy, sc, best_score, phi, grad_norm2, step, s1, s2
    cdef Py_ssize_t it, k, kstar, i, col
    cdef long iters = 0
    try:
        with nogil:
            for it in range(1, max_iters + 1):
                iters = it
                yy = _dot(y, y, dim)
                best_score = -1e300
                kstar = 0
                for k in range(m):
                    sc = cvec[k] - 2.0 * _dot(&anchors[k, 0], y, dim)
                    if sc > best_score:
                        best_score = sc
                        kstar = k
                phi = yy + best_score
                if phi < phi_best:
                    phi_best = phi
                    for i in range(dim):
                        y_best[i] = y[i]
                if phi_best - g_star <= tol:
                    break
                # <a_kstar, y> recovered from the winning score
                grad_norm2 = 4.0 * (yy - (cvec[kstar] - best_score) + anorm2[kstar])
                if grad_norm2 <= 1e-30:
                    break
                step = (phi - g_star) / grad_norm2
                s1 = 1.0 - 2.0 * step
                s2 = 2.0 * step
                for i in range(dim):
                    y[i] = s1 * y[i] + s2 * anchors[kstar, i]
                for col in range(t):
                    _project_block(y + col * c, buf, c)
    finally:
        free(buf)
    return yb_arr, float(phi_best), int(iters)
