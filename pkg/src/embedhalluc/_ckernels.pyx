# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels; signatures mirror embedhalluc._pykernels."""

import numpy as np

from libc.math cimport exp, log, sqrt

BACKEND = "compiled"


def leaky_relu(x, double slope):
    cdef object xarr = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xf = xarr.ravel()
    cdef Py_ssize_t n = xf.shape[0]
    y_arr = np.empty(n, dtype=np.float64)
    m_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef double[::1] m = m_arr
    cdef Py_ssize_t i
    for i in range(n):
        if xf[i] > 0.0:
            y[i] = xf[i]
            m[i] = 1.0
        else:
            y[i] = slope * xf[i]
            m[i] = slope
    shape = np.shape(xarr)
    return y_arr.reshape(shape), m_arr.reshape(shape)


def adam_update(param, grad, m, v, long t, double lr,
                double beta1, double beta2, double eps):
    cdef double[::1] p = param.ravel()
    cdef double[::1] g = np.ascontiguousarray(grad, dtype=np.float64).ravel()
    cdef double[::1] mm = m.ravel()
    cdef double[::1] vv = v.ravel()
    cdef Py_ssize_t n = p.shape[0]
    cdef double c1 = 1.0 - beta1 ** t
    cdef double c2 = 1.0 - beta2 ** t
    cdef Py_ssize_t i
    cdef double gi
    for i in range(n):
        gi = g[i]
        mm[i] = beta1 * mm[i] + (1.0 - beta1) * gi
        vv[i] = beta2 * vv[i] + (1.0 - beta2) * gi * gi
        p[i] -= lr * (mm[i] / c1) / (sqrt(vv[i] / c2) + eps)


def scatter_add_rows(double[:, ::1] out, Py_ssize_t[::1] idx, double[:, ::1] rows):
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t d = rows.shape[1]
    cdef Py_ssize_t i, j, r
    for i in range(n):
        r = idx[i]
        for j in range(d):
            out[r, j] += rows[i, j]


def softmax_rows(x):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], c = xv.shape[1]
    out_arr = np.empty((n, c), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double mx, s
    for i in range(n):
        mx = xv[i, 0]
        for j in range(1, c):
            if xv[i, j] > mx:
                mx = xv[i, j]
        s = 0.0
        for j in range(c):
            out[i, j] = exp(xv[i, j] - mx)
            s += out[i, j]
        for j in range(c):
            out[i, j] /= s
    return out_arr


def logsumexp_rows(x):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], c = xv.shape[1]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double mx, s
    for i in range(n):
        mx = xv[i, 0]
        for j in range(1, c):
            if xv[i, j] > mx:
                mx = xv[i, j]
        s = 0.0
        for j in range(c):
            s += exp(xv[i, j] - mx)
        out[i] = mx + log(s)
    return out_arr
