# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels; drop-in for ``_pykernels``."""

import numpy as np
from libc.math cimport exp, fabs


cdef inline void _rule(const double[:, ::1] coef, Py_ssize_t k, double lo, double hi,
                       double t0, double h, const double[::1] c, const double[::1] a,
                       double scale, double shift, const double[::1] nodes,
                       const double[::1] weights, double* out, double* out_abs) noexcept nogil:
    cdef Py_ssize_t i, j, n = nodes.shape[0], deg = coef.shape[1], nt = c.shape[0]
    cdef double width = hi - lo, s, q, x, f, v, acc = 0.0, acc_abs = 0.0
    for i in range(n):
        s = lo + width * nodes[i]
        q = 0.0
        for j in range(deg - 1, -1, -1):
            q = q * s + coef[k, j]
        x = scale * (t0 + h * s) + shift
        f = 0.0
        for j in range(nt):
            f += c[j] * exp(a[j] * x)
        v = q * f * weights[i]
        acc += v
        acc_abs += fabs(v)
    out[0] = acc * width * h
    out_abs[0] = acc_abs * width * h


def panels_exp(coef, s0, s1, t0, h, c, a, double scale, double shift, nodes, weights):
    cdef const double[:, ::1] cv = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const double[::1] s0v = np.ascontiguousarray(s0, dtype=np.float64)
    cdef const double[::1] s1v = np.ascontiguousarray(s1, dtype=np.float64)
    cdef const double[::1] t0v = np.ascontiguousarray(t0, dtype=np.float64)
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[::1] ccv = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] nv = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t k, npan = s0v.shape[0]
    whole = np.empty(npan)
    halves = np.empty(npan)
    habs = np.empty(npan)
    cdef double[::1] wo = whole, ho = halves, ao = habs
    cdef double w, wa, l, la, r, ra, mid
    with nogil:
        for k in range(npan):
            mid = 0.5 * (s0v[k] + s1v[k])
            _rule(cv, k, s0v[k], s1v[k], t0v[k], hv[k], ccv, av, scale, shift, nv, wv, &w, &wa)
            _rule(cv, k, s0v[k], mid, t0v[k], hv[k], ccv, av, scale, shift, nv, wv, &l, &la)
            _rule(cv, k, mid, s1v[k], t0v[k], hv[k], ccv, av, scale, shift, nv, wv, &r, &ra)
            wo[k] = w
            ho[k] = l + r
            ao[k] = la + ra
    return whole, halves, habs


def lattice_exp_sums(x, y, c, a):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t k, j, n = xv.shape[0], nt = cv.shape[0]
    cdef double f, num = 0.0, den = 0.0
    with nogil:
        for k in range(n):
            f = 0.0
            for j in range(nt):
                f += cv[j] * exp(av[j] * xv[k])
            num += f * yv[k]
            den += f
    return num, den
