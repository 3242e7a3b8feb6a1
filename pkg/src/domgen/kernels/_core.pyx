# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: strided valid cross-correlation and channel statistics.

Semantics match ``domgen.kernels.fallback``; only summation order differs,
so results agree with the numpy path to machine precision but not bitwise.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def conv2d_bank(img, kernels, int stride):
    """Valid strided cross-correlation: (Cin,H,W) x (Cout,Cin,k,k) -> (Cout,Ho,Wo)."""
    img_c = np.ascontiguousarray(img, dtype=np.float64)
    ker_c = np.ascontiguousarray(kernels, dtype=np.float64)
    cdef const double[:, :, :] x = img_c
    cdef const double[:, :, :, :] w = ker_c
    cdef Py_ssize_t cin = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t cout = w.shape[0], k = w.shape[2]
    cdef Py_ssize_t ho = (h - k) // stride + 1
    cdef Py_ssize_t wo = (wd - k) // stride + 1
    out = np.empty((cout, ho, wo), dtype=np.float64)
    cdef double[:, :, :] o = out
    cdef Py_ssize_t oc, ic, i, j, a, b, r0, c0
    cdef double acc
    for oc in range(cout):
        for i in range(ho):
            r0 = i * stride
            for j in range(wo):
                c0 = j * stride
                acc = 0.0
                for ic in range(cin):
                    for a in range(k):
                        for b in range(k):
                            acc += x[ic, r0 + a, c0 + b] * w[oc, ic, a, b]
                o[oc, i, j] = acc
    return out


def channel_stats(fm, double eps):
    """Per-channel spatial mean and sqrt(population variance + eps)."""
    fm_c = np.ascontiguousarray(fm, dtype=np.float64)
    cdef const double[:, :, :] x = fm_c
    cdef Py_ssize_t c = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t n = h * wd
    mu = np.empty(c, dtype=np.float64)
    sigma = np.empty(c, dtype=np.float64)
    cdef double[:] m = mu
    cdef double[:] s = sigma
    cdef Py_ssize_t ic, i, j
    cdef double acc, sq, d
    for ic in range(c):
        acc = 0.0
        for i in range(h):
            for j in range(wd):
                acc += x[ic, i, j]
        m[ic] = acc / n
        sq = 0.0
        for i in range(h):
            for j in range(wd):
                d = x[ic, i, j] - m[ic]
                sq += d * d
        s[ic] = (sq / n + eps) ** 0.5
    return mu, sigma
