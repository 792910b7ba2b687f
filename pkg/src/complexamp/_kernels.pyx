# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled SGL kernels: a single fused pass per group computing the prox
output and the derivative sum. Contract mirrors ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def sgl_prox(double complex[:, ::1] r, Py_ssize_t S, double lambda_g, double lambda_e):
    cdef Py_ssize_t B = r.shape[0], N = r.shape[1]
    cdef Py_ssize_t G = N // S
    out_arr = np.zeros((B, N), dtype=np.complex128)
    dsum_arr = np.zeros(B, dtype=np.float64)
    cdef double complex[:, ::1] out = out_arr
    cdef double[::1] dsum = dsum_arr
    cdef Py_ssize_t b, g, j, lo
    cdef double a, sc, re, im, nrm2, nrm, gf, inner, acc
    with nogil:
        for b in range(B):
            acc = 0.0
            for g in range(G):
                lo = g * S
                nrm2 = 0.0
                inner = 0.0
                for j in range(lo, lo + S):
                    re = r[b, j].real
                    im = r[b, j].imag
                    a = sqrt(re * re + im * im)
                    if a > lambda_e:
                        sc = 1.0 - lambda_e / a
                        out[b, j] = sc * r[b, j]
                        nrm2 = nrm2 + sc * sc * a * a
                        inner = inner + 1.0 - 0.5 * lambda_e / a
                nrm = sqrt(nrm2)
                if nrm > lambda_g:
                    gf = 1.0 - lambda_g / nrm
                    for j in range(lo, lo + S):
                        out[b, j] = gf * out[b, j]
                    acc = acc + 0.5 * lambda_g / nrm + gf * inner
                else:
                    for j in range(lo, lo + S):
                        out[b, j] = 0.0
            dsum[b] = acc
    return out_arr, dsum_arr


def real_sgl_prox(double[:, ::1] v, Py_ssize_t S, double lambda_g, double lambda_e):
    cdef Py_ssize_t B = v.shape[0], N = v.shape[1]
    cdef Py_ssize_t G = N // S
    out_arr = np.zeros((B, N), dtype=np.float64)
    dsum_arr = np.zeros(B, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] dsum = dsum_arr
    cdef Py_ssize_t b, g, j, lo
    cdef double a, s, nrm2, nrm, gf, acc
    cdef Py_ssize_t cnt
    with nogil:
        for b in range(B):
            acc = 0.0
            for g in range(G):
                lo = g * S
                nrm2 = 0.0
                cnt = 0
                for j in range(lo, lo + S):
                    a = fabs(v[b, j])
                    if a > lambda_e:
                        s = a - lambda_e
                        if v[b, j] < 0:
                            s = -s
                        out[b, j] = s
                        nrm2 = nrm2 + s * s
                        cnt = cnt + 1
                nrm = sqrt(nrm2)
                if nrm > lambda_g:
                    gf = 1.0 - lambda_g / nrm
                    for j in range(lo, lo + S):
                        out[b, j] = gf * out[b, j]
                    acc = acc + cnt * gf + lambda_g / nrm
                else:
                    for j in range(lo, lo + S):
                        out[b, j] = 0.0
            dsum[b] = acc
    return out_arr, dsum_arr
