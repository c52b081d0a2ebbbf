# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for long 2x2 products with exact power-of-two rescaling."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, log, fabs, frexp, ldexp, hypot

cnp.import_array()

cdef double LN2 = 0.69314718055994530942


cdef inline double smax(double a, double b, double c, double d) noexcept nogil:
    return 0.5 * (hypot(a + d, c - b) + hypot(a - d, c + b))


cdef inline void rescale(double* m, long* e) noexcept nogil:
    cdef double big = fabs(m[0])
    cdef int k
    if fabs(m[1]) > big: big = fabs(m[1])
    if fabs(m[2]) > big: big = fabs(m[2])
    if fabs(m[3]) > big: big = fabs(m[3])
    cdef double f
    frexp(big, &k)
    if k != 0:
        # one ldexp, then exact multiplications by the power of two
        f = ldexp(1.0, -k)
        m[0] *= f
        m[1] *= f
        m[2] *= f
        m[3] *= f
        e[0] += k


cdef inline void rothyp_step(double* m, double psi, double lam) noexcept nogil:
    # m <- Lambda R_psi m
    cdef double c = cos(psi), s = sin(psi)
    cdef double a = c * m[0] - s * m[2]
    cdef double b = c * m[1] - s * m[3]
    cdef double cc = s * m[0] + c * m[2]
    cdef double d = s * m[1] + c * m[3]
    m[0] = lam * a
    m[1] = lam * b
    m[2] = cc / lam
    m[3] = d / lam


cdef inline void general_step(double* m, const double* g) noexcept nogil:
    cdef double a = g[0] * m[0] + g[1] * m[2]
    cdef double b = g[0] * m[1] + g[1] * m[3]
    cdef double c = g[2] * m[0] + g[3] * m[2]
    cdef double d = g[2] * m[1] + g[3] * m[3]
    m[0] = a
    m[1] = b
    m[2] = c
    m[3] = d


def rothyp_product(const double[::1] psi, double log_lambda):
    cdef double m[4]
    cdef long e = 0
    cdef Py_ssize_t j
    cdef double lam = exp(log_lambda)
    m[0] = 1.0; m[1] = 0.0; m[2] = 0.0; m[3] = 1.0
    with nogil:
        for j in range(psi.shape[0]):
            rothyp_step(m, psi[j], lam)
            rescale(m, &e)
    return np.array([[m[0], m[1]], [m[2], m[3]]]), int(e)


def rothyp_lognorms(const double[:, ::1] psi, double log_lambda):
    cdef Py_ssize_t g, j, G = psi.shape[0], N = psi.shape[1]
    cdef double m[4]
    cdef long e
    cdef double lam = exp(log_lambda)
    out = np.empty(G)
    cdef double[::1] o = out
    with nogil:
        for g in range(G):
            m[0] = 1.0; m[1] = 0.0; m[2] = 0.0; m[3] = 1.0
            e = 0
            for j in range(N):
                rothyp_step(m, psi[g, j], lam)
                rescale(m, &e)
            o[g] = e * LN2 + log(smax(m[0], m[1], m[2], m[3]))
    return out


def rothyp_partial_lognorms(const double[::1] psi, double log_lambda):
    cdef Py_ssize_t j, N = psi.shape[0]
    cdef double m[4]
    cdef long e = 0
    cdef double lam = exp(log_lambda)
    out = np.empty(N)
    cdef double[::1] o = out
    m[0] = 1.0; m[1] = 0.0; m[2] = 0.0; m[3] = 1.0
    with nogil:
        for j in range(N):
            rothyp_step(m, psi[j], lam)
            rescale(m, &e)
            o[j] = e * LN2 + log(smax(m[0], m[1], m[2], m[3]))
    return out


def general_product(const double[:, ::1] mats):
    cdef double m[4]
    cdef long e = 0
    cdef Py_ssize_t j
    m[0] = 1.0; m[1] = 0.0; m[2] = 0.0; m[3] = 1.0
    with nogil:
        for j in range(mats.shape[0]):
            general_step(m, &mats[j, 0])
            rescale(m, &e)
    return np.array([[m[0], m[1]], [m[2], m[3]]]), int(e)


def general_lognorms(const double[:, :, ::1] mats):
    cdef Py_ssize_t g, j, G = mats.shape[0], N = mats.shape[1]
    cdef double m[4]
    cdef long e
    out = np.empty(G)
    cdef double[::1] o = out
    with nogil:
        for g in range(G):
            m[0] = 1.0; m[1] = 0.0; m[2] = 0.0; m[3] = 1.0
            e = 0
            for j in range(N):
                general_step(m, &mats[g, j, 0])
                rescale(m, &e)
            o[g] = e * LN2 + log(smax(m[0], m[1], m[2], m[3]))
    return out
