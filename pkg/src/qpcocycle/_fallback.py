"""Pure numpy versions of the compiled kernels (same signatures, same rescaling)."""
import math

import numpy as np

LN2 = math.log(2.0)


def _smax(a, b, c, d):
    return 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, c + b))


def _rescale(m, e):
    big = np.max(np.abs(m), axis=0)
    _, k = np.frexp(big)
    m = np.ldexp(m, -k)
    return m, e + k


def rothyp_lognorms(psi, log_lambda):
    psi = np.ascontiguousarray(psi, dtype=float)
    G, N = psi.shape
    lam = math.exp(log_lambda)
    m = np.zeros((4, G))
    m[0] = m[3] = 1.0
    e = np.zeros(G, dtype=np.int64)
    for j in range(N):
        c, s = np.cos(psi[:, j]), np.sin(psi[:, j])
        a = c * m[0] - s * m[2]
        b = c * m[1] - s * m[3]
        cc = s * m[0] + c * m[2]
        d = s * m[1] + c * m[3]
        m = np.stack([lam * a, lam * b, cc / lam, d / lam])
        m, e = _rescale(m, e)
    return e * LN2 + np.log(_smax(*m))


def rothyp_partial_lognorms(psi, log_lambda):
    psi = np.ascontiguousarray(psi, dtype=float)
    lam = math.exp(log_lambda)
    m = np.eye(2)
    e = 0
    out = np.empty(len(psi))
    for j, p in enumerate(psi):
        c, s = math.cos(p), math.sin(p)
        m = np.array([[lam * c, -lam * s], [s / lam, c / lam]]) @ m
        _, k = math.frexp(float(np.max(np.abs(m))))
        m = np.ldexp(m, -k)
        e += k
        out[j] = e * LN2 + math.log(_smax(m[0, 0], m[0, 1], m[1, 0], m[1, 1]))
    return out


def rothyp_product(psi, log_lambda):
    lam = math.exp(log_lambda)
    m = np.eye(2)
    e = 0
    for p in np.asarray(psi, dtype=float):
        c, s = math.cos(p), math.sin(p)
        m = np.array([[lam * c, -lam * s], [s / lam, c / lam]]) @ m
        _, k = math.frexp(float(np.max(np.abs(m))))
        m = np.ldexp(m, -k)
        e += k
    return m, int(e)


def general_product(mats):
    m = np.eye(2)
    e = 0
    for g in np.asarray(mats, dtype=float):
        m = g.reshape(2, 2) @ m
        _, k = math.frexp(float(np.max(np.abs(m))))
        m = np.ldexp(m, -k)
        e += k
    return m, int(e)


def general_lognorms(mats):
    mats = np.ascontiguousarray(mats, dtype=float)
    G, N, _ = mats.shape
    m = np.zeros((4, G))
    m[0] = m[3] = 1.0
    e = np.zeros(G, dtype=np.int64)
    for j in range(N):
        g = mats[:, j, :].T
        m = np.stack([g[0] * m[0] + g[1] * m[2], g[0] * m[1] + g[1] * m[3],
                      g[2] * m[0] + g[3] * m[2], g[2] * m[1] + g[3] * m[3]])
        m, e = _rescale(m, e)
    return e * LN2 + np.log(_smax(*m))
