# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled window residual scan.

Contract identical to ``_scan_py.window_residuals``.  Moments are kept in
block coordinates and updated by one sample in, one sample out; every block
of L starts re-anchors them, which keeps drift bounded by L updates.
"""

import numpy as np
cimport numpy as cnp

ctypedef double complex cplx

cdef enum:
    MAXDEG = 8


cdef inline double _abs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


def window_residuals(h, int L, linv):
    cdef const cplx[:, ::1] hv = np.ascontiguousarray(h, dtype=np.complex128)
    cdef const double[:, ::1] lv = np.ascontiguousarray(linv, dtype=np.float64)
    cdef Py_ssize_t K = hv.shape[0]
    cdef Py_ssize_t N = hv.shape[1]
    cdef int i = lv.shape[0]
    if i > MAXDEG:
        raise ValueError("degree bound too large for compiled kernel")
    cdef Py_ssize_t nstart = N - L + 1
    out_arr = np.zeros(nstart, dtype=np.float64)
    cdef double[::1] out = out_arr

    cdef double binom[MAXDEG][MAXDEG]
    cdef cplx mu[MAXDEG]
    cdef cplx nu[MAXDEG]
    cdef cplx c
    cdef double opow[MAXDEG]
    cdef double uin, uout, pin, pout, s2, o, acc
    cdef Py_ssize_t k, s0, s, send, t
    cdef int g, b

    for g in range(MAXDEG):
        for b in range(MAXDEG):
            binom[g][b] = 0.0
    for g in range(i):
        binom[g][0] = 1.0
        for b in range(1, g + 1):
            binom[g][b] = binom[g - 1][b - 1] + (binom[g - 1][b] if b < g else 0.0)

    with nogil:
        for k in range(K):
            s0 = 0
            while s0 < nstart:
                send = s0 + L
                if send > nstart:
                    send = nstart
                # anchor: direct moments of the window starting at s0
                s2 = 0.0
                for g in range(i):
                    mu[g] = 0.0
                for t in range(s0, s0 + L):
                    s2 = s2 + _abs2(hv[k, t])
                    pin = 1.0
                    uin = (t - s0) / <double>L
                    for g in range(i):
                        mu[g] = mu[g] + pin * hv[k, t]
                        pin = pin * uin
                s = s0
                while True:
                    o = (s - s0) / <double>L
                    opow[0] = 1.0
                    for g in range(1, i):
                        opow[g] = -o * opow[g - 1]
                    for g in range(i):
                        nu[g] = 0.0
                        for b in range(g + 1):
                            nu[g] = nu[g] + binom[g][b] * opow[g - b] * mu[b]
                    acc = s2
                    for g in range(i):
                        c = 0.0
                        for b in range(g + 1):
                            c = c + lv[g, b] * nu[b]
                        acc = acc - _abs2(c)
                    out[s] += acc
                    if s + 1 >= send:
                        break
                    # slide: drop sample s, add sample s + L
                    uout = (s - s0) / <double>L
                    uin = (s + L - s0) / <double>L
                    s2 = s2 + _abs2(hv[k, s + L]) - _abs2(hv[k, s])
                    pin = 1.0
                    pout = 1.0
                    for g in range(i):
                        mu[g] = mu[g] + pin * hv[k, s + L] - pout * hv[k, s]
                        pin = pin * uin
                        pout = pout * uout
                    s = s + 1
                s0 = s0 + L
        for s in range(nstart):
            if out[s] < 0.0:
                out[s] = 0.0
    return out_arr
