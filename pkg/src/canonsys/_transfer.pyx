# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled transfer-product kernel; see _transfer_py for the reference."""

import cython

from libc.math cimport cos, sin, frexp, fabs, exp, log

cdef extern from "complex.h":
    double cabs(double complex) nogil
    double creal(double complex) nogil
    double complex ccosh(double complex) nogil
    double complex csinh(double complex) nogil
    double complex csqrt(double complex) nogil
    double complex cexp(double complex) nogil

IMPL = "cython"

cdef double _LIMIT = 2.0**64


def transfer_product(double[::1] deltas, double[::1] phis,
                     unsigned char[::1] kinds, double[:, ::1] hmats,
                     double complex z):
    cdef double complex m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0
    cdef double complex a11, a12, a21, a22, t11, t12, t21, t22
    cdef double complex w, ch, shw, w2, b11, b12, b21, ep, em
    cdef double d, c, s, k11, k12, k21, h11, h12, h22, deth, big, f, m, sc
    cdef long exp2 = 0
    cdef int k
    cdef Py_ssize_t i, n = deltas.shape[0]

    for i in range(n):
        d = deltas[i]
        if kinds[i] == 0:
            c = cos(phis[i])
            s = sin(phis[i])
            w = z * d
            k11 = c * s
            k12 = s * s
            k21 = -c * c
            a11 = 1.0 + w * k11
            a12 = w * k12
            a21 = w * k21
            a22 = 1.0 - w * k11
        else:
            h11 = hmats[i, 0]
            h12 = hmats[i, 1]
            h22 = hmats[i, 2]
            deth = h11 * h22 - h12 * h12
            w = d * csqrt(-(z * z) * deth)
            if cabs(w) < 1e-4:
                w2 = w * w
                ch = 1.0 + w2 / 2.0 * (1.0 + w2 / 12.0 * (1.0 + w2 / 30.0))
                shw = 1.0 + w2 / 6.0 * (1.0 + w2 / 20.0 * (1.0 + w2 / 42.0))
            elif fabs(creal(w)) > 300.0:
                # scale out exp(|Re w|) to avoid cosh overflow
                sc = fabs(creal(w))
                ep = cexp(w - sc)
                em = cexp(-w - sc)
                ch = 0.5 * (ep + em)
                shw = 0.5 * (ep - em) / w
                k = <int>(sc / log(2.0))
                f = exp(sc - k * log(2.0))
                ch = ch * f
                shw = shw * f
                exp2 += k
            else:
                ch = ccosh(w)
                shw = csinh(w) / w
            b11 = z * h12 * d
            b12 = z * h22 * d
            b21 = -z * h11 * d
            a11 = ch + shw * b11
            a12 = shw * b12
            a21 = shw * b21
            a22 = ch - shw * b11
        t11 = a11 * m11 + a12 * m21
        t12 = a11 * m12 + a12 * m22
        t21 = a21 * m11 + a22 * m21
        t22 = a21 * m12 + a22 * m22
        m11 = t11
        m12 = t12
        m21 = t21
        m22 = t22
        big = cabs(m11)
        m = cabs(m12)
        if m > big:
            big = m
        m = cabs(m21)
        if m > big:
            big = m
        m = cabs(m22)
        if m > big:
            big = m
        if big > _LIMIT or (big != 0.0 and big < 1.0 / _LIMIT):
            frexp(big, &k)
            k -= 1
            f = 2.0 ** (-k)
            m11 = m11 * f
            m12 = m12 * f
            m21 = m21 * f
            m22 = m22 * f
            exp2 += k
    return m11, m12, m21, m22, exp2
