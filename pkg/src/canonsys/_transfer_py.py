"""Pure-Python transfer-product kernel (fallback for the compiled one)."""

from __future__ import annotations

import cmath
import math

IMPL = "python"

_LIMIT = 2.0**64


def transfer_product(deltas, phis, kinds, hmats, z):
    """Ordered product of per-segment transfer factors at spectral point z.

    Returns (m11, m12, m21, m22, exp2): the monodromy matrix over the given
    segments as mantissa * 2**exp2.  Factors are applied left of the running
    product (last segment ends up leftmost), matching M' = -z J H M.

    kinds[i] == 0: rank-one segment with angle phis[i];
    kinds[i] == 1: constant-matrix segment with hmats[i] = (h11, h12, h22).
    """
    m11 = 1.0 + 0.0j
    m12 = 0.0 + 0.0j
    m21 = 0.0 + 0.0j
    m22 = 1.0 + 0.0j
    exp2 = 0
    n = len(deltas)
    for i in range(n):
        d = deltas[i]
        if kinds[i] == 0:
            c = math.cos(phis[i])
            s = math.sin(phis[i])
            w = z * d
            # K = -J P_phi; K is nilpotent so the factor is I + w K exactly.
            k11 = c * s
            k12 = s * s
            k21 = -c * c
            a11 = 1.0 + w * k11
            a12 = w * k12
            a21 = w * k21
            a22 = 1.0 - w * k11
        else:
            h11, h12, h22 = hmats[i]
            # A = -z J h is traceless with A^2 = -z^2 det(h) I; use the
            # Cayley-Hamilton closed form exp(dA) = cosh(w) I + sinh(w)/w dA.
            deth = h11 * h22 - h12 * h12
            w = d * cmath.sqrt(-(z * z) * deth)
            if abs(w) < 1e-4:
                w2 = w * w
                ch = 1.0 + w2 / 2.0 * (1.0 + w2 / 12.0 * (1.0 + w2 / 30.0))
                shw = 1.0 + w2 / 6.0 * (1.0 + w2 / 20.0 * (1.0 + w2 / 42.0))
            elif abs(w.real) > 300.0:
                # cosh/sinh would overflow; factor out exp(|Re w|) and fold
                # it into the power-of-two exponent.
                s = abs(w.real)
                ep = cmath.exp(w - s)
                em = cmath.exp(-w - s)
                ch = 0.5 * (ep + em)
                shw = 0.5 * (ep - em) / w
                k = int(s / math.log(2.0))
                f = math.exp(s - k * math.log(2.0))
                ch *= f
                shw *= f
                exp2 += k
            else:
                ch = cmath.cosh(w)
                shw = cmath.sinh(w) / w
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
        m11, m12, m21, m22 = t11, t12, t21, t22
        big = max(abs(m11), abs(m12), abs(m21), abs(m22))
        if big > _LIMIT or (big != 0.0 and big < 1.0 / _LIMIT):
            k = math.frexp(big)[1] - 1
            f = 2.0**-k
            m11 *= f
            m12 *= f
            m21 *= f
            m22 *= f
            exp2 += k
    return m11, m12, m21, m22, exp2
