"""Monodromy matrices of piecewise-constant canonical systems.

Sign convention (fixed by the j-odd/j-even transfer blocks of alternating
strings): M' = -z J H M, so a rank-one segment of length delta contributes
the factor I + z*delta*K with K = -J P_phi, which is exact because K is
nilpotent.  Constant-matrix segments use the traceless 2x2 Cayley-Hamilton
closed form of the exponential.  Every factor is unimodular (tr(J H) = 0),
so products carry an exactly tracked determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import transfer_product
from .model import FiniteRankHamiltonian, RankOne, Segment
from .scaledarith import LogComplex, LogNumber, ScaledMatrix

_LN2 = math.log(2.0)


def transfer_step(seg: Segment, z: complex) -> ScaledMatrix:
    """Monodromy factor of a single segment."""
    deltas = np.array([seg.delta])
    if isinstance(seg.kind, RankOne):
        phis = np.array([seg.kind.phi])
        kinds = np.zeros(1, dtype=np.uint8)
        hmats = np.zeros((1, 3))
    else:
        phis = np.zeros(1)
        kinds = np.ones(1, dtype=np.uint8)
        h = seg.kind.h
        hmats = np.array([[h[0, 0], h[0, 1], h[1, 1]]])
    m11, m12, m21, m22, e2 = transfer_product(deltas, phis, kinds, hmats, complex(z))
    m = ScaledMatrix(np.array([[m11, m12], [m21, m22]]), e2, LogComplex(0.0, 0.0))
    return m.normalize()


def monodromy_eval(H: FiniteRankHamiltonian, z: complex,
                   upto: int | None = None) -> ScaledMatrix:
    """M(x_upto, z): ordered product of the first `upto` transfer factors."""
    _, deltas, phis, kinds, hmats = H.kernel_arrays()
    if upto is not None:
        if upto > len(deltas):
            raise ValueError("upto exceeds the segment count")
        deltas, phis, kinds, hmats = deltas[:upto], phis[:upto], kinds[:upto], hmats[:upto]
    m11, m12, m21, m22, e2 = transfer_product(
        np.ascontiguousarray(deltas), np.ascontiguousarray(phis),
        np.ascontiguousarray(kinds), np.ascontiguousarray(hmats), complex(z))
    m = ScaledMatrix(np.array([[m11, m12], [m21, m22]]), e2, LogComplex(0.0, 0.0))
    return m.normalize()


def breakpoint_matrices(H: FiniteRankHamiltonian, z: complex):
    """M(x_j, z) for j = 0..N, as ScaledMatrix values (N+1 of them)."""
    out = [ScaledMatrix.identity()]
    m11, m12, m21, m22 = 1 + 0j, 0j, 0j, 1 + 0j
    e2 = 0
    for seg in H.segments:
        f = transfer_step(seg, z)
        a = f.m * 2.0**f.exp2  # single-factor scale is always representable
        t11 = a[0, 0] * m11 + a[0, 1] * m21
        t12 = a[0, 0] * m12 + a[0, 1] * m22
        t21 = a[1, 0] * m11 + a[1, 1] * m21
        t22 = a[1, 0] * m12 + a[1, 1] * m22
        m11, m12, m21, m22 = t11, t12, t21, t22
        big = max(abs(m11), abs(m12), abs(m21), abs(m22))
        if big > 2.0**64:
            k = math.frexp(big)[1] - 1
            s = 2.0**-k
            m11, m12, m21, m22 = m11 * s, m12 * s, m21 * s, m22 * s
            e2 += k
        out.append(ScaledMatrix(np.array([[m11, m12], [m21, m22]]), e2,
                                LogComplex(0.0, 0.0)))
    return out


def det_residual(m: ScaledMatrix) -> float:
    """|det - 1| for a (tracked-determinant) transfer product."""
    from .scaledarith import scaled_det

    d = scaled_det(m)
    return abs(d.to_complex() - 1.0)


def _slog_add(s1, l1, s2, l2):
    """Vectorized signed log-domain addition on (sign, logmag) arrays."""
    s1 = np.asarray(s1, dtype=np.int8)
    s2 = np.asarray(s2, dtype=np.int8)
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    hi = np.where(l1 >= l2, l1, l2)
    lo = np.where(l1 >= l2, l2, l1)
    shi = np.where(l1 >= l2, s1, s2)
    slo = np.where(l1 >= l2, s2, s1)
    same = shi == slo
    with np.errstate(divide="ignore", invalid="ignore"):
        d = lo - hi
        mag = np.where(same, np.log1p(np.exp(d)), np.log1p(-np.exp(d)))
    out_l = hi + mag
    out_s = shi.copy()
    cancel = (~same) & (d == 0.0)
    out_s[cancel] = 0
    out_l[cancel] = -np.inf
    out_s[s1 == 0] = s2[s1 == 0]
    out_l[s1 == 0] = l2[s1 == 0]
    out_s[s2 == 0] = s1[s2 == 0]
    out_l[s2 == 0] = l1[s2 == 0]
    both0 = (s1 == 0) & (s2 == 0)
    out_s[both0] = 0
    out_l[both0] = -np.inf
    return out_s, out_l


@dataclass
class MatrixPolynomial:
    """2x2 matrix polynomial in z with real coefficients in signed log form.

    signs[i][j] and logs[i][j] are arrays over the coefficient degree; the
    value of entry (i, j) is sum_k sign*exp(logmag) * z**k.
    """

    signs: list
    logs: list
    truncated: bool = False

    @property
    def degree(self) -> int:
        deg = 0
        for i in range(2):
            for j in range(2):
                nz = np.nonzero(self.signs[i][j])[0]
                if nz.size:
                    deg = max(deg, int(nz[-1]))
        return deg

    def coeff(self, i: int, j: int, k: int) -> LogNumber:
        s = self.signs[i][j]
        if k >= len(s) or s[k] == 0:
            return LogNumber.zero()
        return LogNumber(int(s[k]), float(self.logs[i][j][k]))

    def entry_coefficients(self, i: int, j: int):
        """(signs, logmags) arrays of entry (i, j)."""
        return self.signs[i][j], self.logs[i][j]

    def eval_entry(self, i: int, j: int, z: complex) -> LogComplex:
        """Entry value at z, computed with a factored-out log scale."""
        s = self.signs[i][j]
        l = self.logs[i][j]
        k = np.arange(len(s))
        nz = s != 0
        if not nz.any():
            return LogComplex(-math.inf, 0.0)
        lz = math.log(abs(z)) if z != 0 else -math.inf
        az = np.angle(complex(z))
        term_log = l[nz] + k[nz] * lz
        shift = float(np.max(term_log))
        acc = np.sum(s[nz] * np.exp(term_log - shift) * np.exp(1j * k[nz] * az))
        if acc == 0:
            return LogComplex(-math.inf, 0.0)
        return LogComplex(shift + math.log(abs(acc)), float(np.angle(acc)))

    def eval_matrix(self, z: complex) -> ScaledMatrix:
        entries = [[self.eval_entry(i, j, z) for j in range(2)] for i in range(2)]
        shift = max(e.logmag for row in entries for e in row)
        if shift == -math.inf:
            shift = 0.0
        m = np.array([[(0 if e.logmag == -math.inf else
                        math.exp(e.logmag - shift)) * np.exp(1j * e.arg)
                       for e in row] for row in entries])
        e2 = int(round(shift / _LN2))
        rem = shift - e2 * _LN2
        return ScaledMatrix(m * math.exp(rem), e2).normalize()


def monodromy_poly(H: FiniteRankHamiltonian, degree_cap: int | None = None) -> MatrixPolynomial:
    """Exact coefficient sequences of z -> M(L, z) for rank-one systems.

    Coefficients are accumulated in the signed log domain; they span hundreds
    of orders of magnitude for long systems.  Exceeding `degree_cap` drops
    higher coefficients and sets the truncation flag.
    """
    if not H.all_rank_one:
        raise ValueError("monodromy_poly requires all segments rank-one")
    cap = len(H.segments) if degree_cap is None else degree_cap
    # signs/logs indexed [i][j] -> arrays over degree
    signs = [[np.zeros(1, dtype=np.int8) for _ in range(2)] for _ in range(2)]
    logs = [[np.full(1, -np.inf) for _ in range(2)] for _ in range(2)]
    signs[0][0][0] = 1
    logs[0][0][0] = 0.0
    signs[1][1][0] = 1
    logs[1][1][0] = 0.0
    truncated = False
    for seg in H.segments:
        phi = seg.kind.phi
        c, s = math.cos(phi), math.sin(phi)
        k = np.array([[c * s, s * s], [-c * c, -c * s]])
        logd = math.log(seg.delta)
        cur_len = len(signs[0][0])
        new_len = min(cur_len + 1, cap + 1)
        if cur_len + 1 > cap + 1:
            truncated = True
        new_signs = [[None, None], [None, None]]
        new_logs = [[None, None], [None, None]]
        for i in range(2):
            for j in range(2):
                ns = np.zeros(new_len, dtype=np.int8)
                nl = np.full(new_len, -np.inf)
                ns[:cur_len] = signs[i][j]
                nl[:cur_len] = logs[i][j]
                # add delta * z * (K @ old)[i][j], shifted one degree up
                for t in range(2):
                    kit = k[i, t]
                    if kit == 0.0:
                        continue
                    ks = 1 if kit > 0 else -1
                    kl = math.log(abs(kit)) + logd
                    add_s = signs[t][j] * ks
                    add_l = logs[t][j] + kl
                    take = min(cur_len, new_len - 1)
                    ns[1:take + 1], nl[1:take + 1] = _slog_add(
                        ns[1:take + 1], nl[1:take + 1], add_s[:take], add_l[:take])
                new_signs[i][j] = ns
                new_logs[i][j] = nl
        signs, logs = new_signs, new_logs
    return MatrixPolynomial(signs, logs, truncated)


def energy_identity_residual(H: FiniteRankHamiltonian, lam: complex) -> float:
    """Relative residual of the quadratic-form identity

    Im(M11(L) conj(M21(L))) = Im(lam) * integral <H Theta, Theta>,

    with Theta the first column of M.  On a rank-one segment <Theta, e_j> is
    constant, so the integral is sum_j delta_j |<Theta(x_j), e_j>|^2.
    """
    if not H.all_rank_one:
        raise ValueError("closed-form energy identity needs rank-one segments")
    mats = breakpoint_matrices(H, lam)
    final = mats[-1]
    ef = final.exp2
    lhs = float(np.imag(final.m[0, 0] * np.conj(final.m[1, 0])))  # units 4**ef
    rhs = 0.0
    for j, seg in enumerate(H.segments):
        m = mats[j]
        c, s = math.cos(seg.kind.phi), math.sin(seg.kind.phi)
        inner = m.m[0, 0] * c + m.m[1, 0] * s
        rhs += seg.delta * (abs(inner) ** 2) * 4.0 ** (m.exp2 - ef)
    rhs *= lam.imag
    denom = max(abs(lhs), abs(rhs))
    if denom == 0.0:
        return 0.0
    return abs(lhs - rhs) / denom
