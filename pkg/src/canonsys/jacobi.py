"""Jacobi matrices and their correspondence with canonical systems.

Conventions: the recurrence is z*Y_n = rho_{n-1} Y_{n-1} + q_n Y_n + rho_n Y_{n+1}
(rho_0 := 0) with first/second-kind seeds P_1 = 1, P_0 = 0, Q_1 = 0, Q_2 = 1/rho_1.
The correspondence to Hamiltonians uses delta_n = P_n(0)^2 + Q_n(0)^2 and the
angle of the vector (P_n(0), Q_n(0)); this normalization is self-certified by
the identity rho_j * |sin(phi_j - phi_{j+1})| * sqrt(delta_j delta_{j+1}) = 1.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .model import FiniteRankHamiltonian, normalize_angle, rank_one_segment
from .orders import OrderEstimate, linear_fit

_LOG_DELTA_FLOOR = math.log(1e-200)


class JacobiMatrix:
    """Tridiagonal parameters q_j (diagonal) and rho_j > 0 (off-diagonal), j >= 1.

    A generator rule n -> (q_n, rho_n) may back the sequences lazily;
    materialized values are memoized.
    """

    def __init__(self, q=None, rho=None, generator=None):
        self._q = list(q) if q is not None else []
        self._rho = list(rho) if rho is not None else []
        self._generator = generator
        if generator is None and len(self._q) != len(self._rho):
            raise ValueError("q and rho must have equal length")
        if any(r <= 0 for r in self._rho):
            raise ValueError("rho must be positive")

    def ensure(self, n: int) -> None:
        while len(self._rho) < n:
            if self._generator is None:
                raise ValueError(f"only {len(self._rho)} coefficients available")
            j = len(self._rho) + 1
            qj, rj = self._generator(j)
            if rj <= 0:
                raise ValueError(f"rho_{j} = {rj} is not positive")
            self._q.append(float(qj))
            self._rho.append(float(rj))

    def q_values(self, n: int) -> np.ndarray:
        self.ensure(n)
        return np.asarray(self._q[:n])

    def rho_values(self, n: int) -> np.ndarray:
        self.ensure(n)
        return np.asarray(self._rho[:n])

    def to_json_dict(self) -> dict:
        return {"q": list(self._q), "rho": list(self._rho)}

    @staticmethod
    def from_json_dict(doc: dict) -> "JacobiMatrix":
        if "birth_death" in doc:
            bd = doc["birth_death"]
            return birth_death(bd["A"], bd["B"])
        return JacobiMatrix(q=doc["q"], rho=doc["rho"])


def polys_at(jm: JacobiMatrix, z: complex, n: int):
    """First and second kind polynomial values P_1..P_n(z), Q_1..Q_n(z)."""
    if n < 2:
        raise ValueError("need n >= 2")
    q = jm.q_values(n)
    rho = jm.rho_values(n)
    P = np.empty(n + 1, dtype=complex)
    Q = np.empty(n + 1, dtype=complex)
    P[0], P[1] = 0.0, 1.0
    Q[0], Q[1] = 0.0, 0.0  # Q_0 unused; the seed Q_2 = 1/rho_1 fixes the branch
    Q[2] = 1.0 / rho[0]
    P[2] = (z - q[0]) / rho[0]
    for k in range(2, n):
        # z Y_k = rho_{k-1} Y_{k-1} + q_k Y_k + rho_k Y_{k+1}
        P[k + 1] = ((z - q[k - 1]) * P[k] - rho[k - 2] * P[k - 1]) / rho[k - 1]
        Q[k + 1] = ((z - q[k - 1]) * Q[k] - rho[k - 2] * Q[k - 1]) / rho[k - 1]
    return P[1:], Q[1:]


def polys_at_zero_log(jm: JacobiMatrix, n: int):
    """Signed log-domain values of P_n(0), Q_n(0) for n = 1..n.

    Returns (sP, lP, sQ, lQ) arrays; needed because delta_n underflows the
    native range long before the asymptotic regime for fast-growing rho.
    """
    q = jm.q_values(n)
    rho = jm.rho_values(n)
    sP = np.zeros(n, dtype=np.int8)
    lP = np.full(n, -np.inf)
    sQ = np.zeros(n, dtype=np.int8)
    lQ = np.full(n, -np.inf)
    sP[0], lP[0] = 1, 0.0
    if n >= 2:
        sQ[1], lQ[1] = 1, -math.log(rho[0])
        if q[0] != 0.0:
            sP[1] = -int(np.sign(q[0]))
            lP[1] = math.log(abs(q[0])) - math.log(rho[0])

    def step(s2, l2, s1, l1, k):
        # Y_{k+1} = (-q_k Y_k - rho_{k-2+1} Y_{k-1}) / rho_{k-1+1}  at z = 0
        qa = q[k - 1]
        ra = rho[k - 2]
        rb = rho[k - 1]
        terms = []
        if qa != 0.0 and s2 != 0:
            terms.append((-int(np.sign(qa)) * s2, math.log(abs(qa)) + l2))
        if s1 != 0:
            terms.append((-s1, math.log(ra) + l1))
        if not terms:
            return 0, -math.inf
        if len(terms) == 1:
            s, l = terms[0]
        else:
            (sa, la), (sb, lb) = terms
            if lb > la:
                sa, la, sb, lb = sb, lb, sa, la
            d = lb - la
            if sa == sb:
                s, l = sa, la + math.log1p(math.exp(d))
            elif d == 0.0:
                s, l = 0, -math.inf
            else:
                s, l = sa, la + math.log1p(-math.exp(d))
        return s, l - math.log(rb)

    for k in range(2, n):
        sP[k], lP[k] = step(sP[k - 1], lP[k - 1], sP[k - 2], lP[k - 2], k)
        sQ[k], lQ[k] = step(sQ[k - 1], lQ[k - 1], sQ[k - 2], lQ[k - 2], k)
    return sP, lP, sQ, lQ


def theorem4_log_deltas(jm: JacobiMatrix, n: int) -> np.ndarray:
    """log delta_n = log(P_n(0)^2 + Q_n(0)^2) for n = 1..n, in log domain."""
    sP, lP, sQ, lQ = polys_at_zero_log(jm, n)
    lP2 = np.where(sP == 0, -np.inf, 2.0 * lP)
    lQ2 = np.where(sQ == 0, -np.inf, 2.0 * lQ)
    return np.logaddexp(lP2, lQ2)


def jacobi_to_hamiltonian(jm: JacobiMatrix, n_max: int) -> FiniteRankHamiltonian:
    """Hamiltonian segments delta_n = P_n(0)^2 + Q_n(0)^2, phi_n = angle mod pi.

    Stops early (with a warning) where delta_n underflows the native range.
    Limit circle cannot be certified from finite data; a warning is issued if
    the materialized sum of deltas is still visibly growing.
    """
    sP, lP, sQ, lQ = polys_at_zero_log(jm, n_max)
    segs = []
    for k in range(n_max):
        lP2 = 2.0 * lP[k] if sP[k] != 0 else -np.inf
        lQ2 = 2.0 * lQ[k] if sQ[k] != 0 else -np.inf
        ld = np.logaddexp(lP2, lQ2)
        if ld == -np.inf:
            raise ArithmeticError(f"P_{k+1}(0) = Q_{k+1}(0) = 0; impossible data")
        if ld < _LOG_DELTA_FLOOR:
            warnings.warn(f"delta underflows at n = {k + 1}; truncating", stacklevel=2)
            break
        scale = max(lP[k], lQ[k])
        pv = sP[k] * math.exp(lP[k] - scale) if sP[k] != 0 else 0.0
        qv = sQ[k] * math.exp(lQ[k] - scale) if sQ[k] != 0 else 0.0
        phi = normalize_angle(math.atan2(qv, pv))
        segs.append(rank_one_segment(math.exp(ld), phi))
    ham = FiniteRankHamiltonian(segs)
    logdeltas = theorem4_log_deltas(jm, len(segs))
    tail = np.exp(logdeltas[-max(1, len(segs) // 10):]).sum()
    if tail > 0.05 * np.exp(logdeltas).sum():
        warnings.warn("sum of deltas still growing; limit-circle regime not "
                      "evident at this truncation", stacklevel=2)
    return ham


def theorem4_residual(jm: JacobiMatrix, H: FiniteRankHamiltonian) -> float:
    """Max relative deviation of rho_j from 1/(|sin dphi| sqrt(delta_j delta_{j+1}))."""
    n = len(H.segments)
    rho = jm.rho_values(n)
    _, deltas, phis, kinds, _ = H.kernel_arrays()
    if kinds.any():
        raise ValueError("Hamiltonian must be rank-one")
    worst = 0.0
    for j in range(n - 1):
        s = abs(math.sin(phis[j] - phis[j + 1]))
        if s == 0.0:
            return math.inf
        rhs = 1.0 / (s * math.sqrt(deltas[j] * deltas[j + 1]))
        worst = max(worst, abs(rho[j] - rhs) / rhs)
    return worst


def birth_death(A, B, n: int | None = None) -> JacobiMatrix:
    """Jacobi matrix of a birth-death process with polynomial rates.

    lambda_m = prod_i (m + B_i), mu_m = prod_i (m + A_i) with mu_0 forced to 0;
    q_{m+1} = lambda_m + mu_m, rho_{m+1} = sqrt(lambda_m mu_{m+1}).
    """
    A = [float(a) for a in A]
    B = [float(b) for b in B]
    if len(A) != len(B):
        raise ValueError("A and B must have the same length")

    def lam(m: int) -> float:
        out = 1.0
        for b in B:
            out *= m + b
        return out

    def mu(m: int) -> float:
        if m == 0:
            return 0.0
        out = 1.0
        for a in A:
            out *= m + a
        return out

    def gen(j: int):
        m = j - 1
        lm = lam(m)
        mm = mu(m)
        m1 = mu(m + 1)
        if lm <= 0 or m1 <= 0 or (m >= 1 and mm <= 0):
            raise ValueError(f"nonpositive birth-death rate at n = {m}")
        return lm + mm, math.sqrt(lm * m1)

    jm = JacobiMatrix(generator=gen)
    if n is not None:
        jm.ensure(n)
    return jm


def berezanskii_log_deltas(rho, n: int) -> np.ndarray:
    """log delta_j, j = 1..n, from the q = 0 reduction.

    delta_{j+1} = ((rho_{j-1} rho_{j-3} ...)/(rho_j rho_{j-2} ...))^2 with the
    products running down to index 1; delta_1 = 1.  Computed in log domain.
    """
    logr = np.log(np.asarray(rho, dtype=float)[: n])
    if len(logr) < n:
        raise ValueError("need at least n rho values")
    out = np.empty(n)
    out[0] = 0.0
    alt = 0.0  # alternating sum log rho_j - log rho_{j-1} + ...
    for j in range(1, n):
        alt = logr[j - 1] - alt
        out[j] = -2.0 * alt
    return out


def convergence_exponent(seq, n_max: int, window_decades: float = 1.0) -> OrderEstimate:
    """inf{alpha : sum seq_j^-alpha < infty} for power-like increasing seq.

    Estimated as 1/beta with beta the trailing-window slope of log seq_j vs
    log j.  Superpolynomial growth drives the estimate to 0.
    """
    vals = np.asarray(seq, dtype=float)[:n_max]
    tail = vals[len(vals) // 2:]
    if np.any(np.diff(tail) <= 0):
        raise ValueError("sequence tail is not increasing")
    j = np.arange(1, len(vals) + 1, dtype=float)
    keep = j >= j[-1] / 10.0**window_decades
    slope, _, se, rms = linear_fit(np.log(j[keep]), np.log(vals[keep]))
    value = 1.0 / slope if slope > 0 else math.inf
    lo = 1.0 / (slope + 2 * se)
    hi = 1.0 / (slope - 2 * se) if slope - 2 * se > 0 else math.inf
    return OrderEstimate(
        value=value,
        method="coefficients",
        slope_ci=(min(lo, hi), max(lo, hi)),
        window=(float(j[keep][0]), float(j[-1])),
        diagnostics={"slope": slope, "residual_rms": rms},
    )
