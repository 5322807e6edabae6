"""Exponential type and order estimation.

Order is a limsup, so finite data can only bracket it: every estimator here
reports a least-squares fit plus a +-2 sigma interval, with trailing-window
maxima kept in the diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ConstantMatrix, FiniteRankHamiltonian, StringSpec
from .monodromy import monodromy_eval


@dataclass
class OrderEstimate:
    value: float
    method: str
    slope_ci: tuple[float, float]
    window: tuple[float, float]
    diagnostics: dict = field(default_factory=dict)


class NotDecayDominatedError(ValueError):
    pass


def linear_fit(x: np.ndarray, y: np.ndarray):
    """LS fit y ~ a*x + b; returns (a, b, stderr_a, residual_rms)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    A = np.column_stack((x, np.ones(n)))
    coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    if n > 2:
        sxx = float(np.sum((x - x.mean()) ** 2))
        se = math.sqrt(max(np.sum(resid**2), 0.0) / (n - 2) / sxx) if sxx > 0 else math.inf
    else:
        se = math.inf
    return float(coef[0]), float(coef[1]), se, rms


def growth_exponent_fit(lnx: np.ndarray, lny: np.ndarray, log_correction: bool = True):
    """Exponent s in y ~ C x^s (log x)^c with c restricted to {0, 1}.

    Explicit log factors are ubiquitous in the covering and certificate
    bounds and bias a plain slope upward by ~0.1 per 10 ln-units of range;
    a free c regressor is nearly collinear with lnx on short grids, so the
    two admissible models are fitted separately and chosen by residual.
    Returns (s, stderr, rms).
    """
    lnx = np.asarray(lnx, dtype=float)
    lny = np.asarray(lny, dtype=float)
    if log_correction and len(lnx) >= 4 and np.all(lnx > 1.0):
        best = None
        for c in (0.0, 1.0):
            s, _, se, rms = linear_fit(lnx, lny - c * np.log(lnx))
            if best is None or rms < best[2]:
                best = (s, se, rms)
        return best
    s, _, se, rms = linear_fit(lnx, lny)
    return s, se, rms


def kdb_type(H: FiniteRankHamiltonian) -> float:
    """Krein-de Branges exponential type: sum delta_j sqrt(det h_j).

    Rank-one segments have det 0 and contribute nothing.
    """
    total = 0.0
    for seg in H.segments:
        if isinstance(seg.kind, ConstantMatrix):
            h = seg.kind.h
            det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
            if det > 0:
                total += seg.delta * math.sqrt(det)
    return total


def geometric_grid(lo: float, hi: float, per_decade: int = 40) -> np.ndarray:
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    n = max(2, int(round(math.log10(hi / lo) * per_decade)))
    return np.geomspace(lo, hi, n)


def growth_curve(H: FiniteRankHamiltonian, tau_grid) -> list[tuple[float, float]]:
    """(tau, log ||M(i tau)||) along the grid, computed from scaled matrices."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(tau_grid < 0) or np.any(np.diff(tau_grid) <= 0):
        raise ValueError("tau grid must be nonnegative and strictly increasing")
    out = []
    for tau in tau_grid:
        m = monodromy_eval(H, 1j * tau)
        out.append((float(tau), m.log_norm()))
    return out


def default_tau_cap(H: FiniteRankHamiltonian) -> float:
    """Truncation-coupling heuristic: growth curves of a J-segment truncation
    track the infinite system only while 1/tau stays above the smallest
    segment; beyond that the polynomial saturates."""
    _, deltas, _, _, _ = H.kernel_arrays()
    return 1.0 / float(np.min(deltas))


def order_fit(curve, window_decades: float = 3.0) -> OrderEstimate:
    """Slope of log log||M(i tau)|| vs log tau over the top decades."""
    pts = [(t, g) for t, g in curve if g > 1.0]
    if len(pts) < 10:
        raise ValueError("too few usable points (need >= 10 with log||M|| > 1)")
    taus = np.array([t for t, _ in pts])
    gs = np.array([g for _, g in pts])
    keep = taus >= taus[-1] / 10.0**window_decades
    taus, gs = taus[keep], gs[keep]
    slope, _, se, rms = linear_fit(np.log(taus), np.log(gs))
    return OrderEstimate(
        value=slope,
        method="growth-fit",
        slope_ci=(slope - 2 * se, slope + 2 * se),
        window=(float(taus[0]), float(taus[-1])),
        diagnostics={"residual_rms": rms, "points": len(taus)},
    )


def order_from_coefficients(coeffs, window_decades: float = 2.0) -> OrderEstimate:
    """Order from Taylor-coefficient decay.

    Input: sequence of (degree k, log|a_k|) with a_k != 0.  The standard
    relation order = limsup k log k / (-log|a_k|) is estimated by fitting
    -log|a_k| ~ b1*(k log k) + b2*k + c over the trailing window and returning
    1/b1; the extra k-term absorbs the Stirling-type linear correction that
    otherwise biases any finite-k fit.  The raw trailing-window max of the
    limsup ratio is reported in the diagnostics.
    """
    ks = np.array([k for k, _ in coeffs], dtype=float)
    la = np.array([l for _, l in coeffs], dtype=float)
    keep = ks >= 2
    ks, la = ks[keep], la[keep]
    if len(ks) < 10:
        raise ValueError("need at least 10 nonzero coefficients")
    y = -la
    if y[-1] <= 0 or np.polyfit(ks, y, 1)[0] <= 0:
        raise NotDecayDominatedError("coefficients are not decay-dominated")
    tail = ks >= ks[-1] / 10.0**window_decades
    kt, yt = ks[tail], y[tail]
    u = kt * np.log(kt)
    A = np.column_stack((u, kt, np.ones(len(kt))))
    coef, _, _, _ = np.linalg.lstsq(A, yt, rcond=None)
    resid = yt - A @ coef
    dof = max(len(kt) - 3, 1)
    cov = np.linalg.pinv(A.T @ A) * float(np.sum(resid**2)) / dof
    b1 = float(coef[0])
    se = math.sqrt(max(cov[0, 0], 0.0))
    ratios = u / yt
    trailing_max = float(np.max(ratios))
    if b1 <= 0:
        value, lo, hi = 0.0, 0.0, trailing_max
    else:
        value = 1.0 / b1
        lo = 1.0 / (b1 + 2 * se)
        hi = 1.0 / (b1 - 2 * se) if b1 - 2 * se > 0 else math.inf
        lo, hi = min(lo, hi), max(lo, hi)
    return OrderEstimate(
        value=value,
        method="coefficients",
        slope_ci=(lo, hi),
        window=(float(kt[0]), float(kt[-1])),
        diagnostics={"trailing_max": trailing_max,
                     "residual_rms": float(np.sqrt(np.mean(resid**2)))},
    )


def alternating_string_coefficients(s: StringSpec, J: int | None = None):
    """Leading (degree, log|coefficient|) data of M11 at odd breakpoints.

    For a strictly alternating string starting with a label-1 block the M11
    polynomial at breakpoint b_{2j-1} has degree k_j = 2j-2 and leading
    coefficient of magnitude prod_{n=2}^{2j-1} delta_n.  Returns the list of
    (k_j, log|c_j|) for j = 1.. while 2j-1 intervals are available.
    """
    labels = s.labels
    if labels[0] != 1 or np.any(labels[1:] == labels[:-1]):
        raise ValueError("string must strictly alternate labels starting with 1")
    logd = np.log(s.lengths)
    # interval i of the spec corresponds to delta_{i+2} of the b-sequence
    cums = np.concatenate(([0.0], np.cumsum(logd)))
    out = [(0, 0.0)]
    j = 2
    while 2 * j - 2 <= len(logd):
        # sum of log delta_n for n = 2 .. 2j-1  ->  cums index 2j-2
        out.append((2 * j - 2, float(cums[2 * j - 2])))
        j += 1
    if J is not None:
        out = out[:J]
    return out


def jacobi_order_lower_bound(jm, n_max: int, window_decades: float = 2.0) -> OrderEstimate:
    """Order bound from |P_j(i tau)| >= pi_j tau^j with pi_j = 1/(rho_1..rho_j)."""
    rho = jm.rho_values(n_max)
    if np.any(rho <= 0):
        raise ValueError("rho must be positive")
    logpi = -np.cumsum(np.log(rho))
    coeffs = [(j + 1, float(logpi[j])) for j in range(len(logpi))]
    est = order_from_coefficients(coeffs, window_decades=window_decades)
    est.method = "coefficients"
    return est


def curve_to_csv(curve, header: str = "tau,log_norm") -> str:
    lines = [header]
    for a, b in curve:
        lines.append(f"{a!r},{b!r}")
    return "\n".join(lines) + "\n"
