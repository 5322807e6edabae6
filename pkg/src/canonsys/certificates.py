"""Order certificates: the four condition sums, growth fits, and builders.

A certificate at scale R is a finite-rank approximant H_R plus weights
a_j in (0, 1].  The four left-hand sides are computed exactly as displayed;
certifying an order d means their growth in R stays below R^(d-1) (sums i,
ii) and R^d (sums iii, iv).  Constants are never estimated -- the criterion
is scale-free in C, so only growth exponents are fitted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import (FiniteRankHamiltonian, StringSpec, l1_distance,
                    rank_one_segment, string_to_hamiltonian)
from .orders import growth_exponent_fit

PASS_SLACK = 0.03  # regression-noise allowance on fitted slopes, a tunable


@dataclass
class CertificateInstance:
    R: float
    approx: FiniteRankHamiltonian
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.approx.segments):
            raise ValueError("need one weight per segment of the approximant")
        if np.any(self.weights <= 0) or np.any(self.weights > 1):
            raise ValueError("weights must lie in (0, 1]")


@dataclass
class ConditionReport:
    lhs_i: float
    lhs_ii: float
    lhs_iii: float
    lhs_iv: float

    def as_tuple(self):
        return (self.lhs_i, self.lhs_ii, self.lhs_iii, self.lhs_iv)


def evaluate_conditions(H: FiniteRankHamiltonian, cert: CertificateInstance) -> ConditionReport:
    """The four condition sums for (H, H_R, {a_j})."""
    approx = cert.approx
    a = cert.weights
    if abs(approx.L - H.L) > 1e-9 * max(1.0, H.L):
        raise ValueError("approximant must cover the same interval as H")
    bpR, deltasR, phisR, kindsR, _ = approx.kernel_arrays()
    bpH, _, phisH, kindsH, _ = H.kernel_arrays()

    if kindsR.any() or kindsH.any():
        lhs_i = sum(
            l1_distance(H, approx, (bpR[j], bpR[j + 1])) / a[j] ** 2
            for j in range(len(a)))
    else:
        # refine to the union partition; both are rank-one so the integrand
        # on each piece is |sin(phi_H - phi_R)|
        bounds = np.union1d(bpH, bpR)
        bounds = bounds[(bounds >= 0) & (bounds <= min(H.L, approx.L) + 1e-15)]
        lens = np.diff(bounds)
        mids = 0.5 * (bounds[:-1] + bounds[1:])
        jh = np.clip(np.searchsorted(bpH, mids, side="right") - 1, 0, len(phisH) - 1)
        jr = np.clip(np.searchsorted(bpR, mids, side="right") - 1, 0, len(phisR) - 1)
        integ = np.abs(np.sin(phisH[jh] - phisR[jr])) * lens
        lhs_i = float(np.sum(integ / a[jr] ** 2))

    lhs_ii = float(np.sum(a**2 * deltasR))

    if kindsR.any():
        raise ValueError("condition (iii) needs a rank-one approximant")
    dphi = np.abs(np.sin(phisR[:-1] - phisR[1:]))
    lhs_iii = float(np.sum(np.log1p(dphi / (a[:-1] * a[1:]))))

    loga = np.log(a)
    lhs_iv = float(-loga[0] - loga[-1] + np.sum(np.abs(np.diff(loga))))
    return ConditionReport(lhs_i, lhs_ii, lhs_iii, lhs_iv)


_BOUND_OFFSETS = {"i": -1.0, "ii": -1.0, "iii": 0.0, "iv": 0.0}


def fit_certificate(H: FiniteRankHamiltonian, family, R_grid, d: float,
                    slack: float = PASS_SLACK) -> dict:
    """Fit the growth exponents of the four sums over an R grid.

    `family` maps R to a CertificateInstance.  Passes iff each fitted slope
    stays below d-1 (sums i, ii) or d (sums iii, iv) plus the slack.  A sum
    that vanishes identically counts as slope -inf.
    """
    R_grid = np.asarray(R_grid, dtype=float)
    if len(R_grid) < 8:
        raise ValueError("need at least 8 grid points")
    rows = []
    for R in R_grid:
        rep = evaluate_conditions(H, family(R))
        rows.append(rep.as_tuple())
    table = np.array(rows)
    lnR = np.log(R_grid)
    slopes = {}
    passed = True
    for idx, name in enumerate(("i", "ii", "iii", "iv")):
        vals = table[:, idx]
        bound = d + _BOUND_OFFSETS[name] + slack
        if np.all(vals == 0.0):
            slopes[name] = -math.inf
            continue
        if np.any(vals <= 0.0):
            keep = vals > 0.0
            s, _, _ = growth_exponent_fit(lnR[keep], np.log(vals[keep]))
        else:
            s, _, _ = growth_exponent_fit(lnR, np.log(vals))
        slopes[name] = s
        if not math.isfinite(s) or s > bound:
            passed = False
    return {
        "d": d,
        "slack": slack,
        "slopes": slopes,
        "pass": passed,
        "R_grid": R_grid.tolist(),
        "sums": {name: table[:, i].tolist() for i, name in enumerate(("i", "ii", "iii", "iv"))},
    }


def report_to_json(report: dict) -> str:
    return json.dumps({"d": report["d"], "slopes": report["slopes"], "pass": report["pass"]})


def report_to_csv(report: dict) -> str:
    lines = ["R,lhs_i,lhs_ii,lhs_iii,lhs_iv"]
    sums = report["sums"]
    for k, R in enumerate(report["R_grid"]):
        lines.append(f"{R!r},{sums['i'][k]!r},{sums['ii'][k]!r},"
                     f"{sums['iii'][k]!r},{sums['iv'][k]!r}")
    return "\n".join(lines) + "\n"


def builder_power_law(s: StringSpec, R: float, d: float,
                      p: float | None = None) -> CertificateInstance:
    """Certificate from the power-law sharpness construction.

    H_R equals the string on [0, b_{N-1}] with N = round(R^p) and is H_1
    beyond; the last weight is 1, all others R^((d-1)/2).
    """
    if p is None:
        p = s.meta.get("p")
        if p is None:
            raise ValueError("p not provided and not recorded in the string meta")
    N = int(round(R**p))
    lengths = s.lengths
    labels = s.labels
    # intervals of the spec are [b_{j-1}, b_j] for j = 2..; keep ~ N of them
    keep = max(min(N, len(lengths) - 1), 1)
    segs = [rank_one_segment(lengths[i], 0.0 if labels[i] == 1 else math.pi / 2)
            for i in range(keep)]
    tail = s.L - float(np.sum(lengths[:keep]))
    # merged tail takes the final interval's angle, so a truncated string's
    # large remainder piece never contributes a constant mismatch floor
    segs.append(rank_one_segment(tail, 0.0 if labels[-1] == 1 else math.pi / 2))
    a = np.full(len(segs), R ** ((d - 1.0) / 2.0))
    a[-1] = 1.0
    return CertificateInstance(R, FiniteRankHamiltonian(segs), a)


def builder_threshold(H: FiniteRankHamiltonian, R: float, d: float) -> CertificateInstance:
    """Keep segments with delta > 1/R (weight R^((d-1)/2)); replace maximal
    runs of short segments by a fixed phi = 0 projection with weight 1."""
    _, deltas, phis, kinds, _ = H.kernel_arrays()
    if kinds.any():
        raise ValueError("threshold builder needs a rank-one Hamiltonian")
    segs = []
    weights = []
    w_keep = R ** ((d - 1.0) / 2.0)
    run = 0.0
    for j in range(len(deltas)):
        if deltas[j] > 1.0 / R:
            if run > 0.0:
                segs.append(rank_one_segment(run, 0.0))
                weights.append(1.0)
                run = 0.0
            segs.append(rank_one_segment(deltas[j], phis[j]))
            weights.append(w_keep)
        else:
            run += deltas[j]
    if run > 0.0:
        segs.append(rank_one_segment(run, 0.0))
        weights.append(1.0)
    return CertificateInstance(R, FiniteRankHamiltonian(segs), np.array(weights))


def builder_two_level(H: FiniteRankHamiltonian, R: float, d: float,
                      Delta: float, D: float) -> CertificateInstance:
    """Two-level weight profile for delta_j ~ j^(Delta-D), rho_j ~ j^D systems.

    N ~ R^((1-d)/(D-Delta-1)); weights a_j^2 = R^(d-1) for j <= R^d,
    R^(d-1+d(D-Delta-1)) for R^d < j < N-1, and 1 on the tail segment.
    """
    if not (1.0 < Delta < D - 1.0):
        raise ValueError("need 1 < Delta < D - 1")
    if d <= 1.0 / D:
        raise ValueError("need d > 1/D")
    _, deltas, phis, kinds, _ = H.kernel_arrays()
    if kinds.any():
        raise ValueError("two-level builder needs a rank-one Hamiltonian")
    N = int(round(R ** ((1.0 - d) / (D - Delta - 1.0))))
    keep = max(min(N - 1, len(deltas) - 1), 1)
    segs = [rank_one_segment(deltas[j], phis[j]) for j in range(keep)]
    tail = H.L - float(np.sum(deltas[:keep]))
    segs.append(rank_one_segment(tail, 0.0))
    j = np.arange(1, keep + 1, dtype=float)
    a2 = np.where(j <= R**d, R ** (d - 1.0), R ** (d - 1.0 + d * (D - Delta - 1.0)))
    a = np.sqrt(np.clip(a2, None, 1.0))
    weights = np.concatenate((a, [1.0]))
    return CertificateInstance(R, FiniteRankHamiltonian(segs), weights)


def builder_uniform(phi_of_x, L: float, N: int, a: float) -> CertificateInstance:
    """Uniform-grid sampling certificate: x_j = L j / N, angles sampled at the
    left endpoints, constant weight a."""
    if not (0 < a <= 1):
        raise ValueError("a must lie in (0, 1]")
    h = L / N
    segs = [rank_one_segment(h, float(phi_of_x(j * h))) for j in range(N)]
    return CertificateInstance(1.0 / h, FiniteRankHamiltonian(segs), np.full(N, a))
