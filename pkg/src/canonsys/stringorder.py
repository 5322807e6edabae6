"""Order of Krein strings: balance scale s(tau, x), greedy coverings, the
condition (A)/(B) sums, and the Kats order functional.

All measure bookkeeping is segment-exact: the label-1 and label-2 cumulative
measures are piecewise linear, so s(tau, x) reduces to locating a breakpoint
interval and solving one linear factor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import StringSpec
from .orders import OrderEstimate, growth_exponent_fit

PREFIX_FRACTION = 0.01  # each auto-prepended interval is this fraction of L


class BelowThresholdError(ValueError):
    """tau too small for the balance equation to have a solution."""


class StringMeasure:
    """Cumulative label measures of a string, with vectorized queries."""

    def __init__(self, s: StringSpec):
        self.spec = s
        lengths = s.lengths
        labels = s.labels
        self.bp = np.concatenate(([0.0], np.cumsum(lengths)))
        self.cum1 = np.concatenate(([0.0], np.cumsum(np.where(labels == 1, lengths, 0.0))))
        self.cum2 = np.concatenate(([0.0], np.cumsum(np.where(labels == 2, lengths, 0.0))))
        self.labels = labels
        self.L = float(self.bp[-1])

    def c1(self, x):
        return np.interp(x, self.bp, self.cum1)

    def c2(self, x):
        return np.interp(x, self.bp, self.cum2)

    def m1(self, lo, hi):
        return self.c1(hi) - self.c1(lo)

    def m2(self, lo, hi):
        return self.c2(hi) - self.c2(lo)

    def locate_s(self, tau: float, c1x, c2x, x):
        """Segment index k of s(tau, x): the largest breakpoint index with
        tau^2 m1(bp_k, x) m2(bp_k, x) >= 1, found by vectorized bisection."""
        t2 = tau * tau
        if np.any(t2 * c1x * c2x < 1.0):
            raise BelowThresholdError("tau too small for s(tau, x) to exist")
        lo = np.zeros(len(x), dtype=np.int64)
        hi = np.minimum(np.searchsorted(self.bp, x, side="left") - 1,
                        len(self.bp) - 2)
        hi = np.maximum(hi, 0)
        while True:
            gap = hi - lo
            if not np.any(gap > 0):
                break
            mid = (lo + hi + 1) // 2
            val = t2 * (c1x - self.cum1[mid]) * (c2x - self.cum2[mid])
            ok = val >= 1.0
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid - 1)
        return lo

    def s_of(self, tau: float, x):
        """Solve tau^2 * m1(s, x) * m2(s, x) = 1 for s in [0, x], vectorized.

        The product is strictly decreasing in s where positive, so the root
        is unique.  Raises BelowThresholdError where no solution exists.
        """
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        t2 = tau * tau
        c1x = self.c1(x)
        c2x = self.c2(x)
        k = self.locate_s(tau, c1x, c2x, x)
        lab = self.labels[k]
        # Within segment k one cumulative is constant, the other linear.
        const2 = c2x - self.cum2[k]
        const1 = c1x - self.cum1[k]
        with np.errstate(divide="ignore"):
            s_lab1 = self.bp[k] + const1 - 1.0 / (t2 * const2)
            s_lab2 = self.bp[k] + const2 - 1.0 / (t2 * const1)
        s = np.where(lab == 1, s_lab1, s_lab2)
        s = np.clip(s, 0.0, x)
        return float(s[0]) if scalar else s


def prepare_string(s: StringSpec):
    """Auto-prepend the H_1/H_2 prefix the covering construction assumes.

    If the string does not already start with a label-1 interval followed by
    a label-2 interval, two intervals of length 0.01*L each are attached at
    the left end (this does not change the order).  Returns
    (prepared spec, prefix threshold a, modified flag).
    """
    labels = s.labels
    if len(labels) >= 2 and labels[0] == 1 and labels[1] == 2:
        return s, float(s.intervals[0][0] + s.intervals[1][0]), False
    pre = PREFIX_FRACTION * s.L
    spec = StringSpec([(pre, 1), (pre, 2)] + list(s.intervals), meta=dict(s.meta))
    return spec, 2.0 * pre, True


@dataclass
class Covering:
    """Decreasing breakpoints L = x_1 > ... > x_{n+1} = 0 of a covering."""

    breakpoints: np.ndarray
    R: float | None = None
    n_interior: int = 0
    string: StringSpec | None = None
    prefix: float | None = None
    modified: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.breakpoints) - 1

    def intervals(self):
        b = self.breakpoints
        return [(float(b[j + 1]), float(b[j])) for j in range(len(b) - 1)]

    def to_json_dict(self) -> dict:
        return {"R": self.R, "breakpoints": [float(v) for v in self.breakpoints]}


def s_of(s: StringSpec, tau: float, x: float) -> float:
    return StringMeasure(s).s_of(tau, x)


def greedy_covering(s: StringSpec, R: float) -> Covering:
    """The proof's covering: x_1 = L, x_{j+1} = s(R, x_j) while the balance
    equation is solvable, then one final interval down to 0.

    Interior steps satisfy R^2 m1 m2 = 1 exactly, hence have length >= 2/R;
    the final interval carries no product mass (one label measure is 0), so
    covering_sum equals n_interior / R exactly.
    """
    spec, a, modified = prepare_string(s)
    sm = StringMeasure(spec)
    xs = [sm.L]
    x = sm.L
    limit = int(R * sm.L) + 3
    t2 = R * R
    while t2 * sm.c1(x) * sm.c2(x) >= 1.0:
        x = sm.s_of(R, x)
        xs.append(x)
        if len(xs) > limit:
            raise RuntimeError("greedy covering exceeded its step bound")
    n_interior = len(xs) - 1
    if xs[-1] > 0.0:
        xs.append(0.0)
    return Covering(np.array(xs), R=R, n_interior=n_interior, string=spec,
                    prefix=a, modified=modified)


def covering_sum(s: StringSpec | None, c: Covering) -> float:
    """Condition (A) sum over the covering, with segment-exact measures."""
    spec = s if s is not None else c.string
    if spec is None:
        raise ValueError("no string attached to the covering")
    sm = StringMeasure(spec)
    b = c.breakpoints
    hi, lo = b[:-1], b[1:]
    return float(np.sum(np.sqrt(sm.m1(lo, hi) * sm.m2(lo, hi))))


def _default_d_grid():
    return np.round(np.arange(0.05, 1.0001, 0.05), 10)


def string_order_upper(s: StringSpec, d_grid=None, R_grid=None,
                       slack: float = 0.03) -> OrderEstimate:
    """Covering-based order: smallest d whose greedy coverings satisfy the
    fitted growth bounds sum_A <= C R^(d-1) and n(R) <= C R^d.

    The greedy covering does not depend on d, so the grid search reduces to
    thresholding the two fitted slopes; the d grid is refined from 0.05 to
    0.01 steps around the first passing value, matching infimum semantics.
    """
    if R_grid is None:
        R_grid = np.geomspace(1e2, 1e5, 10)
    R_grid = np.asarray(R_grid, dtype=float)
    ns = []
    sums = []
    for R in R_grid:
        cov = greedy_covering(s, R)
        ns.append(cov.n)
        sums.append(covering_sum(None, cov))
    lnR = np.log(R_grid)
    slope_A, se_A, _ = growth_exponent_fit(lnR, np.log(sums))
    slope_B, se_B, _ = growth_exponent_fit(lnR, np.log(ns))

    def passes(d):
        return slope_A <= d - 1.0 + slack and slope_B <= d + slack

    if d_grid is None:
        d_grid = _default_d_grid()
        first = next((d for d in d_grid if passes(d)), None)
        if first is not None:
            fine = np.round(np.arange(max(first - 0.05, 0.01), first + 1e-9, 0.01), 10)
            first = next((d for d in fine if passes(d)), first)
    else:
        d_grid = np.asarray(d_grid, dtype=float)
        first = next((d for d in d_grid if passes(d)), None)
    inconclusive = first is None
    value = float(first) if first is not None else float(np.max(d_grid))
    se = max(se_A, se_B)
    return OrderEstimate(
        value=value,
        method="covering",
        slope_ci=(value - 2 * se, value + 2 * se),
        window=(float(R_grid[0]), float(R_grid[-1])),
        diagnostics={"slope_A": slope_A, "slope_B": slope_B,
                     "n": ns, "sum_A": sums, "inconclusive": inconclusive},
    )


def kats_integral(sm: StringMeasure, tau: float, a: float) -> float:
    """integral over X_2 intersect (a, L) of 1 / m2(s(tau, x), x) dx, exact.

    On a label-2 interval the label-1 cumulative is constant, so on each
    x-piece where s(tau, x) stays inside one segment the integrand is either
    1/(linear) (s in a label-1 segment: the label-2 measure of the window
    grows with x) or constant (s in a label-2 segment: the window's label-1
    measure is frozen on both sides, pinning m2 = 1/(tau^2 m1)).  The piece
    boundaries are where s crosses breakpoints, available in closed form, so
    the integral is a finite sum of logs and products.
    """
    labels = sm.labels
    bp, cum1, cum2 = sm.bp, sm.cum1, sm.cum2
    t2 = tau * tau
    idx = np.flatnonzero((labels == 2) & (bp[1:] > a))
    if len(idx) == 0:
        return 0.0
    xl = np.maximum(bp[idx], a)
    xr = bp[idx + 1]
    c1i = cum1[idx]  # constant across each label-2 interval
    c2l = cum2[idx] + (xl - bp[idx])
    c2r = cum2[idx + 1]
    k_l = sm.locate_s(tau, c1i, c2l, xl)
    k_r = sm.locate_s(tau, c1i, c2r, xr)
    total = 0.0
    for i in range(len(idx)):
        C1 = c1i[i]
        cur = c2l[i]
        for k in range(k_l[i], k_r[i] + 1):
            if k < k_r[i]:
                end = cum2[k + 1] + 1.0 / (t2 * (C1 - cum1[k + 1]))
            else:
                end = c2r[i]
            if labels[k] == 1:
                total += math.log((end - cum2[k]) / (cur - cum2[k]))
            else:
                total += (end - cur) * t2 * (C1 - cum1[k])
            cur = end
    return total


def resolution_cap(s: StringSpec) -> float:
    """tau beyond which a truncated string stops resembling its limit.

    The balance window at x sharpens like 1/tau; once 1/tau^2 drops below
    (smallest label-1 length) * (smallest label-2 length) the windows resolve
    single intervals, the integrand saturates, and log I / log tau decays
    toward the trivial finite-string value.  Fits must stay below this tau.
    """
    lengths = s.lengths
    labels = s.labels
    m1 = float(np.min(lengths[labels == 1]))
    m2 = float(np.min(lengths[labels == 2]))
    return 1.0 / math.sqrt(m1 * m2)


def kats_order_functional(s: StringSpec, tau_grid, a: float | None = None,
                          window_decades: float = 4.0) -> OrderEstimate:
    """Kats order functional: limsup over tau of log(integral) / log(tau).

    For each tau the integral of chi_2 / |(s(tau,x), x) cap X_2| is computed
    exactly; the order estimate is the regression slope of log(integral)
    against log(tau) over the trailing window below the string's resolution
    cap.  The trailing ratio max is kept in the diagnostics.
    """
    spec, a_auto, modified = prepare_string(s)
    if modified:
        warnings.warn("string lacked the H_1/H_2 prefix; two intervals of "
                      f"length {PREFIX_FRACTION:g}*L were prepended", stacklevel=2)
    if a is None:
        a = a_auto
    sm = StringMeasure(spec)
    cap = resolution_cap(spec)
    taus = []
    vals = []
    dropped = 0
    for tau in np.asarray(tau_grid, dtype=float):
        try:
            integral = kats_integral(sm, tau, a)
        except BelowThresholdError:
            dropped += 1
            continue
        if integral > 0.0:
            taus.append(tau)
            vals.append(math.log(integral))
    if dropped:
        warnings.warn(f"{dropped} below-threshold tau values dropped", stacklevel=2)
    taus = np.array(taus)
    vals = np.array(vals)
    fit = taus <= cap
    if fit.sum() < 4:
        fit = np.ones(len(taus), dtype=bool)  # cap beyond grid reach; use all
    top = float(taus[fit][-1])
    fit &= taus >= top / 10.0**window_decades
    if fit.sum() < 4:
        raise ValueError("too few usable tau values")
    from .orders import linear_fit

    slope, _, se, rms = linear_fit(np.log(taus[fit]), vals[fit])
    ratios = vals[fit] / np.log(taus[fit])
    return OrderEstimate(
        value=slope,
        method="kats",
        slope_ci=(slope - 2 * se, slope + 2 * se),
        window=(float(taus[fit][0]), top),
        diagnostics={"trailing_max": float(np.max(ratios)),
                     "residual_rms": rms, "resolution_cap": cap,
                     "curve": list(zip(taus.tolist(), vals.tolist())),
                     "prefix_added": modified},
    )


def covering_csv(rows) -> str:
    lines = ["R,n,sum_A"]
    for R, n, sa in rows:
        lines.append(f"{R!r},{n!r},{sa!r}")
    return "\n".join(lines) + "\n"


def kats_csv(curve) -> str:
    lines = ["tau,kats_value"]
    for t, v in curve:
        lines.append(f"{t!r},{v!r}")
    return "\n".join(lines) + "\n"
