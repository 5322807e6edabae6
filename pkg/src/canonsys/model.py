"""Hamiltonian data model: finite-rank systems, strings, and named examples."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

TRACE_TOL = 1e-12


def normalize_angle(phi: float) -> float:
    """Reduce an angle to [0, pi); a projection only sees the line it spans."""
    phi = math.fmod(phi, math.pi)
    if phi < 0:
        phi += math.pi
    if phi >= math.pi:  # fmod rounding at the boundary
        phi -= math.pi
    return phi


def projection_diff_norm(phi: float, psi: float) -> float:
    """Operator norm of P_phi - P_psi; equals |sin(phi - psi)|."""
    return abs(math.sin(phi - psi))


def sym_norm(a: np.ndarray) -> float:
    """Operator norm of a symmetric 2x2 matrix."""
    m = 0.5 * (a[0, 0] + a[1, 1])
    r = math.hypot(0.5 * (a[0, 0] - a[1, 1]), a[0, 1])
    return abs(m) + r


def projection_matrix(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c * c, c * s], [c * s, s * s]])


@dataclass(frozen=True)
class RankOne:
    phi: float

    def matrix(self) -> np.ndarray:
        return projection_matrix(self.phi)


@dataclass(frozen=True)
class ConstantMatrix:
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        object.__setattr__(self, "h", h)
        if h.shape != (2, 2) or abs(h[0, 1] - h[1, 0]) > TRACE_TOL:
            raise ValueError("h must be a symmetric 2x2 matrix")
        if abs(h[0, 0] + h[1, 1] - 1.0) > TRACE_TOL:
            raise ValueError("h must have trace 1")
        # PSD check for a symmetric trace-1 matrix: det >= 0 and h11 >= 0.
        if h[0, 0] < -TRACE_TOL or h[0, 0] * h[1, 1] - h[0, 1] ** 2 < -TRACE_TOL:
            raise ValueError("h must be positive semidefinite")

    def matrix(self) -> np.ndarray:
        return self.h


@dataclass(frozen=True)
class Segment:
    """One constancy piece of the Hamiltonian: length delta, value kind."""

    delta: float
    kind: RankOne | ConstantMatrix

    def __post_init__(self):
        if not (self.delta > 0.0) or not math.isfinite(self.delta):
            raise ValueError(f"segment length must be positive, got {self.delta}")
        if isinstance(self.kind, RankOne):
            object.__setattr__(self, "kind", RankOne(normalize_angle(self.kind.phi)))


def rank_one_segment(delta: float, phi: float) -> Segment:
    return Segment(delta, RankOne(phi))


class FiniteRankHamiltonian:
    """Ordered piecewise-constant Hamiltonian on (0, L)."""

    def __init__(self, segments):
        segments = list(segments)
        if not segments:
            raise ValueError("need at least one segment")
        self.segments = segments
        self.L = float(sum(s.delta for s in segments))
        self._arrays = None

    def __len__(self):
        return len(self.segments)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.kernel_arrays()[0]

    def kernel_arrays(self):
        """(breakpoints, deltas, phis, kinds, hmats) in kernel layout."""
        if self._arrays is None:
            n = len(self.segments)
            deltas = np.empty(n)
            phis = np.zeros(n)
            kinds = np.zeros(n, dtype=np.uint8)
            hmats = np.zeros((n, 3))
            for i, seg in enumerate(self.segments):
                deltas[i] = seg.delta
                if isinstance(seg.kind, RankOne):
                    phis[i] = seg.kind.phi
                else:
                    kinds[i] = 1
                    h = seg.kind.h
                    hmats[i] = (h[0, 0], h[0, 1], h[1, 1])
            bp = np.concatenate(([0.0], np.cumsum(deltas)))
            self._arrays = (bp, deltas, phis, kinds, hmats)
        return self._arrays

    @property
    def all_rank_one(self) -> bool:
        return not self.kernel_arrays()[3].any()

    def value_at(self, x: float) -> np.ndarray:
        # Half-open convention: segment j owns [x_j, x_{j+1}).
        bp = self.breakpoints
        j = int(np.searchsorted(bp, x, side="right")) - 1
        j = min(max(j, 0), len(self.segments) - 1)
        return self.segments[j].kind.matrix()

    def concat(self, other: "FiniteRankHamiltonian") -> "FiniteRankHamiltonian":
        return FiniteRankHamiltonian(self.segments + other.segments)

    def to_json_dict(self) -> dict:
        segs = []
        for s in self.segments:
            if isinstance(s.kind, RankOne):
                segs.append({"delta": s.delta, "phi": s.kind.phi})
            else:
                h = s.kind.h
                segs.append({"delta": s.delta, "matrix": [[h[0, 0], h[0, 1]], [h[1, 0], h[1, 1]]]})
        return {"L": self.L, "segments": segs}

    @staticmethod
    def from_json_dict(doc: dict) -> "FiniteRankHamiltonian":
        segs = []
        for item in doc["segments"]:
            if "phi" in item:
                segs.append(rank_one_segment(item["delta"], item["phi"]))
            else:
                segs.append(Segment(item["delta"], ConstantMatrix(np.array(item["matrix"]))))
        ham = FiniteRankHamiltonian(segs)
        if "L" in doc and abs(ham.L - doc["L"]) > 1e-12 * max(1.0, abs(doc["L"])):
            raise ValueError("declared L inconsistent with segment lengths")
        return ham

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def loads(text: str) -> "FiniteRankHamiltonian":
        return FiniteRankHamiltonian.from_json_dict(json.loads(text))


@dataclass
class StringSpec:
    """Partition of (0, L) into intervals carrying label 1 (H_1) or 2 (H_2)."""

    intervals: list[tuple[float, int]]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for length, label in self.intervals:
            if not (length > 0.0):
                raise ValueError("interval lengths must be positive")
            if label not in (1, 2):
                raise ValueError("labels must be 1 or 2")

    @property
    def L(self) -> float:
        return float(sum(length for length, _ in self.intervals))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([length for length, _ in self.intervals])

    @property
    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.intervals], dtype=np.int8)

    def label_measure(self, label: int) -> float:
        return float(sum(length for length, lab in self.intervals if lab == label))

    def to_json_dict(self) -> dict:
        return {"intervals": [{"len": length, "label": label} for length, label in self.intervals]}

    @staticmethod
    def from_json_dict(doc: dict) -> "StringSpec":
        return StringSpec([(item["len"], item["label"]) for item in doc["intervals"]])

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def loads(text: str) -> "StringSpec":
        return StringSpec.from_json_dict(json.loads(text))


# Angle convention: label 1 <-> H_1 = diag(1,0) <-> phi = 0;
#                   label 2 <-> H_2 = diag(0,1) <-> phi = pi/2.
LABEL_PHI = {1: 0.0, 2: math.pi / 2}


def string_to_hamiltonian(s: StringSpec) -> FiniteRankHamiltonian:
    return FiniteRankHamiltonian(
        rank_one_segment(length, LABEL_PHI[label]) for length, label in s.intervals
    )


def power_law_string(p: float, J: int) -> StringSpec:
    """Alternating string with breakpoints b_j = 1 - j**(-alpha), alpha = 1/p - 1.

    Intervals [b_{j-1}, b_j] for j = 2..J (b_1 = 0), labeled 1 for even j and
    2 for odd j, plus the remainder [b_J, 1] continuing the parity pattern.
    The system has order p in the J -> infinity limit.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if J < 3:
        raise ValueError("J must be >= 3 so both labels occur")
    alpha = 1.0 / p - 1.0
    b = 1.0 - np.arange(1, J + 1, dtype=float) ** (-alpha)  # b_1 .. b_J
    intervals = []
    for j in range(2, J + 1):
        delta = b[j - 1] - b[j - 2]
        if delta <= 0.0:
            break
        intervals.append((float(delta), 1 if j % 2 == 0 else 2))
    remainder = 1.0 - b[J - 1]
    if remainder > 0.0:
        intervals.append((float(remainder), 1 if (J + 1) % 2 == 0 else 2))
    return StringSpec(intervals, meta={"kind": "powerlaw", "p": p, "J": J})


def cantor_string(depth: int) -> StringSpec:
    """Cantor string truncated at generation `depth`, total length 2.

    With xi the Cantor function and T(x) = x + xi(x): images of the constancy
    intervals of xi (up to the given generation) are labeled 1; the 2**depth
    remaining dust blocks, each of length 3**-depth + 2**-depth, are labeled 2.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    # Left endpoints of the depth-D Cantor pre-set blocks, in increasing order.
    starts = np.zeros(1)
    for _ in range(depth):
        starts = np.concatenate((starts / 3.0, starts / 3.0 + 2.0 / 3.0))
        starts.sort()
    w3 = 3.0 ** (-depth)
    w2 = 2.0 ** (-depth)
    intervals = []
    for i, a in enumerate(starts):
        if i > 0:
            gap = a - (starts[i - 1] + w3)
            intervals.append((float(gap), 1))  # T is a shift by i*w2 here
        intervals.append((float(w3 + w2), 2))
    return StringSpec(intervals, meta={"kind": "cantor", "depth": depth})


def _pieces_in_window(H: FiniteRankHamiltonian, lo: float, hi: float):
    """Sub-segmentation of H restricted to [lo, hi] as (bounds, seg indices)."""
    bp = H.breakpoints
    if lo < bp[0] - 1e-12 or hi > bp[-1] + 1e-12:
        raise ValueError("window outside the Hamiltonian domain")
    lo = max(lo, bp[0])
    hi = min(hi, bp[-1])
    inner = bp[(bp > lo) & (bp < hi)]
    bounds = np.concatenate(([lo], inner, [hi]))
    idx = np.searchsorted(bp, bounds[:-1], side="right") - 1
    return bounds, idx


def l1_distance(H: FiniteRankHamiltonian, G: FiniteRankHamiltonian,
                window: tuple[float, float] | None = None) -> float:
    """Integral over the window of the pointwise operator-norm difference.

    For two rank-one pieces with angles phi, psi the integrand is
    |sin(phi - psi)|; general pieces fall back to the symmetric 2x2 norm.
    """
    if window is None:
        window = (0.0, min(H.L, G.L))
    lo, hi = window
    if hi <= lo:
        return 0.0
    bh, ih = _pieces_in_window(H, lo, hi)
    bg, ig = _pieces_in_window(G, lo, hi)
    bounds = np.union1d(bh, bg)
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    lens = np.diff(bounds)
    jh = np.searchsorted(H.breakpoints, mids, side="right") - 1
    jg = np.searchsorted(G.breakpoints, mids, side="right") - 1
    _, _, phisH, kindsH, _ = H.kernel_arrays()
    _, _, phisG, kindsG, _ = G.kernel_arrays()
    total = 0.0
    rank1 = (kindsH[jh] == 0) & (kindsG[jg] == 0)
    if rank1.any():
        total += float(np.sum(np.abs(np.sin(phisH[jh[rank1]] - phisG[jg[rank1]])) * lens[rank1]))
    if not rank1.all():
        for k in np.nonzero(~rank1)[0]:
            a = H.segments[jh[k]].kind.matrix() - G.segments[jg[k]].kind.matrix()
            total += sym_norm(a) * lens[k]
    return total
