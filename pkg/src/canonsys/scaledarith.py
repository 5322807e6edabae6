"""Extended-range scalar and 2x2 matrix arithmetic.

Transfer-matrix products reach magnitudes like exp(1e5), far outside the
native double range.  Two representations are used:

* ``LogNumber`` -- a signed real stored as (sign, log of absolute value).
  Used for polynomial coefficients, where signs must be tracked through
  additions.
* ``ScaledMatrix`` -- a 2x2 complex matrix with one shared integer binary
  exponent.  Used on evaluation paths, where a single transfer step changes
  entry magnitudes by a bounded factor, so one exponent per matrix suffices.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

# Renormalization threshold: let entries drift up to 2**64 before rescaling,
# which amortizes the frexp over ~64 doublings in a long product.
SCALE_LIMIT = 2.0**64


class ScaleOverflowError(OverflowError):
    """Binary exponent left the integer range (practically unreachable)."""


@dataclass(frozen=True)
class LogNumber:
    """Signed real as sign in {-1, 0, +1} plus natural log of |value|."""

    sign: int
    logmag: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")

    @staticmethod
    def zero() -> "LogNumber":
        return LogNumber(0, 0.0)

    @staticmethod
    def from_real(x: float) -> "LogNumber":
        if x == 0.0:
            return LogNumber(0, 0.0)
        return LogNumber(1 if x > 0 else -1, math.log(abs(x)))

    def to_real(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.logmag)

    def __neg__(self) -> "LogNumber":
        return LogNumber(-self.sign, self.logmag)

    def __mul__(self, other: "LogNumber") -> "LogNumber":
        if self.sign == 0 or other.sign == 0:
            return LogNumber.zero()
        return LogNumber(self.sign * other.sign, self.logmag + other.logmag)

    def __add__(self, other: "LogNumber") -> "LogNumber":
        return log_add(self, other)


def log_add(a: LogNumber, b: LogNumber) -> LogNumber:
    """Sum of two LogNumbers, factoring out the larger magnitude.

    Exact cancellation (equal magnitudes, opposite signs) yields sign 0.
    """
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    if b.logmag > a.logmag:
        a, b = b, a
    d = b.logmag - a.logmag  # <= 0
    if a.sign == b.sign:
        return LogNumber(a.sign, a.logmag + math.log1p(math.exp(d)))
    if d == 0.0:
        return LogNumber.zero()
    return LogNumber(a.sign, a.logmag + math.log1p(-math.exp(d)))


@dataclass(frozen=True)
class LogComplex:
    """Complex number as natural log of modulus plus argument."""

    logmag: float
    arg: float

    def to_complex(self) -> complex:
        return cmath.rect(math.exp(self.logmag), self.arg)

    @staticmethod
    def from_complex(z: complex) -> "LogComplex":
        if z == 0:
            return LogComplex(-math.inf, 0.0)
        return LogComplex(math.log(abs(z)), cmath.phase(z))

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex(self.logmag + other.logmag, self.arg + other.arg)


_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ScaledMatrix:
    """2x2 complex matrix ``m * 2**exp2``.

    ``logdet`` optionally carries the log-determinant of the represented
    matrix accumulated multiplicatively through products.  Transfer factors
    are unimodular by construction (tr(J H) = 0), so products of them keep
    an exact determinant that a direct entry-wise evaluation would lose to
    cancellation once ``exp2`` is large.
    """

    m: np.ndarray
    exp2: int = 0
    logdet: LogComplex | None = field(default=None, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.m, dtype=complex)
        if arr.shape != (2, 2):
            raise ValueError("ScaledMatrix needs a 2x2 matrix")
        object.__setattr__(self, "m", arr)

    @staticmethod
    def identity() -> "ScaledMatrix":
        return ScaledMatrix(np.eye(2, dtype=complex), 0, LogComplex(0.0, 0.0))

    @staticmethod
    def from_matrix(m, exp2: int = 0) -> "ScaledMatrix":
        return ScaledMatrix(np.asarray(m, dtype=complex), exp2).normalize()

    def normalize(self) -> "ScaledMatrix":
        """Rescale so the largest entry magnitude lies in [1, 2)."""
        big = float(np.max(np.abs(self.m)))
        if big == 0.0:
            return self
        k = math.frexp(big)[1] - 1  # floor(log2(big))
        if k == 0:
            return self
        e = self.exp2 + k
        if abs(e) > 2**62:
            raise ScaleOverflowError("binary exponent out of range")
        return ScaledMatrix(self.m * 2.0**-k, e, self.logdet)

    def to_matrix(self) -> np.ndarray:
        """Native-range matrix; overflows for large exp2 by design."""
        return self.m * 2.0**self.exp2

    def log_norm(self) -> float:
        """Natural log of the max-entry magnitude of the represented matrix."""
        big = float(np.max(np.abs(self.m)))
        if big == 0.0:
            return -math.inf
        return math.log(big) + self.exp2 * _LN2

    def entry_logcomplex(self, i: int, j: int) -> LogComplex:
        v = self.m[i, j]
        if v == 0:
            return LogComplex(-math.inf, 0.0)
        return LogComplex(math.log(abs(v)) + self.exp2 * _LN2, cmath.phase(v))


def mat_mul(a: ScaledMatrix, b: ScaledMatrix) -> ScaledMatrix:
    ld = None
    if a.logdet is not None and b.logdet is not None:
        ld = a.logdet * b.logdet
    return ScaledMatrix(a.m @ b.m, a.exp2 + b.exp2, ld).normalize()


def scaled_det(a: ScaledMatrix) -> LogComplex:
    """Determinant of the represented matrix, in log form.

    Uses the multiplicatively tracked value when present; a direct entry
    evaluation cancels catastrophically once exp2 is large.
    """
    if a.logdet is not None:
        return a.logdet
    d = a.m[0, 0] * a.m[1, 1] - a.m[0, 1] * a.m[1, 0]
    if d == 0:
        return LogComplex(-math.inf, 0.0)
    return LogComplex(math.log(abs(d)) + 2.0 * a.exp2 * _LN2, cmath.phase(d))
