import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from canonsys.scaledarith import (LogComplex, LogNumber, ScaledMatrix,
                                  log_add, mat_mul, scaled_det)

finite = st.floats(min_value=-1e6, max_value=1e6,
                   allow_nan=False, allow_infinity=False)
nonzero = finite.filter(lambda x: abs(x) > 1e-6)


@given(nonzero)
def test_lognumber_round_trip(x):
    assert LogNumber.from_real(x).to_real() == pytest.approx(x, rel=1e-15)


@given(nonzero, nonzero)
def test_lognumber_mul(a, b):
    got = (LogNumber.from_real(a) * LogNumber.from_real(b)).to_real()
    assert got == pytest.approx(a * b, rel=1e-12)


@given(nonzero, nonzero)
def test_lognumber_add(a, b):
    got = (LogNumber.from_real(a) + LogNumber.from_real(b)).to_real()
    assert got == pytest.approx(a + b, rel=1e-9, abs=1e-9 * (abs(a) + abs(b)))


def test_log_add_exact_cancellation():
    a = LogNumber.from_real(3.25)
    z = log_add(a, -a)
    assert z.sign == 0
    assert z.to_real() == 0.0


def test_lognumber_zero():
    z = LogNumber.zero()
    assert z.to_real() == 0.0
    assert (z * LogNumber.from_real(5.0)).to_real() == 0.0
    assert (z + LogNumber.from_real(5.0)).to_real() == pytest.approx(
        5.0, rel=1e-15)


def test_logcomplex_round_trip_and_mul():
    z1, z2 = 3 - 4j, -0.5 + 2j
    a = LogComplex.from_complex(z1)
    b = LogComplex.from_complex(z2)
    assert a.to_complex() == pytest.approx(z1, rel=1e-14)
    assert (a * b).to_complex() == pytest.approx(z1 * z2, rel=1e-14)


def test_scaled_matrix_round_trip():
    m = np.array([[1.0 + 2j, 3.0], [0.25j, -7.0]])
    sm = ScaledMatrix.from_matrix(m)
    assert np.allclose(sm.to_matrix(), m)


def test_normalize_preserves_value_and_bounds_mantissa():
    m = np.array([[2.0**70, 1.0], [0.0, 2.0**-70]], dtype=complex)
    sm = ScaledMatrix.from_matrix(m).normalize()
    big = np.max(np.abs(sm.m))
    assert 1.0 <= big < 2.0
    assert np.allclose(sm.to_matrix(), m)


def test_mat_mul_matches_numpy():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    got = mat_mul(ScaledMatrix.from_matrix(a), ScaledMatrix.from_matrix(b))
    assert np.allclose(got.to_matrix(), a @ b)


def test_log_norm_tracks_exponent():
    m = np.array([[1.5, 0.0], [0.0, 0.5]], dtype=complex)
    sm = ScaledMatrix(m, 100, None).normalize()
    assert sm.log_norm() == pytest.approx(math.log(1.5) + 100 * math.log(2))


def test_scaled_det_prefers_tracked_value():
    m = np.eye(2, dtype=complex)
    sm = ScaledMatrix(m, 0, LogComplex(0.0, 0.0))
    d = scaled_det(sm)
    assert d.to_complex() == pytest.approx(1.0)


def test_scaled_det_direct_fallback():
    a = np.array([[2.0, 1.0], [1.0, 1.0]], dtype=complex)
    d = scaled_det(ScaledMatrix.from_matrix(a))
    assert d.to_complex() == pytest.approx(1.0, rel=1e-14)
