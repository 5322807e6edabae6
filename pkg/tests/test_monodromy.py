import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from canonsys import monodromy
from canonsys.model import (ConstantMatrix, FiniteRankHamiltonian, RankOne,
                            Segment, StringSpec, rank_one_segment,
                            string_to_hamiltonian)
from canonsys.monodromy import (breakpoint_matrices, det_residual,
                                energy_identity_residual, monodromy_eval,
                                monodromy_poly)

J = np.array([[0.0, -1.0], [1.0, 0.0]])


def brute_product(H, z):
    """Unscaled oracle: per-segment matrix exponentials via eigendecomposition."""
    out = np.eye(2, dtype=complex)
    for seg in H.segments:
        h = seg.kind.matrix().astype(complex)
        A = -z * (J @ h) * seg.delta
        if isinstance(seg.kind, RankOne):
            # A is nilpotent (J P_phi squares to zero), so expm is exact
            E = np.eye(2) + A
        else:
            # generic diagonalizable 2x2: eigendecomposition expm
            w, V = np.linalg.eig(A)
            E = V @ np.diag(np.exp(w)) @ np.linalg.inv(V)
        out = E @ out
    return out


def test_single_rank_one_hand_value():
    # phi = 0: factor is [[1, 0], [-z delta, 1]]
    H = FiniteRankHamiltonian([rank_one_segment(1.0, 0.0)])
    m = monodromy_eval(H, 1j).to_matrix()
    assert np.allclose(m, np.array([[1.0, 0.0], [-1j, 1.0]]))
    # phi = pi/2: factor is [[1, z delta], [0, 1]]
    H = FiniteRankHamiltonian([rank_one_segment(2.0, math.pi / 2)])
    m = monodromy_eval(H, 0.5j).to_matrix()
    assert np.allclose(m, np.array([[1.0, 1j], [0.0, 1.0]]))


def test_two_segment_hand_product():
    H = string_to_hamiltonian(StringSpec([(1.0, 1), (1.0, 2)]))
    m = monodromy_eval(H, 1j).to_matrix()
    # [[1, i], [0, 1]] @ [[1, 0], [-i, 1]] = [[2, i], [-i, 1]]
    assert np.allclose(m, np.array([[2.0, 1j], [-1j, 1.0]]))


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=1, max_value=8),
       st.floats(min_value=0.1, max_value=5.0),
       st.integers(min_value=0, max_value=10**6))
def test_matches_brute_product(n, tau, seed):
    rng = np.random.default_rng(seed)
    segs = []
    for _ in range(n):
        if rng.random() < 0.7:
            segs.append(rank_one_segment(rng.uniform(0.05, 1.0),
                                         rng.uniform(0, math.pi)))
        else:
            a, b = rng.uniform(0.1, 0.8, 2)
            c = rng.uniform(-1, 1) * math.sqrt(a * b) * 0.9
            h = np.array([[a, c], [c, b]]) / (a + b)
            segs.append(Segment(rng.uniform(0.05, 1.0), ConstantMatrix(h)))
    H = FiniteRankHamiltonian(segs)
    z = tau * 1j
    got = monodromy_eval(H, z).to_matrix()
    want = brute_product(H, z)
    assert np.allclose(got, want, rtol=1e-9, atol=1e-9 * np.abs(want).max())


def test_constant_segment_large_tau_scaling():
    H = FiniteRankHamiltonian(
        [Segment(2.0, ConstantMatrix(np.array([[0.5, 0.0], [0.0, 0.5]])))])
    for tau in (1e3, 1e6):
        m = monodromy_eval(H, 1j * tau)
        # cosh(tau * 2 * 1/2) growth: log||M|| = tau + O(1)
        assert m.log_norm() == pytest.approx(tau, rel=1e-3)
        assert det_residual(m) < 1e-12


def test_z_zero_is_identity():
    rng = np.random.default_rng(2)
    H = FiniteRankHamiltonian(
        [rank_one_segment(d, p) for d, p in
         zip(rng.uniform(0.1, 1, 20), rng.uniform(0, math.pi, 20))])
    m = monodromy_eval(H, 0.0)
    assert np.allclose(m.to_matrix(), np.eye(2))
    assert m.log_norm() == 0.0


def test_breakpoint_matrices_consistency():
    rng = np.random.default_rng(3)
    H = FiniteRankHamiltonian(
        [rank_one_segment(d, p) for d, p in
         zip(rng.uniform(0.1, 1, 10), rng.uniform(0, math.pi, 10))])
    z = 2.0 + 1.5j
    mats = breakpoint_matrices(H, z)
    assert len(mats) == 11
    assert np.allclose(mats[0].to_matrix(), np.eye(2))
    assert np.allclose(mats[-1].to_matrix(), monodromy_eval(H, z).to_matrix())
    assert np.allclose(mats[5].to_matrix(),
                       monodromy_eval(H, z, upto=5).to_matrix())


def test_monodromy_poly_evaluates_to_monodromy():
    rng = np.random.default_rng(4)
    H = FiniteRankHamiltonian(
        [rank_one_segment(d, p) for d, p in
         zip(rng.uniform(0.1, 1, 15), rng.uniform(0, math.pi, 15))])
    poly = monodromy_poly(H)
    assert poly.degree == 15
    for z in (0.5j, 2.0, -1.0 + 3.0j):
        got = poly.eval_matrix(z).to_matrix()
        want = monodromy_eval(H, z).to_matrix()
        assert np.allclose(got, want, rtol=1e-9,
                           atol=1e-9 * np.abs(want).max())


def test_monodromy_poly_coefficients_vs_numpy_convolution():
    rng = np.random.default_rng(5)
    deltas = rng.uniform(0.1, 1, 6)
    phis = rng.uniform(0, math.pi, 6)
    H = FiniteRankHamiltonian(
        [rank_one_segment(d, p) for d, p in zip(deltas, phis)])
    # oracle: polynomial product with explicit numpy coefficient arrays,
    # entry (i, j) coefficient of z^k stored at [k, i, j]
    acc = np.zeros((1, 2, 2))
    acc[0] = np.eye(2)
    for d, p in zip(deltas, phis):
        c, s = math.cos(p), math.sin(p)
        K = d * np.array([[c * s, s * s], [-c * c, -c * s]])
        new = np.zeros((len(acc) + 1, 2, 2))
        new[:-1] += acc
        new[1:] += np.einsum("ab,kbc->kac", K, acc)
        acc = new
    poly = monodromy_poly(H)
    for k in range(len(acc)):
        for i in range(2):
            for j in range(2):
                want = acc[k, i, j]
                got = poly.coeff(i, j, k).to_real()
                assert got == pytest.approx(want, rel=1e-11, abs=1e-13)


def test_monodromy_poly_degree_cap_truncates():
    H = FiniteRankHamiltonian(
        [rank_one_segment(1.0, 0.3 * j) for j in range(5)])
    poly = monodromy_poly(H, degree_cap=2)
    assert poly.truncated
    assert poly.degree <= 2


def test_energy_identity_random_strings():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(20):
        H = FiniteRankHamiltonian(
            [rank_one_segment(d, p) for d, p in
             zip(rng.uniform(0.01, 1, 50), rng.uniform(0, math.pi, 50))])
        worst = max(worst, energy_identity_residual(H, 10j))
    assert worst < 1e-10


def test_det_residual_long_chain_extreme_tau():
    rng = np.random.default_rng(7)
    H = FiniteRankHamiltonian(
        [rank_one_segment(d, p) for d, p in
         zip(rng.uniform(1e-4, 1, 2000), rng.uniform(0, math.pi, 2000))])
    for tau in (1.0, 1e8):
        assert det_residual(monodromy_eval(H, 1j * tau)) < 1e-12
