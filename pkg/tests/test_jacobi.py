import math

import numpy as np
import pytest

from canonsys.jacobi import (JacobiMatrix, berezanskii_log_deltas, birth_death,
                             convergence_exponent, jacobi_to_hamiltonian,
                             polys_at, polys_at_zero_log, theorem4_log_deltas,
                             theorem4_residual)


def mild_random_jacobi(seed, n):
    rng = np.random.default_rng(seed)
    q = rng.uniform(-0.5, 0.5, n)
    rho = rng.uniform(0.8, 1.25, n)
    return JacobiMatrix(q=q, rho=rho)


def test_jacobi_matrix_validation():
    with pytest.raises(ValueError):
        JacobiMatrix(q=[0.0, 0.0], rho=[1.0])
    with pytest.raises(ValueError):
        JacobiMatrix(q=[0.0], rho=[-1.0])
    jm = JacobiMatrix(generator=lambda j: (0.0, -float(j)))
    with pytest.raises(ValueError):
        jm.ensure(1)


def test_json_round_trip():
    jm = mild_random_jacobi(0, 10)
    doc = jm.to_json_dict()
    jm2 = JacobiMatrix.from_json_dict(doc)
    assert np.allclose(jm2.q_values(10), jm.q_values(10))
    assert np.allclose(jm2.rho_values(10), jm.rho_values(10))


def test_polys_recurrence_and_seeds():
    jm = mild_random_jacobi(1, 20)
    z = 0.7 - 0.2j
    P, Q = polys_at(jm, z, 20)
    q = jm.q_values(20)
    rho = jm.rho_values(20)
    assert P[0] == 1.0 and Q[0] == 0.0
    assert Q[1] == pytest.approx(1.0 / rho[0])
    assert P[1] == pytest.approx((z - q[0]) / rho[0])
    # recurrence residual: z Y_k = rho_{k-1} Y_{k-1} + q_k Y_k + rho_k Y_{k+1}
    for Y in (P, Q):
        for k in range(1, 19):
            lhs = z * Y[k]
            rhs = rho[k - 1] * Y[k - 1] + q[k] * Y[k] + rho[k] * Y[k + 1]
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_wronskian_constant_relative():
    jm = mild_random_jacobi(2, 400)
    P, Q = polys_at(jm, 1.5j, 400)
    rho = jm.rho_values(400)
    for j in range(1, 400):
        w = rho[j - 1] * (P[j] * Q[j - 1] - P[j - 1] * Q[j])
        scale = abs(rho[j - 1]) * (abs(P[j] * Q[j - 1]) + abs(P[j - 1] * Q[j]))
        assert abs(w - (-1.0)) <= 1e-12 * max(1.0, scale)


def test_polys_at_zero_log_matches_direct():
    jm = mild_random_jacobi(3, 60)
    P, Q = polys_at(jm, 0.0, 60)
    sP, lP, sQ, lQ = polys_at_zero_log(jm, 60)
    for k in range(60):
        pv = sP[k] * math.exp(lP[k]) if sP[k] != 0 else 0.0
        qv = sQ[k] * math.exp(lQ[k]) if sQ[k] != 0 else 0.0
        assert pv == pytest.approx(P[k].real, rel=1e-10, abs=1e-12)
        assert qv == pytest.approx(Q[k].real, rel=1e-10, abs=1e-12)


def test_free_jacobi_deltas_are_one():
    # q = 0, rho = 1: deltas alternate between P and Q carrying the mass,
    # always with delta_n = 1
    jm = JacobiMatrix(generator=lambda j: (0.0, 1.0))
    ld = theorem4_log_deltas(jm, 50)
    assert np.allclose(ld, 0.0, atol=1e-14)


def test_berezanskii_hand_values():
    # rho_j = 2^j: delta_1 = 1, delta_2 = 1/rho_1^2 = 1/4,
    # delta_3 = (rho_1/rho_2)^2 = 1/4, delta_4 = (rho_2/(rho_1 rho_3))^2 = 1/16
    rho = [2.0**j for j in range(1, 10)]
    ld = berezanskii_log_deltas(rho, 4)
    assert np.allclose(np.exp(ld), [1.0, 0.25, 0.25, 1.0 / 16.0], rtol=1e-12)


@pytest.mark.parametrize("rho_rule", [lambda j: 2.0**j, lambda j: float(j**2)])
def test_berezanskii_matches_theorem4_for_q_zero(rho_rule):
    n = 30
    jm = JacobiMatrix(generator=lambda j: (0.0, rho_rule(j)))
    want = theorem4_log_deltas(jm, n)
    got = berezanskii_log_deltas([rho_rule(j) for j in range(1, n + 1)], n)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-10)


def test_jacobi_to_hamiltonian_round_trip_residual():
    jm = mild_random_jacobi(4, 80)
    H = jacobi_to_hamiltonian(jm, 80)
    assert len(H.segments) == 80
    assert theorem4_residual(jm, H) < 1e-12


def test_jacobi_to_hamiltonian_first_segment():
    jm = mild_random_jacobi(5, 10)
    H = jacobi_to_hamiltonian(jm, 10)
    # P_1 = 1, Q_1 = 0: delta_1 = 1, phi_1 = 0
    assert H.segments[0].delta == pytest.approx(1.0)
    assert H.segments[0].kind.phi == pytest.approx(0.0, abs=1e-14)


def test_jacobi_to_hamiltonian_truncates_on_underflow():
    # rho ~ 3^j makes delta decay doubly fast; underflow before n = 2000
    jm = JacobiMatrix(generator=lambda j: (0.0, 3.0**min(j, 500)))
    with pytest.warns(UserWarning, match="underflow"):
        H = jacobi_to_hamiltonian(jm, 2000)
    assert len(H.segments) < 2000


def test_birth_death_rates_hand_check():
    A = (-0.25, 0.0, 0.0, 0.25)
    B = (0.25, 0.5, 0.5, 0.75)
    jm = birth_death(A, B)
    lam0 = 0.25 * 0.5 * 0.5 * 0.75
    mu1 = 0.75 * 1.0 * 1.0 * 1.25
    assert jm.q_values(1)[0] == pytest.approx(lam0)  # mu_0 = 0
    assert jm.rho_values(1)[0] == pytest.approx(math.sqrt(lam0 * mu1))
    lam1 = 1.25 * 1.5 * 1.5 * 1.75
    assert jm.q_values(2)[1] == pytest.approx(lam1 + mu1)


def test_birth_death_rejects_zero_rate():
    jm = birth_death((0.0,), (0.0,))
    with pytest.raises(ValueError, match="nonpositive"):
        jm.ensure(1)
    with pytest.raises(ValueError):
        birth_death((0.0,), (1.0, 2.0))


def test_convergence_exponent_power_sequence():
    # seq_j = j^D  ->  exponent 1/D
    for D in (2.0, 4.0):
        seq = [j**D for j in range(1, 4001)]
        est = convergence_exponent(seq, 4000)
        assert est.value == pytest.approx(1.0 / D, abs=1e-6)
    with pytest.raises(ValueError):
        convergence_exponent([1.0, 2.0, 1.5, 1.2], 4)
