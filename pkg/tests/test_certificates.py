import math

import numpy as np
import pytest

from canonsys.certificates import (CertificateInstance, builder_power_law,
                                   builder_threshold, builder_two_level,
                                   builder_uniform, evaluate_conditions,
                                   fit_certificate, report_to_csv,
                                   report_to_json)
from canonsys.model import (FiniteRankHamiltonian, power_law_string,
                            rank_one_segment, string_to_hamiltonian)


def small_ham():
    return FiniteRankHamiltonian([rank_one_segment(0.5, 0.2),
                                  rank_one_segment(0.25, 1.1),
                                  rank_one_segment(0.25, 0.7)])


def test_certificate_instance_validation():
    H = small_ham()
    with pytest.raises(ValueError):
        CertificateInstance(10.0, H, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        CertificateInstance(10.0, H, np.array([0.5, 0.5, 1.5]))
    with pytest.raises(ValueError):
        CertificateInstance(10.0, H, np.array([0.5, 0.5, 0.0]))


def test_conditions_exact_approximant_hand_values():
    # approximant identical to H with constant weight a: hand-computable sums
    H = small_ham()
    a = 0.3
    cert = CertificateInstance(10.0, H, np.full(3, a))
    rep = evaluate_conditions(H, cert)
    assert rep.lhs_i == pytest.approx(0.0, abs=1e-14)
    assert rep.lhs_ii == pytest.approx(a * a * 1.0, rel=1e-14)  # total length 1
    want_iii = sum(math.log1p(abs(math.sin(p1 - p2)) / (a * a))
                   for p1, p2 in ((0.2, 1.1), (1.1, 0.7)))
    assert rep.lhs_iii == pytest.approx(want_iii, rel=1e-12)
    assert rep.lhs_iv == pytest.approx(-2.0 * math.log(a), rel=1e-12)


def test_conditions_mismatched_length_rejected():
    H = small_ham()
    G = FiniteRankHamiltonian([rank_one_segment(2.0, 0.0)])
    with pytest.raises(ValueError, match="same interval"):
        evaluate_conditions(H, CertificateInstance(1.0, G, np.array([1.0])))


def test_condition_i_union_partition_oracle():
    # two-segment approximant against a three-segment H; hand integral
    H = FiniteRankHamiltonian([rank_one_segment(0.5, 0.0),
                               rank_one_segment(0.5, 1.0)])
    G = FiniteRankHamiltonian([rank_one_segment(0.25, 0.0),
                               rank_one_segment(0.75, 0.5)])
    a = np.array([0.5, 1.0])
    rep = evaluate_conditions(H, CertificateInstance(4.0, G, a))
    want = (0.25 * abs(math.sin(0.5)) / 1.0**2      # [0.25, 0.5]
            + 0.5 * abs(math.sin(0.5)) / 1.0**2)    # [0.5, 1.0]
    assert rep.lhs_i == pytest.approx(want, rel=1e-12)


def test_builder_power_law_structure():
    s = power_law_string(0.5, 200)
    R = 100.0
    cert = builder_power_law(s, R, 0.6)
    n = len(cert.approx.segments)
    assert n == round(R**0.5) + 1
    assert cert.weights[-1] == 1.0
    assert np.allclose(cert.weights[:-1], R ** ((0.6 - 1.0) / 2.0))
    assert cert.approx.L == pytest.approx(s.L, rel=1e-12)
    # prefix matches the string exactly
    Hs = string_to_hamiltonian(s)
    for j in range(n - 1):
        assert cert.approx.segments[j].delta == pytest.approx(
            Hs.segments[j].delta, rel=1e-14)


def test_builder_threshold_partitions_length():
    rng = np.random.default_rng(0)
    H = FiniteRankHamiltonian(
        [rank_one_segment(d, p) for d, p in
         zip(rng.uniform(1e-4, 0.2, 60), rng.uniform(0, math.pi, 60))])
    cert = builder_threshold(H, 50.0, 0.5)
    assert cert.approx.L == pytest.approx(H.L, rel=1e-12)
    # every kept segment is longer than 1/R
    w_keep = 50.0 ** ((0.5 - 1.0) / 2.0)
    for seg, w in zip(cert.approx.segments, cert.weights):
        if w == w_keep:
            assert seg.delta > 1.0 / 50.0


def test_builder_two_level_validation():
    H = small_ham()
    with pytest.raises(ValueError, match="1 < Delta"):
        builder_two_level(H, 10.0, 0.5, Delta=0.5, D=3.0)
    with pytest.raises(ValueError, match="d > 1/D"):
        builder_two_level(H, 10.0, 0.2, Delta=1.5, D=3.0)


def test_builder_uniform():
    cert = builder_uniform(lambda x: x, 1.0, 10, 0.7)
    assert len(cert.approx.segments) == 10
    assert cert.approx.segments[3].kind.phi == pytest.approx(0.3)
    with pytest.raises(ValueError):
        builder_uniform(lambda x: x, 1.0, 10, 0.0)


def test_fit_certificate_pass_and_fail():
    s = power_law_string(0.5, 2000)
    R_grid = np.geomspace(1e2, 1e5, 13)
    rep = fit_certificate(string_to_hamiltonian(s),
                          lambda R: builder_power_law(s, R, 0.55),
                          R_grid, 0.55)
    assert rep["pass"]
    rep_bad = fit_certificate(string_to_hamiltonian(s),
                              lambda R: builder_power_law(s, R, 0.30),
                              R_grid, 0.30)
    assert not rep_bad["pass"]


def test_fit_certificate_needs_enough_points():
    s = power_law_string(0.5, 50)
    with pytest.raises(ValueError, match="at least 8"):
        fit_certificate(string_to_hamiltonian(s),
                        lambda R: builder_power_law(s, R, 0.6),
                        np.geomspace(10, 100, 4), 0.6)


def test_report_serialization():
    s = power_law_string(0.5, 300)
    R_grid = np.geomspace(1e2, 1e4, 9)
    rep = fit_certificate(string_to_hamiltonian(s),
                          lambda R: builder_power_law(s, R, 0.55),
                          R_grid, 0.55)
    import json

    doc = json.loads(report_to_json(rep))
    assert set(doc) == {"d", "slopes", "pass"}
    csv = report_to_csv(rep).strip().split("\n")
    assert csv[0] == "R,lhs_i,lhs_ii,lhs_iii,lhs_iv"
    assert len(csv) == 10
