import math

import numpy as np
import pytest

from spanprog import qsim
from spanprog import span_core as sc
from spanprog.errors import KappaTooLarge
from spanprog.numerics import unitary_eig

DIST_TOLERANCE = 1e-9
SPECTRAL_TOLERANCE = 1e-8


def test_span_unitary_is_unitary_involution_product():
    P = sc.or_program(3)
    for x in sc.all_inputs(3):
        U = qsim.span_unitary(P, x)
        assert np.allclose(U @ U.conj().T, np.eye(U.shape[0]),
                           atol=SPECTRAL_TOLERANCE)


def test_pe_distribution_normalized_and_exact():
    rng = np.random.default_rng(11)
    Q = np.linalg.qr(rng.normal(size=(5, 5))
                     + 1j * rng.normal(size=(5, 5)))[0]
    psi = rng.normal(size=5) + 1j * rng.normal(size=5)
    psi /= np.linalg.norm(psi)
    T = 8
    dist = qsim.pe_distribution(Q, psi, T)
    assert len(dist) == T
    assert sum(dist.values()) == pytest.approx(1.0, abs=DIST_TOLERANCE)
    powers = [np.linalg.matrix_power(Q, t) for t in range(T)]
    for m in range(T):
        v = sum(np.exp(-2j * np.pi * m * t / T) * (powers[t] @ psi)
                for t in range(T)) / T
        assert dist[m] == pytest.approx(float(np.vdot(v, v).real),
                                        abs=DIST_TOLERANCE)


def test_pe_outcome_zero_on_eigenvectors():
    # eigenphase 0 -> certainty; eigenphase theta -> Fejer kernel value
    theta = 0.7
    U = np.diag([1.0, np.exp(1j * theta)])
    T = 10
    assert qsim.pe_outcome_zero(U, np.array([1.0, 0.0]), T) == pytest.approx(
        1.0, abs=DIST_TOLERANCE)
    expected = (math.sin(T * theta / 2) / (T * math.sin(theta / 2))) ** 2
    assert qsim.pe_outcome_zero(U, np.array([0.0, 1.0]), T) == pytest.approx(
        expected, abs=DIST_TOLERANCE)


def test_pe_zero_tail_bound():
    # the tail bound applies when every supported eigenphase exceeds pi/T
    for theta in (0.5, 1.0, 2.0):
        U = np.exp(1j * theta) * np.eye(3)
        psi = np.array([1.0, 0.0, 0.0])
        for T in (5, 9, 16):
            if theta <= math.pi / T + 1e-9:
                continue
            assert qsim.pe_zero_bound_check(U, psi, T, theta)


def test_ae_distribution_is_probability_law():
    for p in (0.0, 0.3, 1.0):
        for M in (2, 5, 8):
            dist = qsim.ae_distribution(p, M)
            total = sum(prob for _, prob in dist)
            assert total == pytest.approx(1.0, abs=1e-9)
            assert all(prob >= -1e-12 for _, prob in dist)
            assert all(0.0 <= est <= 1.0 + 1e-12 for est, _ in dist)
    # p = 0 concentrates on estimate 0
    dist0 = dict(qsim.ae_distribution(0.0, 6))
    assert dist0[0.0] == pytest.approx(1.0, abs=1e-9)


def test_ae_tail_decreases_in_threshold():
    tails = [qsim.ae_tail_above(0.3, 8, t) for t in (0.0, 0.2, 0.5, 0.9)]
    assert all(a >= b - 1e-12 for a, b in zip(tails, tails[1:]))


def test_compile_and_decide_or2():
    P = sc.or_program(2)
    f = {x: int(any(x)) for x in sc.all_inputs(2)}
    decider, Pn = qsim.compile_program(P, f)
    assert decider.q0 > decider.q1
    for x in sc.all_inputs(2):
        rep = qsim.decide(decider, Pn, x)
        assert rep.output == f[x]
        assert rep.prob_output >= 2.0 / 3.0
    x0 = (0, 0)
    rep0 = qsim.decide(decider, Pn, x0)
    assert rep0.mass_zero >= 1.0 / decider.W_minus - SPECTRAL_TOLERANCE


def test_compile_rejects_large_kappa_without_reduce():
    P = sc.or_program(2)
    f = {x: int(any(x)) for x in sc.all_inputs(2)}
    with pytest.raises(KappaTooLarge):
        qsim.compile_program(P, f, kappa=0.3)
    decider, _ = qsim.compile_program(P, f, kappa=0.3, reduce=True)
    assert decider.kappa <= 0.25


def test_effective_spectral_gap_inequality():
    rng = np.random.default_rng(5)
    for _ in range(30):
        dim = int(rng.integers(2, 10))
        qa_ = np.linalg.qr(rng.normal(size=(dim, dim)))[0][:, :dim // 2 + 1]
        qb = np.linalg.qr(rng.normal(size=(dim, dim)))[0][:, :dim // 2 + 1]
        pi_a = qa_ @ qa_.T
        pi_b = qb @ qb.T
        u = rng.normal(size=dim)
        u -= pi_a @ u
        if np.linalg.norm(u) < 1e-10:
            continue
        for theta in (0.2, 1.0):
            assert qsim.esg_check(pi_a, pi_b, u, theta)


def test_decider_mass_matches_eigendecomposition():
    P = sc.or_program(2)
    f = {x: int(any(x)) for x in sc.all_inputs(2)}
    decider, Pn = qsim.compile_program(P, f)
    x = (1, 0)
    U = qsim.span_unitary(Pn, x)
    w0 = sc.pseudoinverse(Pn.A) @ Pn.tau
    w0 = w0 / np.linalg.norm(w0)
    rep = qsim.decide(decider, Pn, x)
    eig = unitary_eig(U)
    assert rep.mass_theta == pytest.approx(
        eig.mass_abs_leq(w0, decider.Theta), abs=SPECTRAL_TOLERANCE)
