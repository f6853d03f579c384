import numpy as np
import pytest
from hypothesis import assume, given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spanprog.errors import NotUnitary
from spanprog.numerics import (
    DEFAULT_POLICY,
    TolerancePolicy,
    _wrap_phase,
    kernel_basis,
    numerical_rank,
    orthonormal_basis,
    projectors,
    pseudoinverse,
    unitary_eig,
)

PINV_TOLERANCE = 1e-10
PROJECTOR_TOLERANCE = 1e-10
EIG_TOLERANCE = 1e-8

finite_floats = st.floats(min_value=-10.0, max_value=10.0,
                          allow_nan=False, allow_infinity=False)


def matrices(rows, cols):
    return arrays(np.float64, (rows, cols), elements=finite_floats)


@seed(7)
@settings(max_examples=50, deadline=None)
@given(M=matrices(4, 6))
def test_pseudoinverse_moore_penrose_identities(M):
    # the identities are only numerically meaningful away from the rank
    # cutoff; skip matrices whose nonzero spectrum straddles it
    s = np.linalg.svd(M, compute_uv=False)
    assume(s[0] == 0.0 or np.all((s < 1e-9 * s[0]) | (s > 1e-5 * s[0])))
    Mp = pseudoinverse(M)
    # absolute tolerances scale with the magnitudes involved
    tol_m = PINV_TOLERANCE * 100 * (1.0 + np.linalg.norm(M))
    tol_p = PINV_TOLERANCE * 100 * (1.0 + np.linalg.norm(Mp))
    assert np.allclose(M @ Mp @ M, M, atol=tol_m)
    assert np.allclose(Mp @ M @ Mp, Mp, atol=tol_p)
    assert np.allclose((M @ Mp).conj().T, M @ Mp, atol=PINV_TOLERANCE * 100)
    assert np.allclose((Mp @ M).conj().T, Mp @ M, atol=PINV_TOLERANCE * 100)


@seed(7)
@settings(max_examples=50, deadline=None)
@given(M=matrices(5, 3))
def test_projectors_idempotent_and_complementary(M):
    p_col, p_row, p_ker = projectors(M)
    for p in (p_col, p_row, p_ker):
        assert np.allclose(p @ p, p, atol=PROJECTOR_TOLERANCE * 100)
        assert np.allclose(p.conj().T, p, atol=PROJECTOR_TOLERANCE * 100)
    assert np.allclose(p_row + p_ker, np.eye(M.shape[1]),
                       atol=PROJECTOR_TOLERANCE * 100)
    assert np.allclose(p_col @ M, M, atol=PROJECTOR_TOLERANCE * 100)
    assert np.allclose(M @ p_ker, 0.0, atol=PROJECTOR_TOLERANCE * 100)


@seed(7)
@settings(max_examples=30, deadline=None)
@given(M=matrices(4, 4))
def test_kernel_and_row_basis_orthogonal(M):
    K = kernel_basis(M)
    R = orthonormal_basis(M.conj().T)
    if K.shape[1]:
        assert np.allclose(M @ K, 0.0, atol=PROJECTOR_TOLERANCE * 100)
        assert np.allclose(K.conj().T @ K, np.eye(K.shape[1]),
                           atol=PROJECTOR_TOLERANCE * 100)
    assert K.shape[1] + R.shape[1] == 4
    if K.shape[1] and R.shape[1]:
        assert np.allclose(R.conj().T @ K, 0.0, atol=PROJECTOR_TOLERANCE * 100)


def test_numerical_rank_cutoff_is_relative():
    M = np.diag([1.0, 1e-3, 1e-14])
    assert numerical_rank(M) == 2
    assert numerical_rank(1e6 * M) == 2
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_wrap_phase_range_and_boundary():
    assert _wrap_phase(np.pi) == pytest.approx(np.pi)
    assert _wrap_phase(-np.pi) == pytest.approx(np.pi)
    assert _wrap_phase(3 * np.pi) == pytest.approx(np.pi)
    for t in np.linspace(-10, 10, 101):
        w = _wrap_phase(t)
        assert -np.pi < w <= np.pi + 1e-12
        assert abs(np.exp(1j * w) - np.exp(1j * t)) < 1e-12


@seed(7)
@settings(max_examples=25, deadline=None)
@given(M=matrices(5, 5))
def test_unitary_eig_reconstructs(M):
    Q = np.linalg.qr(M + np.eye(5))[0]
    eig = unitary_eig(Q)
    D = np.diag(np.exp(1j * eig.phases))
    assert np.allclose(eig.vectors @ D @ eig.vectors.conj().T, Q,
                       atol=EIG_TOLERANCE)
    assert np.allclose(eig.vectors.conj().T @ eig.vectors, np.eye(5),
                       atol=EIG_TOLERANCE)


def test_unitary_eig_rejects_nonunitary():
    with pytest.raises(NotUnitary):
        unitary_eig(np.ones((3, 3)))


def test_eigenspace_mass_partition():
    rng = np.random.default_rng(3)
    Q = np.linalg.qr(rng.normal(size=(6, 6))
                     + 1j * rng.normal(size=(6, 6)))[0]
    eig = unitary_eig(Q)
    psi = rng.normal(size=6) + 1j * rng.normal(size=6)
    psi /= np.linalg.norm(psi)
    low = eig.mass_abs_leq(psi, 0.5)
    total = eig.mass_abs_leq(psi, np.pi)
    assert 0.0 <= low <= total + EIG_TOLERANCE
    assert total == pytest.approx(1.0, abs=EIG_TOLERANCE)


def test_zero_projector_picks_fixed_space():
    U = np.diag([1.0, -1.0, 1j])
    eig = unitary_eig(U)
    P0 = eig.zero_projector(DEFAULT_POLICY)
    assert np.allclose(P0, np.diag([1.0, 0.0, 0.0]), atol=EIG_TOLERANCE)


def test_policy_override_changes_rank():
    M = np.diag([1.0, 1e-6])
    tight = TolerancePolicy(rank_cutoff_factor=1e-12)
    loose = TolerancePolicy(rank_cutoff_factor=1e-3)
    assert numerical_rank(M, tight) == 2
    assert numerical_rank(M, loose) == 1
