"""Dense linear-algebra substrate.

Pseudoinverses, the three canonical projectors, numerical rank, and eigenphase
decompositions of unitaries, all governed by a single ``TolerancePolicy``.
Everything here is a thin, contract-checked layer over numpy/scipy
factorizations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotUnitary

__all__ = [
    "TolerancePolicy",
    "DEFAULT_POLICY",
    "UnitaryEigensystem",
    "pseudoinverse",
    "projectors",
    "numerical_rank",
    "unitary_eig",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Tolerances used by every rank / phase / witness comparison.

    rank_cutoff_factor: singular values sigma are counted iff
        sigma > rank_cutoff_factor * max(rows, cols) * sigma_max.
    phase_group_tol: eigenphases closer than this are treated as degenerate.
    witness_equality_tol: relative tolerance for witness-value comparisons.
    """

    rank_cutoff_factor: float = 1e-10
    phase_group_tol: float = 1e-9
    witness_equality_tol: float = 1e-6

    def __post_init__(self) -> None:
        if min(self.rank_cutoff_factor, self.phase_group_tol,
               self.witness_equality_tol) <= 0:
            raise ValueError("all tolerances must be strictly positive")

    def rank_cutoff(self, shape: tuple[int, int], sigma_max: float) -> float:
        return self.rank_cutoff_factor * max(shape) * sigma_max


DEFAULT_POLICY = TolerancePolicy()


def pseudoinverse(M: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse A+ = sum_k (1/sigma_k)|v_k><u_k|."""
    M = np.asarray(M)
    if M.size and not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return np.linalg.pinv(M)


def projectors(M: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY):
    """Orthogonal projectors onto col(M), row(M) and ker(M).

    row(M) is the span of M's conjugated right singular vectors, so
    Pi_row + Pi_ker = I on the domain of M.
    """
    M = np.asarray(M)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    if s.size:
        r = int(np.sum(s > policy.rank_cutoff(M.shape, s[0])))
    else:
        r = 0
    ur = u[:, :r]
    vr = vh[:r, :].conj().T
    pi_col = ur @ ur.conj().T
    pi_row = vr @ vr.conj().T
    pi_ker = np.eye(M.shape[1], dtype=pi_row.dtype) - pi_row
    return pi_col, pi_row, pi_ker


def orthonormal_basis(M: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal basis (columns) of col(M)."""
    M = np.asarray(M)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0:
        return u[:, :0]
    r = int(np.sum(s > policy.rank_cutoff(M.shape, s[0])))
    return u[:, :r]


def kernel_basis(M: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal basis (columns) of ker(M)."""
    M = np.asarray(M)
    u, s, vh = np.linalg.svd(M, full_matrices=True)
    if s.size:
        r = int(np.sum(s > policy.rank_cutoff(M.shape, s[0])))
    else:
        r = 0
    return vh[r:, :].conj().T


def numerical_rank(M: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY) -> int:
    """Count of singular values above the policy cutoff."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > policy.rank_cutoff(M.shape, s[0])))


def _wrap_phase(theta: np.ndarray) -> np.ndarray:
    """Map angles into (-pi, pi], with -pi sent to +pi."""
    out = np.mod(np.asarray(theta) + np.pi, 2 * np.pi) - np.pi
    # only the exact branch point moves; nearby phases are genuine values
    return np.where(np.isclose(out, -np.pi, rtol=0.0, atol=1e-12),
                    np.pi, out)


@dataclass(frozen=True)
class UnitaryEigensystem:
    """Eigenphases (sorted ascending, in (-pi, pi]) and orthonormal eigenvectors.

    ``groups`` lists index ranges of phases considered degenerate under the
    policy's phase_group_tol; projectors onto grouped eigenspaces are exact
    sums of v v^dagger within a group.
    """

    phases: np.ndarray
    vectors: np.ndarray  # column j is the eigenvector for phases[j]
    groups: tuple[tuple[int, int], ...]

    def projector_abs_leq(self, theta: float, strict: bool = False) -> np.ndarray:
        """Projector onto eigenspaces with |phase| <= theta (or < theta)."""
        if strict:
            mask = np.abs(self.phases) < theta
        else:
            mask = np.abs(self.phases) <= theta + 1e-12
        v = self.vectors[:, mask]
        return v @ v.conj().T

    def mass_abs_leq(self, psi: np.ndarray, theta: float) -> float:
        """||Pi_Theta psi||^2 for Pi over |phase| <= theta."""
        mask = np.abs(self.phases) <= theta + 1e-12
        amps = self.vectors[:, mask].conj().T @ psi
        return float(np.sum(np.abs(amps) ** 2))

    def zero_projector(self, policy: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
        return self.projector_abs_leq(policy.phase_group_tol)


def unitary_eig(U: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY) -> UnitaryEigensystem:
    """Eigendecomposition of a unitary with orthonormal eigenvectors.

    Uses the complex Schur factorization: for a normal matrix the Schur form is
    diagonal and the Schur vectors are an orthonormal eigenbasis, which keeps
    degenerate eigenspaces well-conditioned.
    """
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    if U.shape[0] != U.shape[1] or np.linalg.norm(U.conj().T @ U - np.eye(n)) > 1e-8:
        raise NotUnitary("matrix is not unitary to 1e-8")
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = _wrap_phase(np.angle(np.diag(T)))
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    vectors = Z[:, order]
    # group near-degenerate phases
    groups: list[tuple[int, int]] = []
    start = 0
    for i in range(1, n + 1):
        if i == n or phases[i] - phases[i - 1] > policy.phase_group_tol:
            groups.append((start, i))
            start = i
    # snap each group's phases to their mean so grouped spaces report one phase
    snapped = phases.copy()
    for a, b in groups:
        snapped[a:b] = np.mean(phases[a:b])
    return UnitaryEigensystem(phases=snapped, vectors=vectors, groups=tuple(groups))
