"""Monotone phase-estimation algorithms and their span-program counterparts.

A phase-estimation algorithm (U, psi0, delta, T, M) decides an input x by
estimating the squared zero-phase amplitude of U O_x on psi0 (T-step phase
estimation followed by M-step amplitude estimation) and outputting 0 iff the
estimate exceeds delta.  The algorithm is monotone when the zero-phase
component of psi0 is fixed by the oracle, which makes that component an
optimal negative witness of the associated span program.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundViolated,
    MalformedProgram,
    NoZeroEigenmass,
    NotBoundedError,
    NotMonotone,
    NotNormalized,
    NotUnitary,
    TooLarge,
)
from .numerics import DEFAULT_POLICY, TolerancePolicy, pseudoinverse, projectors, unitary_eig
from .qsim import ae_distribution, pe_outcome_zero
from .span_core import (
    SpanProgram,
    all_inputs,
    as_bits,
    check_monotone,
    evaluate,
    input_mask,
    min_error_witness,
    negative_witness,
    promote_tags,
    validate,
)

__all__ = [
    "PhaseEstimationAlgorithm",
    "PEARunReport",
    "oracle",
    "algorithm_unitary",
    "run_pea",
    "is_monotone",
    "grover",
    "pea_to_span",
    "mono_neg_witness",
    "mono_pos_witness",
    "span_to_pea",
    "verify_pe_bounds",
]

# Constant from the bounded-error analysis of delta > 0 algorithms: every
# 0-input has zero-phase mass at least delta * (1 + ZERO_MASS_SLACK_C0).
ZERO_MASS_SLACK_C0 = 1.0 / (3.0 * (1.0 + math.pi))


@dataclass(frozen=True)
class PhaseEstimationAlgorithm:
    """(U, psi0, delta, T, M) with a query-bit label per basis index.

    The Hilbert space is span{|j,z>: j in [n], z in Z} with index
    (j-1)*|Z| + z_index by default; ``labels`` records the bit j driving the
    phase oracle at each basis index, allowing non-product layouts.
    """

    n: int
    workspace_symbols: tuple
    U: np.ndarray
    psi0: np.ndarray
    delta: float
    T: int
    M: int
    labels: tuple | None = None

    @property
    def dim(self) -> int:
        return np.asarray(self.U).shape[0]

    def bit_labels(self) -> tuple:
        if self.labels is not None:
            return self.labels
        nz = len(self.workspace_symbols)
        return tuple(1 + i // nz for i in range(self.dim))


def validate_pea(pea: PhaseEstimationAlgorithm) -> PhaseEstimationAlgorithm:
    U = np.asarray(pea.U, dtype=complex)
    d = U.shape[0]
    if U.shape != (d, d) or np.linalg.norm(U.conj().T @ U - np.eye(d)) > 1e-8:
        raise NotUnitary("U is not unitary to 1e-8")
    psi0 = np.asarray(pea.psi0, dtype=complex).reshape(-1)
    if psi0.shape[0] != d or abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise MalformedProgram("psi0 must be a unit vector on U's space")
    if not (0.0 <= pea.delta < 0.5):
        raise MalformedProgram("delta must lie in [0, 1/2)")
    if pea.T < 1 or pea.M < 1:
        raise MalformedProgram("T and M must be positive")
    if pea.delta > 0 and pea.M * math.sqrt(pea.delta) > 1.0 + 1e-9:
        raise MalformedProgram("M must satisfy M <= 1/sqrt(delta)")
    labels = pea.bit_labels()
    if len(labels) != d or any(not (1 <= j <= pea.n) for j in labels):
        raise MalformedProgram("labels must assign a bit in [n] per basis index")
    return PhaseEstimationAlgorithm(
        n=pea.n, workspace_symbols=tuple(pea.workspace_symbols), U=U,
        psi0=psi0, delta=float(pea.delta), T=int(pea.T), M=int(pea.M),
        labels=labels)


def oracle(pea: PhaseEstimationAlgorithm, x) -> np.ndarray:
    """Diagonal phase oracle (-1)^{x_j} per basis label."""
    bits = as_bits(x, pea.n)
    diag = np.array([-1.0 if bits[j - 1] else 1.0 for j in pea.bit_labels()])
    return np.diag(diag)


def algorithm_unitary(pea: PhaseEstimationAlgorithm, x) -> np.ndarray:
    return np.asarray(pea.U, dtype=complex) @ oracle(pea, x)


@dataclass(frozen=True)
class PEARunReport:
    mass_zero: float         # ||Pi_0(x) psi0||^2
    p_x: float               # Pr[phase estimate 0] with T' steps
    prob_output_zero: float
    output_bit: int


def run_pea(pea: PhaseEstimationAlgorithm, x, T_prime: int | None = None,
            M_prime: int | None = None,
            policy: TolerancePolicy = DEFAULT_POLICY) -> PEARunReport:
    """Exact outcome law of the algorithm run with T' >= T, M' >= M.

    Phase estimation of U O_x on psi0 yields outcome 0 with probability p_x;
    amplitude estimation of sqrt(p_x) outputs 0 iff the estimate exceeds
    delta.
    """
    pea = validate_pea(pea)
    T_prime = pea.T if T_prime is None else T_prime
    M_prime = pea.M if M_prime is None else M_prime
    if T_prime < pea.T or M_prime < pea.M:
        raise MalformedProgram("need T' >= T and M' >= M")
    UO = algorithm_unitary(pea, x)
    eig = unitary_eig(UO, policy)
    mass0 = eig.mass_abs_leq(pea.psi0, policy.phase_group_tol)
    p_x = pe_outcome_zero(UO, pea.psi0, T_prime, policy)
    prob_zero = sum(pr for est, pr in ae_distribution(p_x, M_prime)
                    if est > pea.delta)
    return PEARunReport(mass_zero=mass0, p_x=p_x,
                        prob_output_zero=prob_zero,
                        output_bit=0 if prob_zero >= 0.5 else 1)


def is_monotone(pea: PhaseEstimationAlgorithm, limit: int = 20,
                policy: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """True iff for every x the zero-phase component of psi0 is fixed by O_x."""
    pea = validate_pea(pea)
    for x in all_inputs(pea.n, limit):
        UO = algorithm_unitary(pea, x)
        eig = unitary_eig(UO, policy)
        comp = eig.zero_projector(policy) @ pea.psi0
        if np.linalg.norm(oracle(pea, x) @ comp - comp) > 1e-8:
            return False
    return True


def grover(n: int) -> PhaseEstimationAlgorithm:
    """One-reflection search: psi0 uniform, U the reflection about psi0.

    Decides OR_n one-sidedly with delta = 0, T = ceil(pi sqrt(n)), M = 3.
    """
    if n < 1:
        raise MalformedProgram("n >= 1 required")
    psi0 = np.full(n, 1.0 / math.sqrt(n))
    U = 2.0 * np.outer(psi0, psi0) - np.eye(n)
    return validate_pea(PhaseEstimationAlgorithm(
        n=n, workspace_symbols=(0,), U=U, psi0=psi0, delta=0.0,
        T=math.ceil(math.pi * math.sqrt(n)), M=3))


def pea_to_span(pea: PhaseEstimationAlgorithm) -> SpanProgram:
    """The span program with A = [(I - U^dagger) | I], tau = psi0.

    Columns 0..d-1 (the |j,z> block) are always available; column d+i is
    available iff bit labels[i] is 1.  s(P) = 2 dim H.
    """
    pea = validate_pea(pea)
    d = pea.dim
    U = np.asarray(pea.U, dtype=complex)
    A = np.concatenate([np.eye(d) - U.conj().T, np.eye(d)], axis=1)
    tags = tuple(["true"] * d) + tuple((j, 1) for j in pea.bit_labels())
    return validate(SpanProgram(n=pea.n, tags=tags, A=A, tau=pea.psi0,
                                field_tag="complex"))


def mono_neg_witness(pea: PhaseEstimationAlgorithm, x,
                     policy: TolerancePolicy = DEFAULT_POLICY):
    """Optimal negative witness Pi_0(x) psi0 / ||Pi_0(x) psi0||^2.

    Its value is exactly 1 / ||Pi_0(x) psi0||^2.
    """
    pea = validate_pea(pea)
    UO = algorithm_unitary(pea, x)
    eig = unitary_eig(UO, policy)
    comp = eig.zero_projector(policy) @ pea.psi0
    mass = float(np.real(np.vdot(comp, comp)))
    if mass <= 1e-12:
        raise NoZeroEigenmass(f"Pi_0({x!r}) psi0 = 0")
    omega = comp / mass
    return omega, 1.0 / mass


def mono_pos_witness(pea: PhaseEstimationAlgorithm, x, Theta: float,
                     policy: TolerancePolicy = DEFAULT_POLICY):
    """Approximate positive witness with error <= ||Pi_Theta(x) psi0||^2 and
    norm^2 <= 5 pi^2 / (4 Theta^2); returns (w, norm^2, error)."""
    if not (0.0 < Theta < math.pi):
        raise MalformedProgram("Theta must lie in (0, pi)")
    pea = validate_pea(pea)
    UO = algorithm_unitary(pea, x)
    eig = unitary_eig(UO, policy)
    pi_theta = eig.projector_abs_leq(Theta)
    rest = pea.psi0 - pi_theta @ pea.psi0
    v = pseudoinverse(np.eye(pea.dim) - UO.conj().T) @ rest
    top = pea.psi0 - (np.eye(pea.dim) - np.asarray(pea.U).conj().T) @ v
    w = np.concatenate([v, top])
    P = pea_to_span(pea)
    mask = input_mask(P, x)
    err = float(np.sum(np.abs(w[~mask]) ** 2))
    return w, float(np.real(np.vdot(w, w))), err


def span_to_pea(P: SpanProgram,
                policy: TolerancePolicy = DEFAULT_POLICY):
    """Monotone normalized span program -> phase-estimation algorithm.

    U = 2 Pi_row(A) - I on H, psi0 = A+ tau; true/false columns are folded
    into extra always-1 / always-0 input bits so every column carries a
    (j,1) tag and the phase oracle coincides with the H(x) reflection.
    Returns (pea, fixed_suffix).
    """
    P = validate(P)
    if not check_monotone(P):
        raise NotMonotone("program has a (j,0) column")
    w0 = pseudoinverse(P.A) @ P.tau
    if abs(float(np.real(np.vdot(w0, w0))) - 1.0) > 1e-8:
        raise NotNormalized("span_to_pea requires ||A+ tau|| = 1")
    Pp, suffix = promote_tags(P)
    _, pi_row, _ = projectors(Pp.A, policy)
    U = 2.0 * pi_row - np.eye(Pp.size, dtype=complex)
    labels = tuple(t[0] for t in Pp.tags)
    # witness sizes over the (small) promoted domain drive the parameters
    W_minus = 1.0
    W_hat = 1.0
    for x in all_inputs(Pp.n):
        if evaluate(Pp, x, policy) == "rejected":
            W_minus = max(W_minus, negative_witness(Pp, x, policy)[1])
        else:
            w, _err = min_error_witness(Pp, x, policy)
            W_hat = max(W_hat, float(np.real(np.vdot(w, w))))
    Theta = 1.0 / (2.0 * math.sqrt(W_hat * W_minus))
    M = math.ceil(math.sqrt(3.0 * W_minus)) + 1
    T = math.ceil(max(20.0, 2.0 * M * M) / Theta)
    pea = validate_pea(PhaseEstimationAlgorithm(
        n=Pp.n, workspace_symbols=(0,), U=U, psi0=w0.astype(complex),
        delta=0.0, T=T, M=M, labels=labels))
    return pea, suffix


@dataclass(frozen=True)
class PEBoundsReport:
    zero_input_masses: dict
    one_input_masses: dict
    one_sided: bool


def verify_pe_bounds(pea: PhaseEstimationAlgorithm, f, d: float = 0.5,
                     policy: TolerancePolicy = DEFAULT_POLICY) -> PEBoundsReport:
    """Certify the eigenspace-mass consequences of bounded error.

    After an empirical bounded-error check at (T', M') in
    {(T, M), (2T, 2M)} (doubling M without also doubling T can sharpen
    amplitude estimation beyond what the phase-estimation leakage supports,
    so the parameters are scaled together): every 0-input has zero-phase
    mass >= 1/M^2 (and
    >= delta (1 + c0) when delta > 0); every 1-input has mass at most
    delta / (1 - d^2 pi^2 / 8) below phase d pi / T (exactly 0 when
    delta = 0).
    """
    pea = validate_pea(pea)
    if not (0.0 < d < math.sqrt(8.0) / math.pi):
        raise MalformedProgram("need 0 < d < sqrt(8)/pi")
    table = {as_bits(x, pea.n): int(v) for x, v in f.items()}
    for x, v in table.items():
        for tp, mp in ((pea.T, pea.M), (2 * pea.T, 2 * pea.M)):
            rep = run_pea(pea, x, tp, mp, policy)
            prob = rep.prob_output_zero if v == 0 else 1.0 - rep.prob_output_zero
            if prob < 2.0 / 3.0 - 1e-9:
                raise NotBoundedError(
                    f"Pr[output {v}] = {prob:.3f} < 2/3 at x={x}, "
                    f"T'={tp}, M'={mp}")
    zero_masses, one_masses = {}, {}
    one_sided = True
    for x, v in table.items():
        UO = algorithm_unitary(pea, x)
        eig = unitary_eig(UO, policy)
        if v == 0:
            mass = eig.mass_abs_leq(pea.psi0, policy.phase_group_tol)
            zero_masses[x] = mass
            if mass < 1.0 / pea.M ** 2 - 1e-8:
                raise BoundViolated(
                    f"zero-phase mass {mass:.3g} < 1/M^2 at x={x}")
            if pea.delta > 0 and mass < pea.delta * (1.0 + ZERO_MASS_SLACK_C0) - 1e-8:
                raise BoundViolated(
                    f"zero-phase mass {mass:.3g} < delta(1+c0) at x={x}")
        else:
            mass = eig.mass_abs_leq(pea.psi0, d * math.pi / pea.T)
            one_masses[x] = mass
            if pea.delta == 0.0:
                if mass > 1e-8:
                    raise BoundViolated(
                        f"low-phase mass {mass:.3g} nonzero at 1-input x={x}")
            else:
                cap = pea.delta / (1.0 - d * d * math.pi ** 2 / 8.0)
                if mass > cap + 1e-8:
                    raise BoundViolated(
                        f"low-phase mass {mass:.3g} > {cap:.3g} at x={x}")
                one_sided = False
    return PEBoundsReport(zero_input_masses=zero_masses,
                          one_input_masses=one_masses,
                          one_sided=one_sided and pea.delta == 0.0)
