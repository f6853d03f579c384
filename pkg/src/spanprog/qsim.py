"""Exact spectral simulation of the phase-estimation decider.

Compiles a span program into the two-reflection unitary
U(P,x) = (2 Pi_ker(A) - I)(2 Pi_H(x) - I) and simulates T-step phase
estimation and M-step amplitude estimation in closed form from the
eigendecomposition — no gate-level state evolution, so the outcome laws are
exact and can be asserted against the analytic formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import span_core
from .errors import (
    KappaTooLarge,
    NotApproximating,
    NotNormalized,
    PreconditionViolated,
    SupportViolation,
)
from .numerics import DEFAULT_POLICY, TolerancePolicy, pseudoinverse, projectors, unitary_eig
from .span_core import SpanProgram, complexity_report, input_mask, normalize

__all__ = [
    "span_unitary",
    "pe_distribution",
    "pe_zero_bound_check",
    "ae_distribution",
    "CompiledDecider",
    "compile_program",
    "decide",
    "esg_check",
]

# Constants for the exact decider simulation: phase estimation runs
# ceil(PE_STEPS_FACTOR / Theta) steps (kernel tail pi^2/(T Theta)^2 < Delta/2)
# and amplitude estimation ceil(AE_STEPS_FACTOR / Delta) steps.
PE_STEPS_FACTOR = 20.0
AE_STEPS_FACTOR = 20.0


def span_unitary(P: SpanProgram, x,
                 policy: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """U(P,x) = (2 Pi_ker(A) - I)(2 Pi_H(x) - I), acting on H."""
    _, _, pi_ker = projectors(P.A, policy)
    s = P.size
    mask = input_mask(P, x).astype(float)
    refl_ker = 2.0 * pi_ker - np.eye(s, dtype=pi_ker.dtype)
    refl_hx = np.diag(2.0 * mask - 1.0)
    return refl_ker @ refl_hx


def _kernel(phi: float, T: int) -> float:
    """|T^-1 sum_t e^{i t phi}|^2, the Fejer-type phase-estimation kernel."""
    half = 0.5 * phi
    s = math.sin(half)
    if abs(s) < 1e-12:
        return 1.0
    return (math.sin(T * half) / (T * s)) ** 2


def pe_distribution(U: np.ndarray, psi: np.ndarray, T: int,
                    policy: TolerancePolicy = DEFAULT_POLICY) -> dict[int, float]:
    """Exact T-step phase-estimation outcome law.

    Pr[m] = sum_j |<lambda_j|psi>|^2 |T^-1 sum_t e^{it(theta_j - 2 pi m / T)}|^2.
    """
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise NotNormalized("psi must be a unit vector")
    if T < 1:
        raise PreconditionViolated("T >= 1 required")
    eig = unitary_eig(U, policy)
    weights = np.abs(eig.vectors.conj().T @ psi) ** 2
    out = {}
    for m in range(T):
        pr = 0.0
        for wj, theta in zip(weights, eig.phases):
            if wj < 1e-16:
                continue
            pr += wj * _kernel(theta - 2.0 * math.pi * m / T, T)
        out[m] = pr
    return out


def pe_outcome_zero(U: np.ndarray, psi: np.ndarray, T: int,
                    policy: TolerancePolicy = DEFAULT_POLICY) -> float:
    """Pr[outcome 0] of T-step phase estimation (closed form, no loop over m)."""
    psi = np.asarray(psi, dtype=complex)
    eig = unitary_eig(U, policy)
    weights = np.abs(eig.vectors.conj().T @ psi) ** 2
    return float(sum(w * _kernel(theta, T)
                     for w, theta in zip(weights, eig.phases) if w >= 1e-16))


def pe_zero_bound_check(U: np.ndarray, psi: np.ndarray, T: int,
                        theta_min: float,
                        policy: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """Property test: Pr[0] <= pi / (T theta_min) when all of psi's eigenphase
    support lies in (pi/T, pi]."""
    psi = np.asarray(psi, dtype=complex)
    eig = unitary_eig(U, policy)
    weights = np.abs(eig.vectors.conj().T @ psi) ** 2
    for w, theta in zip(weights, eig.phases):
        if w > 1e-10 and abs(theta) <= math.pi / T + 1e-12:
            raise SupportViolation(
                f"psi overlaps eigenphase {theta:.3g} <= pi/T")
    pr0 = pe_outcome_zero(U, psi, T, policy)
    return pr0 <= math.pi / (T * theta_min) + 1e-10


def ae_distribution(p: float, M: int) -> list[tuple[float, float]]:
    """Exact M-step amplitude-estimation law for squared amplitude p.

    Returns [(estimate, probability)] over the estimate grid sin^2(pi m / M),
    m = 0..floor(M/2), from the two-eigenphase (+-2 theta_x) spectral picture
    with p = sin^2(theta_x).
    """
    if not (0.0 <= p <= 1.0 + 1e-12):
        raise PreconditionViolated("p must lie in [0,1]")
    if M < 1:
        raise PreconditionViolated("M >= 1 required")
    p = min(max(p, 0.0), 1.0)
    theta = math.asin(math.sqrt(p))
    out = []
    for m in range(M // 2 + 1):
        est = math.sin(math.pi * m / M) ** 2
        if m == 0:
            pr = _kernel(2.0 * theta, M)
        elif 2 * m == M:
            pr = _kernel(2.0 * theta - math.pi, M)
        else:
            pr = (_kernel(2.0 * theta - 2.0 * math.pi * m / M, M)
                  + _kernel(2.0 * theta + 2.0 * math.pi * m / M, M))
        out.append((est, pr))
    total = sum(pr for _, pr in out)
    # the two-kernel law is exactly normalized; guard against rounding
    return [(est, pr / total) for est, pr in out]


def ae_tail_above(p: float, M: int, threshold: float) -> float:
    """Pr[estimate > threshold] under the exact amplitude-estimation law."""
    return sum(pr for est, pr in ae_distribution(p, M) if est > threshold)


@dataclass(frozen=True)
class CompiledDecider:
    """Parameters of the phase-estimation decider for a (scaled) program."""

    Theta: float
    q0: float
    q1: float
    Delta: float
    kappa: float
    W_minus: float
    W_hat_plus: float
    repetitions: int
    pe_steps: int
    ae_steps: int
    reported_space: int
    reported_queries: int


def compile_program(P: SpanProgram, f, kappa: float = 0.0,
                    reduce: bool = False, repetitions: int = 15,
                    policy: TolerancePolicy = DEFAULT_POLICY):
    """Normalize P and derive the decider parameters.

    Theta^2 = (1-4k)/(2 What_+ W_-), q0 = 1/W_-, q1 = (1+4k)/(2 W_-),
    Delta = (q0-q1)/2, computed for the normalized program (whose effective
    error is sqrt(kappa)).  Returns (decider, normalized_program).
    """
    report = complexity_report(P, f, kappa, policy)
    if not report.approximates:
        raise NotApproximating(
            f"program does not {kappa}-approximate the table: {report.failures}")
    Pn = normalize(P, w_minus=report.W_minus, policy=policy)
    eff_kappa = math.sqrt(kappa) if kappa > 0 else 0.0
    if eff_kappa >= 0.25:
        if reduce:
            Pn, _ = span_core.reduce_kappa(P, f, kappa, 0.2 ** 2, policy)
            eff_kappa = 0.2
        else:
            raise KappaTooLarge(
                f"effective kappa {eff_kappa:.3g} >= 1/4; pass reduce=True")
    reportn = complexity_report(Pn, f, eff_kappa, policy)
    W_minus = reportn.W_minus
    W_hat = max(reportn.W_hat_plus, 1e-12)
    theta2 = (1.0 - 4.0 * eff_kappa) / (2.0 * W_hat * W_minus)
    Theta = math.sqrt(theta2)
    q0 = 1.0 / W_minus
    q1 = (1.0 + 4.0 * eff_kappa) / (2.0 * W_minus)
    Delta = 0.5 * (q0 - q1)
    if Delta <= 0:
        raise KappaTooLarge("q0 <= q1: no margin to distinguish")
    pe_steps = math.ceil(PE_STEPS_FACTOR / Theta)
    ae_steps = math.ceil(AE_STEPS_FACTOR / Delta)
    k = repetitions
    space = (math.ceil(math.log2(max(Pn.size, 2)))
             + k * math.ceil(math.log2(1.0 / Theta))
             + k * math.ceil(math.log2(1.0 / Delta)) + 3)
    queries = k * pe_steps * ae_steps
    decider = CompiledDecider(
        Theta=Theta, q0=q0, q1=q1, Delta=Delta, kappa=eff_kappa,
        W_minus=W_minus, W_hat_plus=W_hat, repetitions=k,
        pe_steps=pe_steps, ae_steps=ae_steps,
        reported_space=space, reported_queries=queries)
    return decider, Pn


@dataclass(frozen=True)
class DecisionReport:
    output: int
    prob_output: float       # majority-vote probability of the returned bit
    mass_zero: float         # ||Pi_0 w0||^2
    mass_theta: float        # ||Pi_Theta w0||^2
    p_phase: float           # exact Pr[phase-register outcome 0]
    vote_zero: float         # per-shot Pr[estimate > threshold]


def decide(decider: CompiledDecider, P: SpanProgram, x,
           policy: TolerancePolicy = DEFAULT_POLICY) -> DecisionReport:
    """Exact simulation of the decider on input x (P must be the normalized
    program returned by compile_program).

    Output 0 iff a majority of k amplitude-estimation shots place the
    zero-phase amplitude estimate above (q0+q1)/2; ties output 1.
    """
    w0 = pseudoinverse(P.A) @ P.tau
    w0 = w0 / np.linalg.norm(w0)
    U = span_unitary(P, x, policy)
    eig = unitary_eig(U, policy)
    mass_zero = eig.mass_abs_leq(w0, policy.phase_group_tol)
    mass_theta = eig.mass_abs_leq(w0, decider.Theta)
    p_phase = pe_outcome_zero(U, w0, decider.pe_steps, policy)
    threshold = 0.5 * (decider.q0 + decider.q1)
    vote_zero = ae_tail_above(p_phase, decider.ae_steps, threshold)
    k = decider.repetitions
    # majority of k i.i.d. votes; Pr[at least ceil((k+1)/2) vote "0"]
    need = k // 2 + 1
    maj_zero = float(sum(math.comb(k, i) * vote_zero ** i * (1 - vote_zero) ** (k - i)
                         for i in range(need, k + 1)))
    output = 0 if maj_zero > 0.5 else 1
    prob = maj_zero if output == 0 else 1.0 - maj_zero
    return DecisionReport(output=output, prob_output=prob,
                          mass_zero=mass_zero, mass_theta=mass_theta,
                          p_phase=p_phase, vote_zero=vote_zero)


def esg_check(pi_a: np.ndarray, pi_b: np.ndarray, u: np.ndarray,
              theta: float,
              policy: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """Effective spectral gap property: if Pi_A u = 0 then
    ||Pi_Theta Pi_B u|| <= (Theta/2) ||u||, with Pi_Theta from the
    eigenspaces of (2 Pi_A - I)(2 Pi_B - I)."""
    pi_a = np.asarray(pi_a)
    pi_b = np.asarray(pi_b)
    u = np.asarray(u)
    if np.linalg.norm(pi_a @ u) > 1e-8 * max(1.0, np.linalg.norm(u)):
        raise PreconditionViolated("Pi_A u != 0")
    dim = pi_a.shape[0]
    U = (2.0 * pi_a - np.eye(dim)) @ (2.0 * pi_b - np.eye(dim))
    eig = unitary_eig(U, policy)
    mask = np.abs(eig.phases) <= theta + 1e-12
    v = eig.vectors[:, mask]
    lhs = np.linalg.norm(v.conj().T @ (pi_b @ u.astype(complex)))
    return bool(lhs <= 0.5 * theta * np.linalg.norm(u) + 1e-8)
