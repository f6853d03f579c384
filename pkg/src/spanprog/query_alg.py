"""Explicit unitary query algorithms and their span-program compilation.

A query algorithm alternates supplied unitaries (odd steps) with the phase
oracle O_x (even steps) on registers (j, z, a) with j in [n] u {0}, workspace
symbol z, and answer bit a; the output is the answer register of the final
state.  ``alg_to_span`` builds the time-indexed span program whose witnesses
are assembled directly from the algorithm's state history.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    MalformedProgram,
    NotBoundedError,
    NotUnitary,
    ZeroRejection,
)
from .numerics import DEFAULT_POLICY, TolerancePolicy
from .span_core import SpanProgram, as_bits, complexity_report, validate

__all__ = [
    "QueryAlgorithm",
    "RunResult",
    "oracle",
    "run",
    "alg_to_span",
    "build_pos_witness",
    "build_neg_witness",
    "verify_conversion",
    "deutsch_algorithm",
    "noisy_deutsch",
    "grover_query_algorithm",
    "unitary_completing",
]


@dataclass(frozen=True)
class QueryAlgorithm:
    n: int
    workspace_symbols: tuple
    T: int
    unitaries: tuple  # U_1, U_3, ..., U_{2T+1}

    @property
    def dim(self) -> int:
        return (self.n + 1) * len(self.workspace_symbols) * 2

    def state_index(self, j: int, zi: int, a: int) -> int:
        return (j * len(self.workspace_symbols) + zi) * 2 + a


def validate_algorithm(alg: QueryAlgorithm) -> QueryAlgorithm:
    if alg.T < 0:
        raise MalformedProgram("T must be nonnegative")
    if len(alg.unitaries) != alg.T + 1:
        raise MalformedProgram(
            f"expected {alg.T + 1} unitaries U_1,U_3,...,U_{{2T+1}}, "
            f"got {len(alg.unitaries)}")
    d = alg.dim
    for i, U in enumerate(alg.unitaries):
        U = np.asarray(U)
        if U.shape != (d, d) or np.linalg.norm(U.conj().T @ U - np.eye(d)) > 1e-8:
            raise NotUnitary(f"unitary #{i} is not a {d}x{d} unitary")
    return alg


@dataclass(frozen=True)
class RunResult:
    states: tuple  # Psi_0 .. Psi_{2T+1}
    p0: float
    output_bit: int


def oracle(alg: QueryAlgorithm, x) -> np.ndarray:
    """Diagonal phase oracle: (-1)^{x_j} on j >= 1, +1 on j = 0."""
    bits = as_bits(x, alg.n)
    nz = len(alg.workspace_symbols)
    diag = np.ones(alg.dim)
    for j in range(1, alg.n + 1):
        if bits[j - 1]:
            lo = j * nz * 2
            diag[lo:lo + nz * 2] = -1.0
    return np.diag(diag)


def run(alg: QueryAlgorithm, x) -> RunResult:
    """Apply U_1, O_x, U_3, ..., O_x, U_{2T+1} to |0,0,0>."""
    O = oracle(alg, x)
    psi = np.zeros(alg.dim, dtype=complex)
    psi[alg.state_index(0, 0, 0)] = 1.0
    states = [psi]
    for t in range(1, 2 * alg.T + 2):
        if t % 2 == 1:
            psi = np.asarray(alg.unitaries[(t - 1) // 2], dtype=complex) @ psi
        else:
            psi = O @ psi
        states.append(psi)
    final = states[-1]
    nz = len(alg.workspace_symbols)
    mask0 = np.array([(i % 2) == 0 for i in range(alg.dim)])
    p0 = float(np.sum(np.abs(final[mask0]) ** 2))
    del nz
    return RunResult(states=tuple(states), p0=p0,
                     output_bit=0 if p0 >= 0.5 else 1)


def _h_index(alg: QueryAlgorithm, t: int, b: int, v: int) -> int:
    return (t * 2 + b) * alg.dim + v


def alg_to_span(alg: QueryAlgorithm, c: float = 5.0,
                policy: TolerancePolicy = DEFAULT_POLICY) -> SpanProgram:
    """The time-indexed span program P_A of the algorithm.

    H is indexed by (t, b, j, z, a) for t in 0..2T+1 and a query-value bit b;
    V by (t, j, z, a).  Odd-step columns with j >= 1 carry tag (j, b); the
    never-available columns (final a=0, and odd-step j=0 with b=1) are tagged
    false; everything else is always available.
    """
    validate_algorithm(alg)
    if alg.T < 1:
        raise MalformedProgram("alg_to_span requires T >= 1")
    T, d = alg.T, alg.dim
    n_t = 2 * T + 2
    dim_h = n_t * 2 * d
    dim_v = n_t * d
    A = np.zeros((dim_v, dim_h), dtype=complex)
    tags: list = [None] * dim_h
    nz = len(alg.workspace_symbols)
    for t in range(n_t):
        for b in (0, 1):
            for v in range(d):
                h = _h_index(alg, t, b, v)
                j = v // (nz * 2)
                a = v % 2
                if t <= 2 * T and t % 2 == 0:
                    A[t * d + v, h] = 1.0
                    A[(t + 1) * d:(t + 2) * d, h] -= np.asarray(
                        alg.unitaries[t // 2], dtype=complex)[:, v]
                    tags[h] = "true"
                elif t <= 2 * T:  # odd: the oracle step
                    A[t * d + v, h] = 1.0
                    A[(t + 1) * d + v, h] = -((-1.0) ** b)
                    if j >= 1:
                        tags[h] = (j, b)
                    else:
                        tags[h] = "true" if b == 0 else "false"
                else:  # t = 2T+1
                    if b == 0 and a == 1:
                        A[t * d + v, h] = 1.0
                    elif b == 0 and a == 0:
                        A[t * d + v, h] = math.sqrt(c * T)
                    # b = 1 columns map to zero
                    tags[h] = "true" if a == 1 else "false"
    tau = np.zeros(dim_v, dtype=complex)
    tau[0 * d + alg.state_index(0, 0, 0)] = 1.0
    return validate(SpanProgram(n=alg.n, tags=tuple(tags), A=A, tau=tau,
                                field_tag="complex"))


def build_pos_witness(alg: QueryAlgorithm, x, c: float = 5.0):
    """The state-history positive witness; returns (w, norm^2, error).

    w places Psi_t on the b = x_j slice for t <= 2T and splits the final
    state into its accepted part and a 1/sqrt(cT)-damped rejecting part;
    the error equals p0(x)/(cT) exactly.
    """
    if alg.T < 1:
        raise MalformedProgram("T >= 1 required")
    bits = as_bits(x, alg.n)
    res = run(alg, x)
    T, d = alg.T, alg.dim
    nz = len(alg.workspace_symbols)
    w = np.zeros((2 * T + 2) * 2 * d, dtype=complex)
    for t in range(2 * T + 1):
        psi = res.states[t]
        for v in range(d):
            j = v // (nz * 2)
            b = bits[j - 1] if j >= 1 else 0
            w[_h_index(alg, t, b, v)] = psi[v]
    final = res.states[2 * T + 1]
    for v in range(d):
        a = v % 2
        h = _h_index(alg, 2 * T + 1, 0, v)
        if a == 1:
            w[h] = final[v]
        else:
            w[h] = final[v] / math.sqrt(c * T)
    norm2 = float(np.real(np.vdot(w, w)))
    error = res.p0 / (c * T)
    return w, norm2, error


def build_neg_witness(alg: QueryAlgorithm, x, c: float = 5.0):
    """The reverse-evolved negative witness; returns (omega_bar, value).

    omega places the backward evolution of the rejecting part of the final
    state at each time step, normalized by p0(x); its value is
    (4 + c) T / p0(x) exactly.
    """
    bits = as_bits(x, alg.n)
    res = run(alg, x)
    if res.p0 <= 1e-14:
        raise ZeroRejection("p0(x) = 0: no rejecting component")
    T, d = alg.T, alg.dim
    O = oracle(alg, bits)
    final = res.states[2 * T + 1].copy()
    final[[i for i in range(d) if i % 2 == 1]] = 0.0  # Pi_0
    back = {2 * T + 1: final}
    psi = final
    for t in range(2 * T, -1, -1):
        # invert the step from t to t+1
        if (t + 1) % 2 == 1:
            U = np.asarray(alg.unitaries[t // 2], dtype=complex)
            psi = U.conj().T @ psi
        else:
            psi = O @ psi
        back[t] = psi
    omega = np.zeros((2 * T + 2) * d, dtype=complex)
    for t in range(2 * T + 2):
        omega[t * d:(t + 1) * d] = back[t]
    omega_bar = omega / res.p0
    return omega_bar, None


def neg_witness_value(alg: QueryAlgorithm, omega_bar: np.ndarray,
                      c: float = 5.0) -> float:
    """||omega_bar^* A||^2 against the program built with the same c."""
    P = alg_to_span(alg, c)
    row = omega_bar.conj() @ P.A
    return float(np.real(np.vdot(row, row)))


@dataclass(frozen=True)
class ConversionReport:
    program: SpanProgram
    one_sided: bool
    kappa: float
    W_minus: float
    W_hat_plus: float
    C_kappa: float
    decides_exactly: bool


def verify_conversion(alg: QueryAlgorithm, f, c: float = 5.0,
                      policy: TolerancePolicy = DEFAULT_POLICY) -> ConversionReport:
    """Check bounded error, convert, and certify the witness-size bounds.

    With c = 5 the converted program 9/10-approximates f (two-sided case)
    with W_- <= 27T/2 and What_+ <= 2T+2, and decides f exactly in the
    one-sided case.
    """
    table = {as_bits(x, alg.n): int(v) for x, v in f.items()}
    p0s = {x: run(alg, x).p0 for x in table}
    one_sided = True
    for x, v in table.items():
        if v == 0 and p0s[x] < 2.0 / 3.0 - 1e-12:
            raise NotBoundedError(f"p0({x}) = {p0s[x]:.3f} < 2/3 on a 0-input")
        if v == 1 and p0s[x] > 1.0 / 3.0 + 1e-12:
            raise NotBoundedError(f"p0({x}) = {p0s[x]:.3f} > 1/3 on a 1-input")
        if v == 1 and p0s[x] > 1e-12:
            one_sided = False
    P = alg_to_span(alg, c, policy)
    kappa = 0.0 if one_sided else 0.9
    report = complexity_report(P, table, kappa, policy)
    if not report.approximates:
        raise NotBoundedError(
            f"converted program fails to {kappa}-approximate: {report.failures}")
    return ConversionReport(
        program=P, one_sided=one_sided, kappa=kappa,
        W_minus=report.W_minus, W_hat_plus=report.W_hat_plus,
        C_kappa=report.C_kappa, decides_exactly=one_sided)


# ---------------------------------------------------------------------------
# fixtures


def unitary_completing(pairs, dim: int) -> np.ndarray:
    """Unitary mapping each given (input, output) pair, completed arbitrarily.

    Inputs must be orthonormal, as must outputs.  The orthogonal complements
    are matched via deterministic Gram-Schmidt against the identity basis.
    """
    ins = np.stack([np.asarray(a, dtype=complex) for a, _ in pairs], axis=1)
    outs = np.stack([np.asarray(b, dtype=complex) for _, b in pairs], axis=1)

    def extend(B):
        cols = [B[:, i] for i in range(B.shape[1])]
        for i in range(dim):
            v = np.zeros(dim, dtype=complex)
            v[i] = 1.0
            for u in cols:
                v = v - u * np.vdot(u, v)
            nrm = np.linalg.norm(v)
            if nrm > 1e-8:
                cols.append(v / nrm)
        return np.stack(cols, axis=1)

    full_in = extend(ins)
    full_out = extend(outs)
    return full_out @ full_in.conj().T


def deutsch_algorithm() -> QueryAlgorithm:
    """One-query parity-of-two-bits algorithm: p0(x) = 1 - (x1 xor x2)."""
    n, Z = 2, (0,)
    dim = (n + 1) * len(Z) * 2
    e = np.eye(dim)
    plus = (e[2] + e[4]) / math.sqrt(2.0)   # (|1> + |2>) |a=0>
    minus = (e[2] - e[4]) / math.sqrt(2.0)
    U1 = unitary_completing([(e[0], plus)], dim)
    U3 = unitary_completing([(plus, e[0]), (minus, e[1])], dim)
    return validate_algorithm(QueryAlgorithm(n=n, workspace_symbols=Z, T=1,
                                             unitaries=(U1, U3)))


def noisy_deutsch(correct_prob: float = 5.0 / 6.0) -> QueryAlgorithm:
    """Two-sided variant: the answer register is rotated so the output is
    correct with the given probability."""
    base = deutsch_algorithm()
    phi = math.acos(math.sqrt(correct_prob))
    R = np.array([[math.cos(phi), -math.sin(phi)],
                  [math.sin(phi), math.cos(phi)]])
    R_full = np.kron(np.eye(base.dim // 2), R)
    U3 = R_full @ np.asarray(base.unitaries[1])
    return validate_algorithm(QueryAlgorithm(
        n=base.n, workspace_symbols=base.workspace_symbols, T=1,
        unitaries=(base.unitaries[0], U3)))


def grover_query_algorithm(n: int = 4) -> QueryAlgorithm:
    """One-iteration search as a query algorithm (answer 0 iff the state
    returns to uniform).  Bounded-error for OR on inputs with |x| <= 3 at
    n = 4 (exact overshoot at x = 1111 is excluded from the domain)."""
    Z = (0,)
    dim = (n + 1) * 2
    e = np.eye(dim)
    u = np.zeros(dim)
    for j in range(1, n + 1):
        u[j * 2] = 1.0 / math.sqrt(n)      # uniform over j>=1, a=0
    U1 = unitary_completing([(e[0], u)], dim)
    # diffusion about the uniform state on the query register (both a slices)
    uq = np.zeros(n + 1)
    uq[1:] = 1.0 / math.sqrt(n)
    D_q = 2.0 * np.outer(uq, uq) - np.eye(n + 1)
    D = np.kron(D_q, np.eye(2))
    # answer extraction: uniform component keeps a=0, the rest flips to a=1
    P_u = np.outer(uq, uq)
    W = np.kron(P_u, np.eye(2)) + np.kron(np.eye(n + 1) - P_u,
                                          np.array([[0.0, 1.0], [1.0, 0.0]]))
    U3 = W @ D
    return validate_algorithm(QueryAlgorithm(n=n, workspace_symbols=Z, T=1,
                                             unitaries=(U1, U3)))
