"""Span programs: data model, witness solvers, and structural transforms.

A span program is a matrix ``A`` whose columns are labelled by block tags:
``(j, b)`` (available when input bit j equals b), ``"true"`` (always
available) or ``"false"`` (never available), together with a target vector
``tau``.  ``H(x)`` is the span of the available columns; x is accepted iff
tau lies in ``A[:, H(x)]``'s column space.

Witness solvers:
  * positive_witness   - min-norm w on H(x) with A w = tau
  * negative_witness   - min-norm functional omega with <omega|tau> = 1 and
                         omega* A vanishing on H(x), via a null-space
                         parametrization and a one-constraint quadratic
  * min_error_witness  - min ||Pi_{H(x)perp} w||^2 over all A w = tau
                         (ties broken by minimum norm)
  * budget_witness     - min ||w||^2 subject to A w = tau and error <= budget
                         (Lagrange-multiplier bisection)

Transforms: scale (two extra columns, exact witness-size laws), normalize,
tensor_square (symmetrized square), reduce_kappa, realify (complex -> real
with witness sizes preserved).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    AlreadyReal,
    DegenerateTarget,
    InfeasibleBudget,
    MalformedProgram,
    NotAccepted,
    NotApproximating,
    NotNormalized,
    NotRejected,
    TargetUnreachable,
    TooLarge,
)
from .numerics import (
    DEFAULT_POLICY,
    TolerancePolicy,
    kernel_basis,
    orthonormal_basis,
    pseudoinverse,
)

__all__ = [
    "SpanProgram",
    "WitnessReport",
    "ComplexityReport",
    "as_bits",
    "validate",
    "input_mask",
    "evaluate",
    "positive_witness",
    "negative_witness",
    "min_error_witness",
    "budget_witness",
    "complexity_report",
    "scale",
    "normalize",
    "tensor_square",
    "reduce_kappa",
    "realify",
    "check_monotone",
    "or_program",
    "promote_tags",
]

Tag = object  # (j, b) tuple, "true", or "false"

_FEAS_TOL = 1e-8


def as_bits(x, n: int) -> tuple[int, ...]:
    """Canonicalize an input: '010', [0,1,0] and (0,1,0) all map to (0,1,0)."""
    if isinstance(x, str):
        bits = tuple(int(ch) for ch in x)
    else:
        bits = tuple(int(v) for v in x)
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise MalformedProgram(f"input {x!r} is not a length-{n} bit string")
    return bits


def all_inputs(n: int, limit: int = 20) -> Iterable[tuple[int, ...]]:
    if n > limit:
        raise TooLarge(f"exhaustive enumeration over {{0,1}}^{n} refused")
    for k in range(1 << n):
        yield tuple((k >> i) & 1 for i in range(n))


@dataclass(frozen=True)
class SpanProgram:
    """(H, V, tau, A) with a block tag per column of A."""

    n: int
    tags: tuple[Tag, ...]
    A: np.ndarray
    tau: np.ndarray
    field_tag: str = "real"

    @property
    def size(self) -> int:
        """s(P) = dim H = number of columns of A."""
        return self.A.shape[1]

    @property
    def dim_v(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class WitnessReport:
    verdict: str  # "accepted" | "rejected"
    w_plus: float | None
    w_minus: float | None
    witness_vector: np.ndarray
    min_error: float


@dataclass(frozen=True)
class ComplexityReport:
    W_plus: float | None
    W_minus: float
    W_hat_plus: float
    C: float | None
    C_kappa: float
    kappa: float
    approximates: bool
    vacuous_negative: bool = False
    failures: tuple = field(default_factory=tuple)


def _canonical_tag(tag, n: int):
    if tag in ("true", "false"):
        return tag
    try:
        j, b = tag
        j, b = int(j), int(b)
    except (TypeError, ValueError):
        raise MalformedProgram(f"unrecognized tag {tag!r}")
    if not (1 <= j <= n) or b not in (0, 1):
        raise MalformedProgram(f"tag ({j},{b}) invalid for n={n}")
    return (j, b)


def validate(P: SpanProgram) -> SpanProgram:
    """Check all invariants and return a canonicalized copy."""
    if P.n < 0:
        raise MalformedProgram("n must be nonnegative")
    A = np.atleast_2d(np.asarray(P.A))
    tau = np.asarray(P.tau).reshape(-1)
    if P.field_tag not in ("real", "complex"):
        raise MalformedProgram(f"unknown field {P.field_tag!r}")
    dtype = complex if P.field_tag == "complex" else float
    if dtype is float and (np.iscomplexobj(A) or np.iscomplexobj(tau)):
        if np.any(A.imag != 0) or np.any(tau.imag != 0):
            raise MalformedProgram("complex entries in a real-tagged program")
        A, tau = A.real, tau.real
    A = A.astype(dtype)
    tau = tau.astype(dtype)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(tau))):
        raise MalformedProgram("entries must be finite")
    if len(P.tags) != A.shape[1]:
        raise MalformedProgram(
            f"{len(P.tags)} tags for {A.shape[1]} columns")
    if tau.shape[0] != A.shape[0]:
        raise MalformedProgram(
            f"tau length {tau.shape[0]} != rows(A) {A.shape[0]}")
    if np.linalg.norm(tau) == 0.0:
        raise MalformedProgram("tau = 0 makes every witness degenerate")
    tags = tuple(_canonical_tag(t, P.n) for t in P.tags)
    return SpanProgram(n=P.n, tags=tags, A=A, tau=tau, field_tag=P.field_tag)


def input_mask(P: SpanProgram, x) -> np.ndarray:
    """Boolean mask over columns: True iff the column lies in H(x)."""
    bits = as_bits(x, P.n)
    mask = np.zeros(P.size, dtype=bool)
    for i, tag in enumerate(P.tags):
        if tag == "true":
            mask[i] = True
        elif tag == "false":
            mask[i] = False
        else:
            j, b = tag
            mask[i] = bits[j - 1] == b
    return mask


def _accepts(P: SpanProgram, mask: np.ndarray,
             policy: TolerancePolicy) -> bool:
    Ax = P.A[:, mask]
    if Ax.shape[1] == 0:
        return False
    basis = orthonormal_basis(Ax, policy)
    resid = P.tau - basis @ (basis.conj().T @ P.tau)
    return bool(np.linalg.norm(resid) <= _FEAS_TOL * max(1.0, np.linalg.norm(P.tau)))


def evaluate(P: SpanProgram, x, policy: TolerancePolicy = DEFAULT_POLICY) -> str:
    """'accepted' iff tau is in col(A restricted to H(x))."""
    return "accepted" if _accepts(P, input_mask(P, x), policy) else "rejected"


def positive_witness(P: SpanProgram, x,
                     policy: TolerancePolicy = DEFAULT_POLICY):
    """Minimum-norm w supported on H(x) with A w = tau; returns (w, ||w||^2)."""
    mask = input_mask(P, x)
    if not _accepts(P, mask, policy):
        raise NotAccepted(f"input {x!r} is rejected")
    Ax = P.A[:, mask]
    w_sel = pseudoinverse(Ax) @ P.tau
    w = np.zeros(P.size, dtype=P.A.dtype)
    w[mask] = w_sel
    return w, float(np.real(np.vdot(w, w)))


def negative_witness(P: SpanProgram, x,
                     policy: TolerancePolicy = DEFAULT_POLICY):
    """Optimal negative witness: omega with <omega|tau>=1, omega*A|H(x) = 0.

    Parametrizes omega = N c over an orthonormal basis N of col(A Pi_H(x))^perp
    and minimizes the quadratic c* (N*A A*N) c under the single linear
    constraint c*(N*tau) = 1.  Returns (omega, ||omega* A||^2).
    """
    mask = input_mask(P, x)
    if _accepts(P, mask, policy):
        raise NotRejected(f"input {x!r} is accepted")
    Ax = P.A[:, mask]
    dim_v = P.dim_v
    if Ax.shape[1] == 0:
        N = np.eye(dim_v, dtype=P.A.dtype)
    else:
        col = orthonormal_basis(Ax, policy)
        # orthogonal complement of col(Ax) inside V
        full = np.linalg.svd(col, full_matrices=True)[0] if col.shape[1] else None
        if col.shape[1] == 0:
            N = np.eye(dim_v, dtype=P.A.dtype)
        else:
            N = full[:, col.shape[1]:]
    b = N.conj().T @ P.tau
    if np.linalg.norm(b) <= _FEAS_TOL * np.linalg.norm(P.tau):
        raise NotRejected(f"input {x!r}: tau reachable from H(x)")
    B = N.conj().T @ P.A           # (dim N) x s
    G = B @ B.conj().T             # Gram matrix, hermitian psd
    Gp = pseudoinverse(G)
    b_ker = b - G @ (Gp @ b)
    if np.linalg.norm(b_ker) > _FEAS_TOL * np.linalg.norm(b):
        # a feasible direction with omega* A = 0 exists: w_minus = 0
        raise DegenerateTarget(
            "tau has a component outside col(A); zero-cost negative witness")
    denom = np.real(np.vdot(b, Gp @ b))
    c = (Gp @ b) / denom
    omega = N @ c
    value = float(np.real(np.vdot(omega, P.A @ (P.A.conj().T @ omega))))
    return omega, value


def _error_minimizer(P: SpanProgram, mask: np.ndarray,
                     policy: TolerancePolicy):
    """Min-norm minimizer of ||w restricted off H(x)||^2 over A w = tau."""
    w0 = pseudoinverse(P.A) @ P.tau
    if np.linalg.norm(P.A @ w0 - P.tau) > _FEAS_TOL * max(1.0, np.linalg.norm(P.tau)):
        raise TargetUnreachable("tau is not in col(A)")
    K = kernel_basis(P.A, policy)
    comp = ~mask
    if K.shape[1] == 0:
        w = w0
    else:
        C = K[comp, :]
        z = -pseudoinverse(C) @ w0[comp]
        w1 = w0 + K @ z
        # second stage: move along ker(C) directions to minimize ||w||
        Q = kernel_basis(C, policy)
        if Q.shape[1]:
            KQ = K @ Q  # orthonormal columns
            q = -(KQ.conj().T @ w1)
            w = w1 + KQ @ q
        else:
            w = w1
    err = float(np.real(np.sum(np.abs(w[comp]) ** 2)))
    return w, err, w0, K


def min_error_witness(P: SpanProgram, x,
                      policy: TolerancePolicy = DEFAULT_POLICY):
    """(w_hat, min ||Pi_{H(x)perp} w_hat||^2) over all A w_hat = tau."""
    mask = input_mask(P, x)
    w, err, _, _ = _error_minimizer(P, mask, policy)
    return w, err


def budget_witness(P: SpanProgram, x, error_budget: float,
                   policy: TolerancePolicy = DEFAULT_POLICY,
                   iters: int = 60):
    """Min-norm w with A w = tau and ||Pi_{H(x)perp} w||^2 <= error_budget."""
    mask = input_mask(P, x)
    w_err, min_err, w0, K = _error_minimizer(P, mask, policy)
    if error_budget < min_err - _FEAS_TOL:
        raise InfeasibleBudget(
            f"budget {error_budget} below minimum error {min_err}")
    comp = ~mask

    def unconstrained_err(w):
        return float(np.real(np.sum(np.abs(w[comp]) ** 2)))

    if unconstrained_err(w0) <= error_budget + 1e-12:
        return w0, float(np.real(np.vdot(w0, w0)))
    if error_budget <= min_err + 1e-12 or K.shape[1] == 0:
        return w_err, float(np.real(np.vdot(w_err, w_err)))

    def solve(mu: float):
        weights = np.ones(P.size)
        weights[comp] = math.sqrt(1.0 + mu)
        Kw = K * weights[:, None]
        w0w = w0 * weights
        z = -pseudoinverse(Kw) @ w0w
        w = w0 + K @ z
        return w, unconstrained_err(w)

    lo, hi = 0.0, 1.0
    w_hi, err_hi = solve(hi)
    doublings = 0
    while err_hi > error_budget and doublings < iters:
        lo = hi
        hi *= 2.0
        w_hi, err_hi = solve(hi)
        doublings += 1
    best = (w_hi, err_hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        w_mid, err_mid = solve(mid)
        if err_mid <= error_budget:
            hi = mid
            best = (w_mid, err_mid)
        else:
            lo = mid
        if error_budget - best[1] <= _FEAS_TOL and best[1] <= error_budget:
            break
    w = best[0]
    return w, float(np.real(np.vdot(w, w)))


def complexity_report(P: SpanProgram, f: Mapping[tuple, int], kappa: float = 0.0,
                      policy: TolerancePolicy = DEFAULT_POLICY) -> ComplexityReport:
    """Witness sizes over an explicit domain (the keys of ``f``).

    approximates is True iff every 0-input is rejected and every 1-input
    admits an approximate positive witness with error <= kappa / W_minus.
    """
    domain = [as_bits(x, P.n) for x in f]
    zeros = [x for x in domain if not f[x]]
    ones = [x for x in domain if f[x]]
    failures: list[tuple] = []

    w_minus_vals = {}
    for x in zeros:
        if evaluate(P, x, policy) == "accepted":
            failures.append((x, "zero-input accepted"))
            continue
        _, val = negative_witness(P, x, policy)
        w_minus_vals[x] = val
    vacuous = not zeros
    W_minus = max(w_minus_vals.values()) if w_minus_vals else 1.0

    budget = kappa / W_minus
    W_hat_plus = 0.0
    W_plus: float | None = 0.0
    for x in ones:
        try:
            _, norm2 = budget_witness(P, x, budget, policy)
            W_hat_plus = max(W_hat_plus, norm2)
        except (InfeasibleBudget, TargetUnreachable):
            failures.append((x, "one-input has no budgeted witness"))
        if W_plus is not None:
            try:
                _, wp = positive_witness(P, x, policy)
                W_plus = max(W_plus, wp)
            except NotAccepted:
                W_plus = None
    if not ones:
        W_plus = None
        W_hat_plus = float(np.real(np.vdot(pseudoinverse(P.A) @ P.tau,
                                           pseudoinverse(P.A) @ P.tau)))

    approximates = not failures and len(zeros) == len(w_minus_vals)
    C = math.sqrt(W_plus * W_minus) if W_plus else None
    return ComplexityReport(
        W_plus=W_plus, W_minus=W_minus, W_hat_plus=W_hat_plus, C=C,
        C_kappa=math.sqrt(W_hat_plus * W_minus), kappa=kappa,
        approximates=approximates, vacuous_negative=vacuous,
        failures=tuple(failures))


def scale(P: SpanProgram, beta: float) -> SpanProgram:
    """The two-extra-column rescaling with exact witness-size laws.

    Appends a never-available column carrying tau (plus a tuned component s
    on the new target coordinate) and an always-available column reaching
    the new target coordinate at amplitude 1/sqrt(2).  The result satisfies
    ||A+ tau|| = 1, w_plus -> w_plus/beta^2 + 2 and w_minus -> beta^2 w_minus + 1,
    all exactly: the true column forces a fixed cost of 2 on every positive
    witness, the false column adds exactly 1 to every negative witness value,
    and s solves 2 s^2 - 1 = 2 (N/beta^2)(s-1)^2 so the free (tag-blind)
    minimum-norm solution has unit norm.
    """
    if beta <= 0:
        raise MalformedProgram("beta must be positive")
    P = validate(P)
    w0 = pseudoinverse(P.A) @ P.tau
    N = float(np.real(np.vdot(w0, w0)))
    ratio = N / (beta * beta)
    if abs(ratio - 1.0) < 1e-12:
        s_coef = 0.75
    else:
        s_coef = (math.sqrt(2.0 + 2.0 * ratio) - 2.0 * ratio) / (2.0 - 2.0 * ratio)
    rows, cols = P.A.shape
    A = np.zeros((rows + 1, cols + 2), dtype=P.A.dtype)
    A[:rows, :cols] = beta * P.A
    A[:rows, cols] = P.tau                       # the "hat 0" column (false)
    A[rows, cols] = s_coef
    A[rows, cols + 1] = 1.0 / math.sqrt(2.0)     # the "hat 1" column (true)
    tau = np.concatenate([P.tau, [1.0]]).astype(P.A.dtype)
    tags = P.tags + ("false", "true")
    return SpanProgram(n=P.n, tags=tags, A=A, tau=tau, field_tag=P.field_tag)


def negative_size(P: SpanProgram, zeros: Sequence | None = None,
                  policy: TolerancePolicy = DEFAULT_POLICY) -> float:
    """W_minus over the given rejected inputs (default: all rejected x)."""
    if zeros is None:
        zeros = [x for x in all_inputs(P.n)
                 if evaluate(P, x, policy) == "rejected"]
    vals = [negative_witness(P, x, policy)[1] for x in zeros]
    return max(vals) if vals else 1.0


def normalize(P: SpanProgram, w_minus: float | None = None,
              zeros: Sequence | None = None,
              policy: TolerancePolicy = DEFAULT_POLICY) -> SpanProgram:
    """scale with beta = 1/sqrt(W_minus); the result has W_minus <= 2."""
    if w_minus is None:
        w_minus = negative_size(P, zeros, policy)
    return scale(P, 1.0 / math.sqrt(w_minus))


def tensor_square(P: SpanProgram,
                  policy: TolerancePolicy = DEFAULT_POLICY) -> SpanProgram:
    """Symmetrized tensor square: A' = (A (x) A)(I + SWAP)/2, tau' = tau (x) tau.

    Squares the approximation error while squaring witness sizes; requires
    ||A+ tau|| <= 1.
    """
    P = validate(P)
    w0 = pseudoinverse(P.A) @ P.tau
    if float(np.real(np.vdot(w0, w0))) > 1.0 + 1e-8:
        raise NotNormalized("tensor_square requires ||A+ tau||^2 <= 1")
    s = P.size
    cols = []
    tags = []
    for u in range(s):
        Au = P.A[:, u]
        for v in range(s):
            Av = P.A[:, v]
            cols.append(0.5 * (np.kron(Au, Av) + np.kron(Av, Au)))
            tags.append(P.tags[u])
    A = np.stack(cols, axis=1)
    tau = np.kron(P.tau, P.tau)
    return SpanProgram(n=P.n, tags=tuple(tags), A=A, tau=tau,
                       field_tag=P.field_tag)


def reduce_kappa(P: SpanProgram, f: Mapping[tuple, int], kappa: float,
                 kappa_prime: float,
                 policy: TolerancePolicy = DEFAULT_POLICY):
    """Drive the approximation error from kappa down to kappa_prime.

    normalize (error -> sqrt(kappa)) followed by d symmetrized squarings with
    d = max(1, ceil(log2(log(1/k')/log(1/k))) + 1).  Returns (program, d).
    """
    if not (0 < kappa_prime <= kappa < 1):
        raise MalformedProgram("need 0 < kappa' <= kappa < 1")
    report = complexity_report(P, f, kappa, policy)
    if not report.approximates:
        raise NotApproximating(f"program does not {kappa}-approximate f")
    ratio = math.log(1.0 / kappa_prime) / math.log(1.0 / kappa)
    d = max(1, math.ceil(math.log2(ratio)) + 1)
    out = normalize(P, w_minus=report.W_minus, policy=policy)
    for _ in range(d):
        out = tensor_square(out, policy)
    return out, d


def realify(P: SpanProgram) -> SpanProgram:
    """Complex program -> real program of twice the size, witnesses preserved.

    Column k splits into (k,0) = [Re Ak; Im Ak] and (k,1) = [-Im Ak; Re Ak];
    the target becomes [Re tau; Im tau].
    """
    P = validate(P)
    if P.field_tag != "complex":
        raise AlreadyReal("program is already over the reals")
    rows = P.dim_v
    A = np.zeros((2 * rows, 2 * P.size))
    tags = []
    for k in range(P.size):
        col = P.A[:, k]
        A[:rows, 2 * k] = col.real
        A[rows:, 2 * k] = col.imag
        A[:rows, 2 * k + 1] = -col.imag
        A[rows:, 2 * k + 1] = col.real
        tags.extend([P.tags[k], P.tags[k]])
    tau = np.concatenate([P.tau.real, P.tau.imag])
    return SpanProgram(n=P.n, tags=tuple(tags), A=A, tau=tau, field_tag="real")


def check_monotone(P: SpanProgram) -> bool:
    """True iff no column is available only when some bit is 0."""
    return not any(isinstance(t, tuple) and t[1] == 0 for t in P.tags)


def or_program(n: int) -> SpanProgram:
    """Canonical OR_n fixture: A = all-ones row, tags (j,1), tau = [1]."""
    if n < 1:
        raise MalformedProgram("n >= 1 required")
    return validate(SpanProgram(
        n=n, tags=tuple((j, 1) for j in range(1, n + 1)),
        A=np.ones((1, n)), tau=np.array([1.0])))


def promote_tags(P: SpanProgram):
    """Fold true/false tags into extra always-1 / always-0 input bits.

    Returns (P', fixed_suffix): P' has only (j,1) tags; inputs of P' are
    inputs of P extended by fixed_suffix (a 1 for the former true block,
    then a 0 for the former false block, when present).
    """
    P = validate(P)
    has_true = any(t == "true" for t in P.tags)
    has_false = any(t == "false" for t in P.tags)
    n = P.n
    suffix = []
    true_bit = false_bit = None
    if has_true:
        n += 1
        true_bit = n
        suffix.append(1)
    if has_false:
        n += 1
        false_bit = n
        suffix.append(0)
    tags = []
    for t in P.tags:
        if t == "true":
            tags.append((true_bit, 1))
        elif t == "false":
            tags.append((false_bit, 1))
        else:
            tags.append(t)
    out = SpanProgram(n=n, tags=tuple(tags), A=P.A, tau=P.tau,
                      field_tag=P.field_tag)
    return validate(out), tuple(suffix)
