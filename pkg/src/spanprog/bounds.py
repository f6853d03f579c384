"""Boolean-function analysis and rank-based span-program lower bounds.

Fourier spectra and (approximate) degree of small truth tables, pattern
matrices and their closed-form ranks, rank-measure quantities over rectangle
covers, feasible-solution extraction from span programs, and the certificate
and generalized-assignment bound pipelines.

Bit indexing is little-endian throughout: bit i of an integer encodes input
element i+1, and Fourier characters are indexed by subset bitmasks.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import (
    CoverInvalid,
    MalformedProgram,
    NotACertificate,
    NotApproximating,
    NotCovering,
    TooLarge,
)
from .numerics import DEFAULT_POLICY, TolerancePolicy, numerical_rank
from .span_core import (
    SpanProgram,
    as_bits,
    budget_witness,
    complexity_report,
    negative_witness,
    validate,
)

__all__ = [
    "BooleanFunctionTable",
    "FourierSpectrum",
    "RectangleCover",
    "BoundReport",
    "to_pm1",
    "fourier",
    "degree",
    "approx_degree",
    "pattern_matrix",
    "sherstov_rank",
    "sherstov_eps_rank_lb",
    "eps_rank_interval",
    "rank_measure",
    "approx_rank_measure",
    "lambda_extract",
    "cover_to_function",
    "certificate_bound",
    "assignment_bound",
]

_FOURIER_TOL = 1e-10
_PATTERN_GUARD = 16
_LP_ARITY_GUARD = 14


@dataclass(frozen=True)
class BooleanFunctionTable:
    """Truth table over {0,1}^m in the +-1 convention, z-lexicographic."""

    m: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != 1 << self.m:
            raise MalformedProgram(
                f"expected {1 << self.m} values, got {len(self.values)}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def to_pm1(values01, m: int) -> BooleanFunctionTable:
    """0/1 truth table -> +-1 convention via 1 - 2*bit."""
    vals = tuple(1.0 - 2.0 * float(v) for v in values01)
    return BooleanFunctionTable(m=m, values=vals)


@dataclass(frozen=True)
class FourierSpectrum:
    m: int
    coefficients: np.ndarray  # indexed by subset bitmask

    def coefficient(self, subset_mask: int) -> float:
        return float(self.coefficients[subset_mask])

    def support(self, tol: float = _FOURIER_TOL):
        return [S for S in range(1 << self.m)
                if abs(self.coefficients[S]) > tol]


def _fwht(a: np.ndarray) -> np.ndarray:
    """In-place-style fast Walsh-Hadamard transform (unnormalized)."""
    a = a.copy()
    h = 1
    n = a.shape[0]
    while h < n:
        for i in range(0, n, 2 * h):
            x = a[i:i + h].copy()
            y = a[i + h:i + 2 * h].copy()
            a[i:i + h] = x + y
            a[i + h:i + 2 * h] = x - y
        h *= 2
    return a


def fourier(p: BooleanFunctionTable) -> FourierSpectrum:
    """p_hat(S) = 2^-m sum_z p(z) chi_S(z) with chi_S(z) = (-1)^{|S & z|}."""
    coeffs = _fwht(p.as_array()) / (1 << p.m)
    spec = FourierSpectrum(m=p.m, coefficients=coeffs)
    # Parseval sanity: sum p_hat^2 = 2^-m sum p^2
    lhs = float(np.sum(coeffs ** 2))
    rhs = float(np.mean(p.as_array() ** 2))
    if abs(lhs - rhs) > 1e-10 * max(1.0, rhs):
        raise MalformedProgram("Fourier transform failed Parseval check")
    return spec


def inverse_fourier(spec: FourierSpectrum) -> BooleanFunctionTable:
    vals = _fwht(np.asarray(spec.coefficients, dtype=float))
    return BooleanFunctionTable(m=spec.m, values=tuple(vals))


def degree(p: BooleanFunctionTable) -> int:
    spec = fourier(p)
    supp = spec.support()
    return max((bin(S).count("1") for S in supp), default=0)


def _chi_matrix(m: int, subsets) -> np.ndarray:
    """Matrix [z, k] = chi_{subsets[k]}(z)."""
    zs = np.arange(1 << m)
    cols = []
    for S in subsets:
        signs = (-1.0) ** np.array([bin(z & S).count("1") for z in zs])
        cols.append(signs)
    return np.stack(cols, axis=1)


def _best_lowdeg_error(p: BooleanFunctionTable, d: int) -> float:
    """Minimum sup-norm error of a degree-<=d polynomial approximation (LP)."""
    subsets = [S for S in range(1 << p.m) if bin(S).count("1") <= d]
    chi = _chi_matrix(p.m, subsets)
    nz, nc = chi.shape
    # variables: coefficients (nc) then t; minimize t
    c = np.zeros(nc + 1)
    c[-1] = 1.0
    ones = np.ones((nz, 1))
    A_ub = np.block([[chi, -ones], [-chi, -ones]])
    b_ub = np.concatenate([p.as_array(), -p.as_array()])
    res = scipy.optimize.linprog(c, A_ub=A_ub, b_ub=b_ub,
                                 bounds=[(None, None)] * (nc + 1),
                                 method="highs")
    if not res.success:
        raise MalformedProgram(f"LP failed at degree {d}: {res.message}")
    return float(res.fun)


def approx_degree(p: BooleanFunctionTable, eps: float) -> int:
    """Least d with a degree-d polynomial within eps in sup norm (LP route)."""
    if p.m > _LP_ARITY_GUARD:
        raise TooLarge(f"arity {p.m} exceeds the LP guard {_LP_ARITY_GUARD}")
    if eps < 0:
        raise MalformedProgram("eps must be nonnegative")
    if eps == 0.0:
        return degree(p)
    for d in range(p.m + 1):
        if _best_lowdeg_error(p, d) <= eps + 1e-7:
            return d
    return p.m


def _y_select(y: int, x: tuple, m: int, lam: int) -> int:
    """(y|_x) as an m-bit integer: bit i = y^{(i+1)}_{x_i}."""
    out = 0
    for i in range(m):
        l = x[i] - 1  # x_i in [lam], 1-based
        if (y >> (i * lam + l)) & 1:
            out |= 1 << i
    return out


def pattern_matrix(p: BooleanFunctionTable, lam: int) -> np.ndarray:
    """F[y, (x,w)] = p(y|_x xor w), x-major column order.

    Rows are y in {0,1}^{lam*m} (bit (i)*lam + l of y is y^{(i+1)}_{l+1});
    columns are (x, w) with x in [lam]^m lexicographic-major and w in
    {0,1}^m minor.
    """
    if lam < 1:
        raise MalformedProgram("lambda >= 1 required")
    if p.m * lam > _PATTERN_GUARD:
        raise TooLarge(f"m*lambda = {p.m * lam} exceeds guard {_PATTERN_GUARD}")
    m = p.m
    vals = p.as_array()
    n_rows = 1 << (lam * m)
    xs = list(itertools.product(range(1, lam + 1), repeat=m))
    # x index: sum (x_i - 1) lam^{i-1} -> build in that order
    xs.sort(key=lambda x: sum((x[i] - 1) * lam ** i for i in range(m)))
    F = np.zeros((n_rows, len(xs) << m))
    for xi, x in enumerate(xs):
        for y in range(n_rows):
            base = _y_select(y, x, m, lam)
            for w in range(1 << m):
                F[y, (xi << m) + w] = vals[base ^ w]
    return F


def sherstov_rank(p: BooleanFunctionTable, lam: int) -> int:
    """rank(pattern_matrix(p, lam)) = sum over Fourier support of lam^|S|."""
    spec = fourier(p)
    return int(sum(lam ** bin(S).count("1") for S in spec.support()))


def sherstov_eps_rank_lb(p: BooleanFunctionTable, lam: int, eps: float,
                         delta: float) -> float:
    """delta-rank(F) >= lam^{approx_degree_eps(p)} (eps-delta)^2/(1+delta)^2."""
    if not (0.0 <= delta <= eps <= 1.0):
        raise MalformedProgram("need 0 <= delta <= eps <= 1")
    d = approx_degree(p, eps)
    return (lam ** d) * (eps - delta) ** 2 / (1.0 + delta) ** 2


def eps_rank_interval(M: np.ndarray, eps: float, analytic_lower: float = 0.0,
                      policy: TolerancePolicy = DEFAULT_POLICY,
                      max_iters: int = 200):
    """(certified lower, heuristic upper) on the eps-rank of M.

    Upper: decrease the target rank while an alternating truncate/clip
    heuristic finds a rank-r matrix entrywise within eps.  Lower: the best
    registered analytic bound (e.g. a Sherstov pattern-matrix bound passed by
    the caller), with the trivial 1-if-not-all-clippable fallback.  The two
    are never conflated.
    """
    M = np.asarray(M, dtype=float)
    exact = numerical_rank(M, policy)
    if eps <= 0.0:
        return exact, exact
    trivial = 1 if np.any(np.abs(M) > eps) else 0
    lower = max(float(analytic_lower), float(trivial))
    upper = exact
    for r in range(exact - 1, 0, -1):
        X = M.copy()
        ok = False
        for _ in range(max_iters):
            u, s, vh = np.linalg.svd(X, full_matrices=False)
            X = (u[:, :r] * s[:r]) @ vh[:r, :]
            if np.max(np.abs(X - M)) <= eps + 1e-9:
                ok = True
                break
            X = np.clip(X, M - eps, M + eps)
        if ok:
            upper = r
        else:
            break
    if trivial == 0:
        upper = 0
    upper = max(upper, int(math.ceil(lower)))
    return lower, upper


@dataclass(frozen=True)
class RectangleCover:
    """Rectangles (Y_j, X_j) over a rows x cols grid, as boolean masks."""

    row_masks: tuple  # tuple of boolean row masks
    col_masks: tuple

    def delta(self, j: int) -> np.ndarray:
        return np.outer(np.asarray(self.row_masks[j], dtype=float),
                        np.asarray(self.col_masks[j], dtype=float))

    def check_covering(self, shape) -> None:
        total = np.zeros(shape)
        for j in range(len(self.row_masks)):
            total += self.delta(j)
        if np.any(total == 0):
            raise CoverInvalid("some (y, x) entry is uncovered")


@dataclass(frozen=True)
class BoundReport:
    value: float
    interval: tuple | None = None
    details: dict = field(default_factory=dict)


def rank_measure(M: np.ndarray, cover: RectangleCover,
                 policy: TolerancePolicy = DEFAULT_POLICY) -> BoundReport:
    """rank(M) / max_j rank(M o Delta_j) over a validated cover."""
    M = np.asarray(M, dtype=float)
    if np.max(np.abs(M)) > 1.0 + 1e-9:
        raise MalformedProgram("entries must be bounded by 1")
    cover.check_covering(M.shape)
    ranks = [numerical_rank(M * cover.delta(j), policy)
             for j in range(len(cover.row_masks))]
    denom = max(max(ranks), 1)
    return BoundReport(value=numerical_rank(M, policy) / denom,
                       details={"max_rank_index": int(np.argmax(ranks)),
                                "masked_ranks": ranks})


def approx_rank_measure(M: np.ndarray, cover: RectangleCover, kappa: float,
                        analytic_lower: float = 0.0,
                        policy: TolerancePolicy = DEFAULT_POLICY) -> BoundReport:
    """sqrt(kappa)-rank(M) / max_j rank(M o Delta_j), as a certified/heuristic
    pair from eps_rank_interval."""
    M = np.asarray(M, dtype=float)
    if np.max(np.abs(M)) > 1.0 + 1e-9:
        raise MalformedProgram("entries must be bounded by 1")
    cover.check_covering(M.shape)
    eps = math.sqrt(kappa)
    lo, hi = eps_rank_interval(M, eps, analytic_lower, policy)
    ranks = [numerical_rank(M * cover.delta(j), policy)
             for j in range(len(cover.row_masks))]
    denom = max(max(ranks), 1)
    return BoundReport(value=lo / denom, interval=(lo / denom, hi / denom),
                       details={"masked_ranks": ranks, "eps": eps})


def lambda_extract(P: SpanProgram, f, kappa: float = 0.0,
                   policy: TolerancePolicy = DEFAULT_POLICY):
    """Feasible solution {Lambda_j} extracted from witnesses of P.

    Lambda_j[y, x] = <omega_y| A Pi_{j, x_j} |w_x> on entries with
    x_j != y_j (zero elsewhere), with omega_y optimal negative witnesses and
    w_x budget kappa/W_- positive witnesses.  Returns ({Lambda_j}, residual
    ||sum_j Lambda_j o Delta_j - J||_inf, rank_sum).
    """
    P = validate(P)
    table = {as_bits(x, P.n): int(v) for x, v in f.items()}
    report = complexity_report(P, table, kappa, policy)
    if not report.approximates:
        raise NotApproximating(
            f"program does not {kappa}-approximate: {report.failures}")
    ys = sorted(x for x, v in table.items() if v == 0)
    xs = sorted(x for x, v in table.items() if v == 1)
    omegas = {y: negative_witness(P, y, policy)[0] for y in ys}
    budget = kappa / report.W_minus
    ws = {x: budget_witness(P, x, budget, policy)[0] for x in xs}
    tag_cols = {}
    for i, t in enumerate(P.tags):
        if isinstance(t, tuple):
            tag_cols.setdefault(t, []).append(i)
    lambdas = []
    for j in range(1, P.n + 1):
        L = np.zeros((len(ys), len(xs)), dtype=P.A.dtype)
        for yi, y in enumerate(ys):
            left = omegas[y].conj() @ P.A
            for xi, x in enumerate(xs):
                if x[j - 1] == y[j - 1]:
                    continue
                cols = tag_cols.get((j, x[j - 1]), [])
                L[yi, xi] = sum(left[c] * ws[x][c] for c in cols)
        lambdas.append(L)
    total = sum(lambdas)
    residual = float(np.max(np.abs(total - np.ones_like(total)))) \
        if total.size else 0.0
    rank_sum = int(sum(numerical_rank(L, policy) for L in lambdas))
    return lambdas, residual, rank_sum


def cover_to_function(M: np.ndarray, cover: RectangleCover,
                      kappa: float = 0.0,
                      policy: TolerancePolicy = DEFAULT_POLICY):
    """Monotone function description (t^y, s^x vectors) from a cover.

    t^y_j = 0 iff row y is in Y_j; s^x_j = 1 iff column x is in X_j; the
    covering property guarantees no s^x <= t^y.  Returns (t_rows, s_cols,
    BoundReport) where the report carries the (approximate) rank measure.
    """
    M = np.asarray(M, dtype=float)
    cover.check_covering(M.shape)
    n = len(cover.row_masks)
    t_rows = [tuple(0 if cover.row_masks[j][y] else 1 for j in range(n))
              for y in range(M.shape[0])]
    s_cols = [tuple(1 if cover.col_masks[j][x] else 0 for j in range(n))
              for x in range(M.shape[1])]
    for y, t in enumerate(t_rows):
        for x, s in enumerate(s_cols):
            if all(s[j] <= t[j] for j in range(n)):
                raise CoverInvalid(
                    f"monotone separation fails at row {y}, col {x}")
    if kappa > 0:
        rep = approx_rank_measure(M, cover, kappa, policy=policy)
    else:
        rep = rank_measure(M, cover, policy)
    return t_rows, s_cols, rep


def _assignment_consistent(z: int, S_mask: int, alpha: int) -> bool:
    return (z & S_mask) == (alpha & S_mask)


def _check_assignments(p: BooleanFunctionTable, assignments,
                       require_certificates: bool):
    """Validate (S_mask, alpha) pairs; return them canonicalized."""
    canon = []
    covered = np.zeros(1 << p.m, dtype=bool)
    vals = p.as_array()
    for S_mask, alpha in assignments:
        S_mask, alpha = int(S_mask), int(alpha) & int(S_mask)
        zs = [z for z in range(1 << p.m)
              if _assignment_consistent(z, S_mask, alpha)]
        if require_certificates:
            if len({vals[z] for z in zs}) != 1:
                raise NotACertificate(
                    f"assignment (S={S_mask:b}, alpha={alpha:b}) does not fix p")
        for z in zs:
            covered[z] = True
        canon.append((S_mask, alpha))
    if not canon or not covered.all():
        raise NotCovering("assignments do not cover {0,1}^m")
    return canon


def _rectangle(p: BooleanFunctionTable, lam: int, S_mask: int, alpha: int,
               k: dict, b: dict):
    """Row/col index sets of the rectangle (Y_{i,k,b}, X_{i,k,b})."""
    m = p.m
    S = [i for i in range(m) if (S_mask >> i) & 1]
    rows = []
    for y in range(1 << (lam * m)):
        ok = True
        for i in S:
            a_i = (alpha >> i) & 1
            want = ((b[i] ^ a_i))
            if ((y >> (i * lam + (k[i] - 1))) & 1) != want:
                ok = False
                break
        if ok:
            rows.append(y)
    xs = list(itertools.product(range(1, lam + 1), repeat=m))
    xs.sort(key=lambda x: sum((x[i] - 1) * lam ** i for i in range(m)))
    cols = []
    for xi, x in enumerate(xs):
        if any(x[i] != k[i] for i in S):
            continue
        for w in range(1 << m):
            if any(((w >> i) & 1) != b[i] for i in S):
                continue
            cols.append((xi << m) + w)
    return rows, cols


def certificate_bound(p: BooleanFunctionTable, certificates, lam: int,
                      kappa: float, eps: float,
                      policy: TolerancePolicy = DEFAULT_POLICY) -> BoundReport:
    """Rank-1 rectangle cover from a certificate set, and the resulting
    monotone lower bound lam^{approx_degree_eps(p)} (eps-sqrt(k))^2/(1+sqrt(k))^2.

    certificates: iterable of (S_mask, alpha) partial assignments, each of
    which must fix p's value; together they must cover {0,1}^m.
    """
    sk = math.sqrt(kappa)
    if not (sk <= eps <= 1.0):
        raise MalformedProgram("need sqrt(kappa) <= eps <= 1")
    certs = _check_assignments(p, certificates, require_certificates=True)
    n_rect = sum((2 * lam) ** bin(S).count("1") for S, _ in certs)
    details = {"n_rectangles": int(n_rect)}
    if p.m * lam <= _PATTERN_GUARD:
        F = pattern_matrix(p, lam)
        covered = np.zeros(F.shape, dtype=bool)
        for S_mask, alpha in certs:
            S = [i for i in range(p.m) if (S_mask >> i) & 1]
            for kv in itertools.product(range(1, lam + 1), repeat=len(S)):
                for bv in itertools.product((0, 1), repeat=len(S)):
                    k = dict(zip(S, kv))
                    b = dict(zip(S, bv))
                    rows, cols = _rectangle(p, lam, S_mask, alpha, k, b)
                    sub = F[np.ix_(rows, cols)]
                    if numerical_rank(sub, policy) > 1:
                        raise NotACertificate(
                            "rectangle is not rank-1 "
                            f"(S={S_mask:b}, k={k}, b={b})")
                    covered[np.ix_(rows, cols)] = True
        if not covered.all():
            raise NotCovering("certificate rectangles miss some F entry")
        details["rank_one_verified"] = True
    d = approx_degree(p, eps)
    value = (lam ** d) * (eps - sk) ** 2 / (1.0 + sk) ** 2
    details["approx_degree"] = d
    return BoundReport(value=value, details=details)


def _restricted_table(p: BooleanFunctionTable, S_mask: int, alpha: int):
    free = [i for i in range(p.m) if not ((S_mask >> i) & 1)]
    vals = []
    arr = p.as_array()
    for zf in range(1 << len(free)):
        z = alpha & S_mask
        for idx, i in enumerate(free):
            if (zf >> idx) & 1:
                z |= 1 << i
        vals.append(float(arr[z]))
    return BooleanFunctionTable(m=len(free), values=tuple(vals)), free


def assignment_bound(p: BooleanFunctionTable, assignments, lam: int,
                     kappa: float, eps: float,
                     policy: TolerancePolicy = DEFAULT_POLICY) -> BoundReport:
    """Generalized assignment bound: (eps - sqrt(k))^2 lam^{adeg_eps(p)}
    divided by the largest restricted Fourier weight
    sum_{S: p_i_hat(S) != 0} lam^|S|.

    assignments: iterable of (S_mask, alpha) partial assignments covering
    {0,1}^m (not necessarily certificates).
    """
    sk = math.sqrt(kappa)
    if not (sk <= eps <= 1.0):
        raise MalformedProgram("need sqrt(kappa) <= eps <= 1")
    asg = _check_assignments(p, assignments, require_certificates=False)
    denom = 0
    per_assignment = []
    for S_mask, alpha in asg:
        p_i, free = _restricted_table(p, S_mask, alpha)
        weight = sherstov_rank(p_i, lam)
        per_assignment.append(weight)
        denom = max(denom, weight)
    # structural identity: each assignment's rectangle of F equals the
    # restricted function's pattern matrix with rows repeated over the
    # unread y coordinates (F o Delta = F_i tensor all-ones)
    if p.m * lam <= _PATTERN_GUARD:
        F = pattern_matrix(p, lam)
        for S_mask, alpha in asg:
            S = [i for i in range(p.m) if (S_mask >> i) & 1]
            p_i, free = _restricted_table(p, S_mask, alpha)
            F_i = pattern_matrix(p_i, lam) if p_i.m else np.full(
                (1, 1), float(p_i.values[0]))
            k = {i: 1 for i in S}
            b = {i: (alpha >> i) & 1 for i in S}
            rows, cols = _rectangle(p, lam, S_mask, alpha, k, b)
            xs = list(itertools.product(range(1, lam + 1), repeat=p.m))
            xs.sort(key=lambda x: sum((x[i] - 1) * lam ** i
                                      for i in range(p.m)))
            for ri, y in enumerate(rows):
                # project y onto the free blocks, in F_i's row indexing
                yp = 0
                for fi, i in enumerate(free):
                    block = (y >> (i * lam)) & ((1 << lam) - 1)
                    yp |= block << (fi * lam)
                for ci, col in enumerate(cols):
                    xi, w = col >> p.m, col & ((1 << p.m) - 1)
                    x = xs[xi]
                    xp = sum((x[i] - 1) * lam ** fi
                             for fi, i in enumerate(free))
                    wp = sum(((w >> i) & 1) << fi
                             for fi, i in enumerate(free))
                    expected = F_i[yp, (xp << p_i.m) + wp] if p_i.m \
                        else F_i[0, 0]
                    if abs(F[y, col] - expected) > 1e-12:
                        raise MalformedProgram(
                            "restricted rectangle does not match the "
                            f"restricted pattern matrix (S={S_mask:b})")
    d = approx_degree(p, eps)
    value = (eps - sk) ** 2 * (lam ** d) / max(denom, 1)
    return BoundReport(value=value,
                       details={"approx_degree": d,
                                "restricted_weights": per_assignment})
