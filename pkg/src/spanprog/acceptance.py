"""Verification suite: the named checks behind ``spanprog verify all``.

Each criterion is a no-argument callable (seeded internally, deterministic)
that raises AssertionError with a diagnostic on failure.  The registry is
shared between the CLI and the test suite.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from . import bounds as bd
from . import monotone as mo
from . import qsim
from . import query_alg as qa
from . import span_core as sc
from .errors import NoZeroEigenmass, NotAccepted, NotRejected
from .numerics import DEFAULT_POLICY, numerical_rank, unitary_eig

__all__ = ["CRITERIA", "run_all", "random_program"]

SEED = 20240517


def random_program(rng, n=3, dim_v=4, cols=8, field="real",
                   tag_pool=("bit", "bit", "bit", "true")) -> sc.SpanProgram:
    """Random span program with tau reachable from the full column set."""
    if field == "complex":
        A = rng.normal(size=(dim_v, cols)) + 1j * rng.normal(size=(dim_v, cols))
    else:
        A = rng.normal(size=(dim_v, cols))
    tau = A @ (rng.normal(size=cols) + (1j * rng.normal(size=cols)
                                        if field == "complex" else 0.0))
    tags = []
    for _ in range(cols):
        kind = tag_pool[rng.integers(0, len(tag_pool))]
        if kind == "bit":
            tags.append((int(rng.integers(1, n + 1)), int(rng.integers(0, 2))))
        else:
            tags.append(kind)
    return sc.validate(sc.SpanProgram(n=n, tags=tuple(tags), A=A, tau=tau,
                                      field_tag=field))


def _rejected_inputs(P):
    return [x for x in sc.all_inputs(P.n) if sc.evaluate(P, x) == "rejected"]


def criterion_witness_duality():
    """min_error(x) * w_minus(x) = 1 on random programs and rejected inputs."""
    rng = np.random.default_rng(SEED)
    found = 0
    while found < 50:
        P = random_program(rng, n=3, dim_v=int(rng.integers(2, 7)),
                           cols=int(rng.integers(3, 11)))
        rejected = _rejected_inputs(P)
        if not rejected:
            continue
        x = rejected[rng.integers(0, len(rejected))]
        try:
            _, w_minus = sc.negative_witness(P, x)
        except (sc.DegenerateTarget, NotRejected):
            continue
        _, err = sc.min_error_witness(P, x)
        product = err * w_minus
        assert abs(product - 1.0) <= 1e-6 * max(1.0, abs(product)), (
            f"duality violated: min_error*w_minus = {product} at x={x}")
        found += 1


def criterion_scaling_exactness():
    """w+ -> w+/b^2+2, w- -> b^2 w-+1, unit free witness, on 25 programs."""
    rng = np.random.default_rng(SEED + 1)
    for _ in range(25):
        P = random_program(rng, n=3, dim_v=int(rng.integers(2, 5)),
                           cols=int(rng.integers(3, 8)))
        for beta in (0.3, 1.0, 2.0):
            Pb = sc.scale(P, beta)
            w0 = sc.pseudoinverse(Pb.A) @ Pb.tau
            assert abs(float(np.real(np.vdot(w0, w0))) - 1.0) <= 1e-8
            for x in sc.all_inputs(P.n):
                if sc.evaluate(P, x) == "accepted":
                    _, wp = sc.positive_witness(P, x)
                    _, wpb = sc.positive_witness(Pb, x)
                    assert abs(wpb - (wp / beta ** 2 + 2.0)) <= 1e-8, (
                        f"positive law off at beta={beta}, x={x}")
                else:
                    try:
                        _, wm = sc.negative_witness(P, x)
                    except (sc.DegenerateTarget, NotRejected):
                        continue
                    _, wmb = sc.negative_witness(Pb, x)
                    assert abs(wmb - (beta ** 2 * wm + 1.0)) <= 1e-8, (
                        f"negative law off at beta={beta}, x={x}")


def criterion_tensor_square():
    """s(P') = s(P)^2; w_minus and min_error square-bounded."""
    rng = np.random.default_rng(SEED + 2)
    done = 0
    while done < 10:
        P = random_program(rng, n=3, dim_v=3, cols=5)
        if not _rejected_inputs(P):
            continue
        Pn = sc.normalize(P)
        P2 = sc.tensor_square(Pn)
        assert P2.size == Pn.size ** 2, "size is not squared"
        for x in sc.all_inputs(P.n):
            _, err = sc.min_error_witness(Pn, x)
            _, err2 = sc.min_error_witness(P2, x)
            assert err2 <= err ** 2 + 1e-6, (
                f"min_error not square-bounded at x={x}: {err2} > {err}^2")
            if sc.evaluate(Pn, x) == "rejected":
                _, wm = sc.negative_witness(Pn, x)
                _, wm2 = sc.negative_witness(P2, x)
                assert wm2 <= wm ** 2 + 1e-6, (
                    f"w_minus not square-bounded at x={x}")
        done += 1


def criterion_effective_spectral_gap():
    """||Pi_Theta Pi_B u|| <= (Theta/2)||u|| whenever Pi_A u = 0."""
    rng = np.random.default_rng(SEED + 3)
    thetas = (0.1, 0.5, 1.0, 2.0)
    for i in range(200):
        dim = int(rng.integers(2, 17))
        qa_ = np.linalg.qr(rng.normal(size=(dim, dim)))[0][:, :rng.integers(1, dim)]
        qb = np.linalg.qr(rng.normal(size=(dim, dim)))[0][:, :rng.integers(1, dim)]
        pi_a = qa_ @ qa_.T
        pi_b = qb @ qb.T
        u = rng.normal(size=dim)
        u = u - pi_a @ u
        if np.linalg.norm(u) < 1e-8:
            continue
        theta = thetas[i % len(thetas)]
        assert qsim.esg_check(pi_a, pi_b, u, theta), (
            f"effective spectral gap violated at instance {i}, theta={theta}")


def criterion_phase_estimation_law():
    """pe_distribution equals the brute-force DFT law; fixed points give
    Pr[0] = 1; pure phases obey Pr[0] <= pi/(T theta)."""
    rng = np.random.default_rng(SEED + 4)
    for _ in range(10):
        dim = int(rng.integers(2, 9))
        T = int(rng.integers(2, 17))
        Q = np.linalg.qr(rng.normal(size=(dim, dim))
                         + 1j * rng.normal(size=(dim, dim)))[0]
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi = psi / np.linalg.norm(psi)
        dist = qsim.pe_distribution(Q, psi, T)
        powers = [np.linalg.matrix_power(Q, t) for t in range(T)]
        for m in range(T):
            v = sum(np.exp(-2j * np.pi * m * t / T) * (powers[t] @ psi)
                    for t in range(T)) / T
            brute = float(np.real(np.vdot(v, v)))
            assert abs(dist[m] - brute) <= 1e-9, (
                f"PE law mismatch at m={m}: {dist[m]} vs {brute}")
        # fixed point: Pr[0] = 1 exactly when psi is an eigenphase-0 vector
        phases = rng.uniform(-math.pi, math.pi, size=dim)
        phases[0] = 0.0
        U_fp = Q @ np.diag(np.exp(1j * phases)) @ Q.conj().T
        assert abs(qsim.pe_outcome_zero(U_fp, Q[:, 0], T) - 1.0) <= 1e-9
        # pure phase theta > pi/T: Pr[0] <= pi/(T theta)
        theta = float(rng.uniform(math.pi / T + 0.05, math.pi))
        U_ph = np.exp(1j * theta) * np.eye(dim)
        assert qsim.pe_zero_bound_check(U_ph, psi, T, theta), (
            f"phase-estimation tail bound violated at theta={theta}, T={T}")


def criterion_span_to_algorithm():
    """Compiled decider reproduces OR_n; spectral witness-mass bounds hold."""
    for n in range(1, 7):
        P = sc.or_program(n)
        f = {x: int(any(x)) for x in sc.all_inputs(n)}
        decider, Pn = qsim.compile_program(P, f)
        for x in sc.all_inputs(n):
            rep = qsim.decide(decider, Pn, x)
            assert rep.output == f[x], (
                f"decider wrong on OR_{n} at x={x}: {rep.output}")
            if f[x] == 0:
                assert rep.mass_zero >= 1.0 / decider.W_minus - 1e-8, (
                    f"zero-phase mass too small at x={x}")
            else:
                cap = (decider.Theta ** 2 * decider.W_hat_plus
                       + 4.0 * decider.kappa / decider.W_minus)
                assert rep.mass_theta <= cap + 1e-8, (
                    f"low-phase mass too large at x={x}")


def criterion_algorithm_to_span():
    """Witness identities and size bounds for converted query algorithms."""
    c = 5.0
    fixtures = [
        (qa.deutsch_algorithm(),
         {x: (x[0] ^ x[1]) for x in sc.all_inputs(2)}),
        (qa.grover_query_algorithm(4),
         {x: int(any(x)) for x in sc.all_inputs(4) if sum(x) <= 3}),
    ]
    for alg, f in fixtures:
        T = alg.T
        P = qa.alg_to_span(alg, c)
        for x in f:
            res = qa.run(alg, x)
            w, norm2, err = qa.build_pos_witness(alg, x, c)
            assert np.linalg.norm(P.A @ w - P.tau) <= 1e-8
            assert abs(err - res.p0 / (c * T)) <= 1e-8, (
                f"positive-witness error law off at x={x}")
            direct = float(np.sum(np.abs(
                w[~sc.input_mask(P, x)]) ** 2))
            assert abs(direct - err) <= 1e-8
            if res.p0 > 1e-12:
                omega, _ = qa.build_neg_witness(alg, x, c)
                value = qa.neg_witness_value(alg, omega, c)
                expected = (4.0 + c) * T / res.p0
                assert abs(value - expected) <= 1e-6 * expected, (
                    f"negative-witness value law off at x={x}")
        rep = qa.verify_conversion(alg, f, c)
        assert rep.W_minus <= 27.0 * T / 2.0 + 1e-6, "W_minus exceeds 27T/2"
        assert rep.W_hat_plus <= 2.0 * T + 2.0 + 1e-6, "What_+ exceeds 2T+2"
        if rep.one_sided:
            assert rep.decides_exactly
            for x, v in f.items():
                verdict = sc.evaluate(rep.program, x)
                assert verdict == ("accepted" if v else "rejected"), (
                    f"one-sided conversion not exact at x={x}")
    # the damping constant trades witness error against negative size
    noisy = qa.noisy_deutsch()
    for cv in (1.0, 5.0, 20.0):
        for x in sc.all_inputs(2):
            p0 = qa.run(noisy, x).p0
            _, _, err = qa.build_pos_witness(noisy, x, cv)
            assert abs(err - p0 / (cv * noisy.T)) <= 1e-8, (
                f"error law off at c={cv}, x={x}")


def criterion_monotone_correspondence():
    """Negative-witness identity, positive-witness bounds, Appendix bounds,
    monotonicity, and the span/pea round trip for grover(1..6)."""
    for n in range(1, 7):
        g = mo.grover(n)
        f = {x: int(any(x)) for x in sc.all_inputs(n)}
        assert mo.is_monotone(g), f"grover({n}) not monotone"
        P = mo.pea_to_span(g)
        for x in sc.all_inputs(n):
            try:
                _, val = mo.mono_neg_witness(g, x)
            except NoZeroEigenmass:
                continue
            _, ref = sc.negative_witness(P, x)
            assert abs(val - ref) <= 1e-6 * max(1.0, abs(ref)), (
                f"negative-witness mismatch at n={n}, x={x}")
        for theta in (math.pi / 8, math.pi / 4, math.pi / 2):
            for x in sc.all_inputs(n):
                if not f[x]:
                    continue
                w, norm2, err = mo.mono_pos_witness(g, x, theta)
                UO = mo.algorithm_unitary(g, x)
                cap = unitary_eig(UO).mass_abs_leq(g.psi0, theta)
                assert err <= cap + 1e-8
                assert norm2 <= 5.0 * math.pi ** 2 / (4.0 * theta ** 2) + 1e-6
        mo.verify_pe_bounds(g, f)
        if n <= 4:  # round trip (the witness search grows with 2^n)
            pea2, suffix = mo.span_to_pea(P)
            for x in sc.all_inputs(n):
                try:
                    _, v1 = sc.negative_witness(P, x)
                except (NotRejected, sc.DegenerateTarget):
                    continue
                _, v2 = mo.mono_neg_witness(pea2, tuple(x) + suffix)
                assert abs(v1 - v2) <= 1e-6 * max(1.0, abs(v1)), (
                    f"round-trip w_minus mismatch at n={n}, x={x}")


def criterion_sherstov_rank():
    """Closed-form pattern-matrix rank on all 2-bit functions and random
    3-bit functions."""
    for lam in (2, 3):
        for bits in itertools.product((0, 1), repeat=4):
            p = bd.to_pm1(bits, 2)
            F = bd.pattern_matrix(p, lam)
            assert numerical_rank(F) == bd.sherstov_rank(p, lam), (
                f"rank mismatch for table {bits}, lambda={lam}")
    rng = np.random.default_rng(SEED + 8)
    for _ in range(50):
        vals = rng.choice([-1.0, 1.0], size=8)
        p = bd.BooleanFunctionTable(3, tuple(vals))
        F = bd.pattern_matrix(p, 2)
        assert numerical_rank(F) == bd.sherstov_rank(p, 2), (
            f"rank mismatch for random table {vals}")


def criterion_feasible_extraction():
    """lambda_extract residual and rank-sum bounds."""
    for n in (2, 3, 4):
        P = sc.or_program(n)
        f = {x: int(any(x)) for x in sc.all_inputs(n)}
        _, residual, rank_sum = bd.lambda_extract(P, f, 0.0)
        assert residual <= 1e-6, f"OR_{n} residual {residual}"
        assert rank_sum <= P.size
    alg = qa.deutsch_algorithm()
    f = {x: (x[0] ^ x[1]) for x in sc.all_inputs(2)}
    P = qa.alg_to_span(alg, 5.0)
    _, residual, rank_sum = bd.lambda_extract(P, f, 0.0)
    assert residual <= 1e-6, f"converted-algorithm residual {residual}"
    assert rank_sum <= P.size
    noisy = qa.noisy_deutsch()
    Pn = qa.alg_to_span(noisy, 5.0)
    _, residual, rank_sum = bd.lambda_extract(Pn, f, 0.9)
    assert residual <= math.sqrt(0.9) + 1e-6, (
        f"two-sided residual {residual} above sqrt(kappa)")
    assert rank_sum <= Pn.size


def criterion_certificate_pipeline():
    """Closed-form certificate and assignment bounds."""
    parity2 = bd.BooleanFunctionTable(
        2, tuple((-1.0) ** bin(z).count("1") for z in range(4)))
    certs = [(0b11, a) for a in range(4)]
    rep = bd.certificate_bound(parity2, certs, 2, 1.0 / 16.0, 1.0 / 3.0)
    assert rep.details["n_rectangles"] == 64
    expected = (1.0 / 12.0) ** 2 * (16.0 / 25.0) * 4.0
    assert abs(rep.value - expected) <= 1e-10, (
        f"certificate bound {rep.value} != {expected}")
    assert rep.details.get("rank_one_verified")
    parity3 = bd.BooleanFunctionTable(
        3, tuple((-1.0) ** bin(z).count("1") for z in range(8)))
    asg = [(0b001, 0), (0b001, 1)]
    rep = bd.assignment_bound(parity3, asg, 2, 1.0 / 16.0, 1.0 / 3.0)
    expected = (1.0 / 3.0 - 1.0 / 4.0) ** 2 * 2.0
    assert abs(rep.value - expected) <= 1e-10, (
        f"assignment bound {rep.value} != {expected}")


def criterion_approx_degree():
    """LP-certified approximate degree of parities and the eps=0 boundary."""
    for m in range(1, 5):
        parity = bd.BooleanFunctionTable(
            m, tuple((-1.0) ** bin(z).count("1") for z in range(1 << m)))
        assert bd.approx_degree(parity, 1.0 / 3.0) == m
        if m >= 1:
            gap = bd._best_lowdeg_error(parity, m - 1)
            assert gap > 1.0 / 3.0 + 1e-7, (
                f"no infeasibility certificate at degree {m - 1}")
    for bits in itertools.product((0, 1), repeat=4):
        p = bd.to_pm1(bits, 2)
        assert bd.approx_degree(p, 0.0) == bd.degree(p)


CRITERIA = {
    "witness-duality": criterion_witness_duality,
    "scaling-exactness": criterion_scaling_exactness,
    "tensor-square": criterion_tensor_square,
    "effective-spectral-gap": criterion_effective_spectral_gap,
    "phase-estimation-law": criterion_phase_estimation_law,
    "span-to-algorithm": criterion_span_to_algorithm,
    "algorithm-to-span": criterion_algorithm_to_span,
    "monotone-correspondence": criterion_monotone_correspondence,
    "sherstov-rank": criterion_sherstov_rank,
    "feasible-extraction": criterion_feasible_extraction,
    "certificate-pipeline": criterion_certificate_pipeline,
    "approx-degree": criterion_approx_degree,
}


def run_all(names=None):
    """Run criteria (all by default); returns {name: error-or-None}."""
    results = {}
    for name, fn in CRITERIA.items():
        if names and name not in names:
            continue
        try:
            fn()
            results[name] = None
        except Exception as exc:  # noqa: BLE001 - collected for reporting
            results[name] = exc
    return results
