import math

import numpy as np
import pytest

from spanprog import monotone as mo
from spanprog import span_core as sc
from spanprog.errors import (
    MalformedProgram,
    NoZeroEigenmass,
    NotBoundedError,
    NotMonotone,
)
from spanprog.numerics import unitary_eig

VALUE_TOLERANCE = 1e-6
MASS_TOLERANCE = 1e-8


def or3_table():
    return {x: int(any(x)) for x in sc.all_inputs(3)}


def test_grover_fixture_is_valid_and_monotone():
    g = mo.grover(3)
    mo.validate_pea(g)
    assert mo.is_monotone(g)
    assert g.delta == 0.0
    assert g.T == math.ceil(math.pi * math.sqrt(3))


def test_grover_decides_or():
    g = mo.grover(3)
    for x, v in or3_table().items():
        rep = mo.run_pea(g, x)
        assert rep.output_bit == v, f"wrong output at {x}"


def test_validate_rejects_bad_parameters():
    g = mo.grover(2)
    with pytest.raises(MalformedProgram):
        mo.validate_pea(mo.PhaseEstimationAlgorithm(
            n=g.n, workspace_symbols=g.workspace_symbols, U=g.U,
            psi0=g.psi0, delta=0.6, T=g.T, M=g.M, labels=g.labels))
    with pytest.raises(MalformedProgram):
        mo.validate_pea(mo.PhaseEstimationAlgorithm(
            n=g.n, workspace_symbols=g.workspace_symbols, U=g.U,
            psi0=g.psi0, delta=0.25, T=g.T, M=10, labels=g.labels))


def test_is_monotone_detects_violation():
    # phase oracle on a state that is NOT preserved on its zero space:
    # U swaps the two basis states, psi0 = e0; flipping the bit moves mass.
    U = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    pea = mo.PhaseEstimationAlgorithm(
        n=1, workspace_symbols=("w",), U=U,
        psi0=np.array([1.0, 0.0], dtype=complex),
        delta=0.0, T=4, M=2, labels=(1, 1))
    assert not mo.is_monotone(pea)


def test_negative_witness_identity():
    g = mo.grover(3)
    P = mo.pea_to_span(g)
    for x in sc.all_inputs(3):
        UO = mo.algorithm_unitary(g, x)
        mass = unitary_eig(UO).zero_projector(
            mo.DEFAULT_POLICY) @ g.psi0
        mass2 = float(np.vdot(mass, mass).real)
        if mass2 <= 1e-12:
            with pytest.raises(NoZeroEigenmass):
                mo.mono_neg_witness(g, x)
            continue
        _, val = mo.mono_neg_witness(g, x)
        assert val == pytest.approx(1.0 / mass2, rel=VALUE_TOLERANCE)
        _, ref = sc.negative_witness(P, x)
        assert val == pytest.approx(ref, rel=VALUE_TOLERANCE)


def test_positive_witness_bounds():
    g = mo.grover(3)
    P = mo.pea_to_span(g)
    for theta in (math.pi / 8, math.pi / 4):
        for x, v in or3_table().items():
            if not v:
                continue
            w, norm2, err = mo.mono_pos_witness(g, x, theta)
            cap = unitary_eig(mo.algorithm_unitary(g, x)).mass_abs_leq(
                g.psi0, theta)
            assert err <= cap + MASS_TOLERANCE
            assert norm2 <= 5.0 * math.pi ** 2 / (4.0 * theta ** 2) + 1e-6
            # w is a feasible approximate witness: A w = tau exactly
            assert np.allclose(P.A @ w, P.tau, atol=MASS_TOLERANCE)


def test_round_trip_preserves_negative_witness():
    g = mo.grover(2)
    P = mo.pea_to_span(g)
    pea2, suffix = mo.span_to_pea(P)
    for x in sc.all_inputs(2):
        try:
            _, v1 = sc.negative_witness(P, x)
        except Exception:
            continue
        _, v2 = mo.mono_neg_witness(pea2, tuple(x) + suffix)
        assert v2 == pytest.approx(v1, rel=VALUE_TOLERANCE)


def test_span_to_pea_rejects_non_monotone():
    P = sc.SpanProgram(n=1, tags=((1, 0),), A=np.array([[1.0]]),
                       tau=np.array([1.0]), field_tag="real")
    with pytest.raises(NotMonotone):
        mo.span_to_pea(sc.validate(P))


def test_verify_pe_bounds_passes_on_grover():
    for n in (2, 3):
        g = mo.grover(n)
        f = {x: int(any(x)) for x in sc.all_inputs(n)}
        rep = mo.verify_pe_bounds(g, f)
        assert rep.one_sided
        for x, mass in rep.zero_input_masses.items():
            assert mass >= 1.0 / g.M ** 2 - MASS_TOLERANCE
        for x, mass in rep.one_input_masses.items():
            assert mass <= MASS_TOLERANCE


def test_verify_pe_bounds_rejects_wrong_table():
    g = mo.grover(2)
    wrong = {x: 1 - int(any(x)) for x in sc.all_inputs(2)}
    with pytest.raises(NotBoundedError):
        mo.verify_pe_bounds(g, wrong)


def test_pea_span_tags_structure():
    g = mo.grover(2)
    P = mo.pea_to_span(g)
    d = g.dim
    assert P.size == 2 * d
    assert all(t == "true" for t in P.tags[:d])
    assert all(isinstance(t, tuple) and t[1] == 1 for t in P.tags[d:])
