import numpy as np
import pytest

from spanprog import query_alg as qa
from spanprog import span_core as sc
from spanprog.errors import MalformedProgram, NotBoundedError, ZeroRejection

WITNESS_TOLERANCE = 1e-8
VALUE_TOLERANCE = 1e-6
C = 5.0


def xor_table():
    return {x: x[0] ^ x[1] for x in sc.all_inputs(2)}


def test_deutsch_runs_exactly():
    alg = qa.deutsch_algorithm()
    for x, v in xor_table().items():
        res = qa.run(alg, x)
        assert res.output_bit == v
        assert res.p0 == pytest.approx(1.0 - v, abs=WITNESS_TOLERANCE)


def test_unitary_completing_extends_partial_isometry():
    v_in = np.array([1.0, 0.0, 0.0, 0.0])
    v_out = np.array([0.0, 0.5, 0.5, 1 / np.sqrt(2)])
    U = qa.unitary_completing([(v_in, v_out)], 4)
    assert np.allclose(U @ U.conj().T, np.eye(4), atol=WITNESS_TOLERANCE)
    assert np.allclose(U @ v_in, v_out, atol=WITNESS_TOLERANCE)


def test_conversion_structure():
    alg = qa.deutsch_algorithm()
    P = qa.alg_to_span(alg, C)
    assert P.n == alg.n
    assert P.field_tag == "complex"
    # columns for steps 0..2T+1 over the step-space basis
    assert P.dim_v == (2 * alg.T + 2) * alg.dim


def test_conversion_requires_a_query():
    alg = qa.deutsch_algorithm()
    with pytest.raises(MalformedProgram):
        qa.alg_to_span(qa.QueryAlgorithm(
            n=alg.n, workspace_symbols=alg.workspace_symbols, T=0,
            unitaries=(alg.unitaries[0],)), C)


def test_positive_witness_error_law():
    alg = qa.deutsch_algorithm()
    P = qa.alg_to_span(alg, C)
    for x in sc.all_inputs(2):
        res = qa.run(alg, x)
        w, norm2, err = qa.build_pos_witness(alg, x, C)
        assert np.allclose(P.A @ w, P.tau, atol=WITNESS_TOLERANCE)
        assert err == pytest.approx(res.p0 / (C * alg.T),
                                    abs=WITNESS_TOLERANCE)
        off = float(np.sum(np.abs(w[~sc.input_mask(P, x)]) ** 2))
        assert off == pytest.approx(err, abs=WITNESS_TOLERANCE)


def test_positive_error_scales_inversely_with_damping():
    alg = qa.noisy_deutsch()
    x = (0, 0)
    p0 = qa.run(alg, x).p0
    for c in (1.0, 5.0, 20.0):
        _, _, err = qa.build_pos_witness(alg, x, c)
        assert err == pytest.approx(p0 / (c * alg.T), abs=WITNESS_TOLERANCE)


def test_negative_witness_value_law():
    alg = qa.deutsch_algorithm()
    for x in sc.all_inputs(2):
        p0 = qa.run(alg, x).p0
        if p0 <= 1e-12:
            with pytest.raises(ZeroRejection):
                qa.build_neg_witness(alg, x, C)
            continue
        omega, _ = qa.build_neg_witness(alg, x, C)
        value = qa.neg_witness_value(alg, omega, C)
        assert value == pytest.approx((4.0 + C) * alg.T / p0,
                                      rel=VALUE_TOLERANCE)


def test_verify_conversion_one_sided():
    rep = qa.verify_conversion(qa.deutsch_algorithm(), xor_table(), C)
    assert rep.one_sided and rep.decides_exactly
    assert rep.kappa == 0.0
    assert rep.W_minus <= 27.0 * 1 / 2.0 + VALUE_TOLERANCE
    assert rep.W_hat_plus <= 2.0 * 1 + 2.0 + VALUE_TOLERANCE
    for x, v in xor_table().items():
        assert sc.evaluate(rep.program, x) == (
            "accepted" if v else "rejected")


def test_verify_conversion_two_sided():
    rep = qa.verify_conversion(qa.noisy_deutsch(), xor_table(), C)
    assert not rep.one_sided
    assert rep.kappa == pytest.approx(0.9)


def test_verify_conversion_detects_wrong_table():
    wrong = {x: 1 - v for x, v in xor_table().items()}
    with pytest.raises(NotBoundedError):
        qa.verify_conversion(qa.deutsch_algorithm(), wrong, C)


def test_grover_fixture_probabilities():
    alg = qa.grover_query_algorithm(4)
    assert qa.run(alg, (0, 0, 0, 0)).p0 == pytest.approx(
        1.0, abs=WITNESS_TOLERANCE)
    # one Grover iteration on 4 elements: odd-weight inputs leave success
    # probability 3/4, weight-2 inputs are decided with certainty
    for x in sc.all_inputs(4):
        if sum(x) in (1, 3):
            assert qa.run(alg, x).p0 == pytest.approx(
                0.25, abs=WITNESS_TOLERANCE)
        elif sum(x) == 2:
            assert qa.run(alg, x).p0 == pytest.approx(
                0.0, abs=WITNESS_TOLERANCE)


def test_grover_conversion_bounds():
    alg = qa.grover_query_algorithm(4)
    f = {x: int(any(x)) for x in sc.all_inputs(4) if sum(x) <= 3}
    rep = qa.verify_conversion(alg, f, C)
    assert rep.W_minus <= 27.0 * alg.T / 2.0 + VALUE_TOLERANCE
    assert rep.W_hat_plus <= 2.0 * alg.T + 2.0 + VALUE_TOLERANCE
