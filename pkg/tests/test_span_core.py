import math

import numpy as np
import pytest

from spanprog import span_core as sc
from spanprog.errors import (
    AlreadyReal,
    InfeasibleBudget,
    MalformedProgram,
    NotAccepted,
    NotNormalized,
    NotRejected,
)

WITNESS_TOLERANCE = 1e-8
DUALITY_TOLERANCE = 1e-6


def or2():
    return sc.or_program(2)


def test_or_program_evaluation():
    P = or2()
    assert sc.evaluate(P, (0, 0)) == "rejected"
    for x in [(0, 1), (1, 0), (1, 1)]:
        assert sc.evaluate(P, x) == "accepted"


def test_or_witness_values():
    P = or2()
    _, wp = sc.positive_witness(P, (1, 1))
    assert wp == pytest.approx(0.5, abs=WITNESS_TOLERANCE)
    _, wp1 = sc.positive_witness(P, (1, 0))
    assert wp1 == pytest.approx(1.0, abs=WITNESS_TOLERANCE)
    _, wm = sc.negative_witness(P, (0, 0))
    assert wm == pytest.approx(2.0, abs=WITNESS_TOLERANCE)


def test_witness_feasibility():
    P = or2()
    w, _ = sc.positive_witness(P, (1, 1))
    assert np.allclose(P.A @ w, P.tau, atol=WITNESS_TOLERANCE)
    assert np.allclose(w[~sc.input_mask(P, (1, 1))], 0.0)
    omega, _ = sc.negative_witness(P, (0, 0))
    assert np.vdot(omega, P.tau) == pytest.approx(1.0, abs=WITNESS_TOLERANCE)
    avail = P.A[:, sc.input_mask(P, (0, 0))]
    if avail.size:
        assert np.allclose(omega.conj() @ avail, 0.0, atol=WITNESS_TOLERANCE)


def test_positive_witness_requires_acceptance():
    with pytest.raises(NotAccepted):
        sc.positive_witness(or2(), (0, 0))
    with pytest.raises(NotRejected):
        sc.negative_witness(or2(), (1, 1))


def test_min_error_negative_duality():
    P = or2()
    _, err = sc.min_error_witness(P, (0, 0))
    _, wm = sc.negative_witness(P, (0, 0))
    assert err * wm == pytest.approx(1.0, rel=DUALITY_TOLERANCE)
    # on accepted inputs the error vanishes
    _, err1 = sc.min_error_witness(P, (1, 1))
    assert err1 == pytest.approx(0.0, abs=WITNESS_TOLERANCE)


def test_budget_witness_monotone_in_budget():
    P = or2()
    w, n2 = sc.budget_witness(P, (1, 1), 0.5)
    _, err = sc.min_error_witness(P, (1, 1))
    assert err <= 0.5 + WITNESS_TOLERANCE
    assert n2 >= 0.0
    with pytest.raises(InfeasibleBudget):
        sc.budget_witness(P, (0, 0), 0.1)  # min error is 0.5 here


def test_scale_laws_on_or2():
    P = or2()
    for beta in (0.5, 1.0, 2.0):
        Pb = sc.scale(P, beta)
        assert Pb.size == P.size + 2
        _, wp = sc.positive_witness(P, (1, 1))
        _, wpb = sc.positive_witness(Pb, (1, 1))
        assert wpb == pytest.approx(wp / beta ** 2 + 2.0,
                                    abs=WITNESS_TOLERANCE)
        _, wm = sc.negative_witness(P, (0, 0))
        _, wmb = sc.negative_witness(Pb, (0, 0))
        assert wmb == pytest.approx(beta ** 2 * wm + 1.0,
                                    abs=WITNESS_TOLERANCE)
        w0 = sc.pseudoinverse(Pb.A) @ Pb.tau
        assert np.vdot(w0, w0).real == pytest.approx(1.0,
                                                     abs=WITNESS_TOLERANCE)


def test_normalize_bounds_negative_size():
    P = or2()
    Pn = sc.normalize(P)
    _, wm = sc.negative_witness(Pn, (0, 0))
    assert wm == pytest.approx(2.0, abs=WITNESS_TOLERANCE)
    w0 = sc.pseudoinverse(Pn.A) @ Pn.tau
    assert np.vdot(w0, w0).real == pytest.approx(1.0, abs=WITNESS_TOLERANCE)


def test_tensor_square_squares_size_and_error():
    Pn = sc.normalize(or2())
    P2 = sc.tensor_square(Pn)
    assert P2.size == Pn.size ** 2
    for x in sc.all_inputs(2):
        _, e1 = sc.min_error_witness(Pn, x)
        _, e2 = sc.min_error_witness(P2, x)
        assert e2 <= e1 ** 2 + DUALITY_TOLERANCE


def test_tensor_square_requires_normalization():
    P = or2()  # ||A+ tau||^2 = 0.5 <= 1, fine
    sc.tensor_square(P)
    big = sc.SpanProgram(n=1, tags=((1, 1),),
                         A=np.array([[0.5]]), tau=np.array([1.0]),
                         field_tag="real")
    with pytest.raises(NotNormalized):
        sc.tensor_square(big)  # free witness has norm 2 > 1


def test_reduce_kappa_counts_squarings():
    P = or2()
    f = {x: int(any(x)) for x in sc.all_inputs(2)}
    out, d = sc.reduce_kappa(P, f, 0.5, 0.1)
    assert d == max(1, math.ceil(math.log2(math.log(10) / math.log(2))) + 1)
    assert out.size == (P.size + 2) ** (2 ** d)
    with pytest.raises(MalformedProgram):
        sc.reduce_kappa(P, f, 0.1, 0.5)


def test_realify_preserves_witness_sizes():
    A = np.array([[1.0 + 1.0j, 0.5j]])
    P = sc.validate(sc.SpanProgram(n=1, tags=((1, 1), (1, 0)), A=A,
                                   tau=np.array([1.0 + 0.0j]),
                                   field_tag="complex"))
    R = sc.realify(P)
    assert R.field_tag == "real"
    assert R.size == 2 * P.size
    for x in [(0,), (1,)]:
        assert sc.evaluate(R, x) == sc.evaluate(P, x)
        if sc.evaluate(P, x) == "accepted":
            _, wp = sc.positive_witness(P, x)
            _, wr = sc.positive_witness(R, x)
            assert wr == pytest.approx(wp, abs=WITNESS_TOLERANCE)
    with pytest.raises(AlreadyReal):
        sc.realify(R)


def test_complexity_report_or2():
    P = or2()
    f = {x: int(any(x)) for x in sc.all_inputs(2)}
    rep = sc.complexity_report(P, f, 0.0)
    assert rep.approximates
    assert rep.W_plus == pytest.approx(1.0, abs=WITNESS_TOLERANCE)
    assert rep.W_minus == pytest.approx(2.0, abs=WITNESS_TOLERANCE)
    assert rep.C == pytest.approx(math.sqrt(2.0), abs=WITNESS_TOLERANCE)
    not_and = {x: 1 - x[0] * x[1] for x in sc.all_inputs(2)}
    rep2 = sc.complexity_report(P, not_and, 0.0)
    assert not rep2.approximates
    assert rep2.failures


def test_validate_rejects_malformed():
    with pytest.raises(MalformedProgram):
        sc.validate(sc.SpanProgram(n=1, tags=((2, 1),),
                                   A=np.array([[1.0]]),
                                   tau=np.array([1.0]), field_tag="real"))
    with pytest.raises(MalformedProgram):
        sc.validate(sc.SpanProgram(n=1, tags=((1, 1), (1, 0)),
                                   A=np.array([[1.0]]),
                                   tau=np.array([1.0]), field_tag="real"))


def test_check_monotone_and_promote():
    assert sc.check_monotone(sc.or_program(3))
    P = sc.SpanProgram(n=1, tags=((1, 0),), A=np.array([[1.0]]),
                       tau=np.array([1.0]), field_tag="real")
    assert not sc.check_monotone(sc.validate(P))
    # promote_tags turns tag-blind columns into bit-tagged ones over
    # extra always-1 / always-0 inputs
    Q = sc.validate(sc.SpanProgram(
        n=1, tags=((1, 1), "true", "false"),
        A=np.array([[1.0, 0.5, 0.25]]), tau=np.array([1.0]),
        field_tag="real"))
    Qp, suffix = sc.promote_tags(Q)
    assert all(isinstance(t, tuple) for t in Qp.tags)
    assert Qp.n == 1 + len(suffix)
    for x in [(0,), (1,)]:
        assert sc.evaluate(Qp, x + suffix) == sc.evaluate(Q, x)
