import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from structdist.errors import InvalidProblem
from structdist.numerics import (
    LOG,
    MAX_PLUS,
    NEG_INF,
    as_log_tensor,
    logsumexp,
    masked_dot,
    semiring_contract,
    signed_log_det,
)

finite_floats = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


def test_logsumexp_two_equal_terms():
    assert logsumexp(np.array([0.0, 0.0]), axis=0) == pytest.approx(math.log(2))


def test_logsumexp_absorbs_neg_inf():
    assert logsumexp(np.array([NEG_INF, 0.0]), axis=0) == pytest.approx(0.0)


def test_logsumexp_empty_support():
    assert logsumexp(np.array([NEG_INF, NEG_INF]), axis=0) == NEG_INF


def test_logsumexp_no_overflow_on_large_inputs():
    out = logsumexp(np.array([1000.0, 1000.0]), axis=0)
    assert out == pytest.approx(1000.0 + math.log(2))


@given(st.lists(finite_floats, min_size=1, max_size=12), finite_floats)
@settings(max_examples=200, deadline=None)
def test_logsumexp_shift_invariance(values, c):
    x = np.array(values)
    base = logsumexp(x, axis=0)
    shifted = logsumexp(x + c, axis=0) - c
    assert abs(shifted - base) <= 1e-9


@given(finite_floats, finite_floats, finite_floats)
@settings(max_examples=200, deadline=None)
def test_log_semiring_axioms_on_triples(a, b, c):
    plus, times = LOG.plus, LOG.times
    assert plus(a, b) == pytest.approx(plus(b, a), abs=1e-9)
    assert plus(plus(a, b), c) == pytest.approx(plus(a, plus(b, c)), abs=1e-9)
    assert times(times(a, b), c) == pytest.approx(times(a, times(b, c)), abs=1e-9)
    assert plus(a, LOG.zero) == pytest.approx(a, abs=1e-9)
    assert times(a, LOG.one) == pytest.approx(a, abs=1e-9)
    # distributivity: a * (b + c) == a*b + a*c
    lhs = times(a, plus(b, c))
    rhs = plus(times(a, b), times(a, c))
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_max_plus_instance():
    assert MAX_PLUS.plus(3.0, 5.0) == 5.0
    assert MAX_PLUS.times(3.0, 5.0) == 8.0
    assert MAX_PLUS.zero == NEG_INF and MAX_PLUS.one == 0.0


def test_max_plus_matrix_square():
    m = np.array([[0.0, 1.0], [2.0, 3.0]])
    out = semiring_contract("ij,jk->ik", [m, m], MAX_PLUS)
    assert np.array_equal(out, np.array([[3.0, 4.0], [5.0, 6.0]]))


def test_log_contract_on_zero_matrices():
    z = np.zeros((2, 2))
    out = semiring_contract("ij,jk->ik", [z, z], LOG)
    assert np.allclose(out, math.log(2))


def test_identity_contract_returns_same_tensor():
    x = np.random.default_rng(0).normal(size=(3, 4))
    out = semiring_contract("ij->ij", [x], LOG)
    assert np.array_equal(out, x)


@pytest.mark.parametrize("spec,shapes", [
    ("ij,jk->ik", [(3, 4), (4, 2)]),
    ("ab,bc,cd->ad", [(2, 3), (3, 4), (4, 2)]),
    ("ij,j->i", [(5, 3), (3,)]),
    ("abc,bc->a", [(2, 3, 4), (3, 4)]),
])
def test_log_contract_matches_ordinary_contraction(spec, shapes):
    rng = np.random.default_rng(42)
    ops = [rng.uniform(-5, 5, size=s) for s in shapes]
    out = semiring_contract(spec, ops, LOG)
    expected = np.log(np.einsum(spec, *[np.exp(o) for o in ops]))
    assert np.allclose(out, expected, rtol=1e-8, atol=1e-10)


def test_contract_rejects_shape_mismatch():
    with pytest.raises(InvalidProblem):
        semiring_contract("ij,jk->ik", [np.zeros((2, 3)), np.zeros((4, 2))], LOG)


def test_contract_rejects_missing_arrow():
    with pytest.raises(InvalidProblem):
        semiring_contract("ij,jk", [np.zeros((2, 3)), np.zeros((3, 2))], LOG)


def test_signed_log_det_identity():
    sign, log_abs = signed_log_det(np.eye(3))
    assert sign == 1 and log_abs == pytest.approx(0.0)


def test_signed_log_det_diagonal():
    sign, log_abs = signed_log_det(np.diag([2.0, 3.0]))
    assert sign == 1 and log_abs == pytest.approx(math.log(6))


def test_signed_log_det_row_swap_flips_sign():
    sign, log_abs = signed_log_det(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert sign == -1 and log_abs == pytest.approx(0.0)


def test_signed_log_det_singular():
    sign, log_abs = signed_log_det(np.ones((3, 3)))
    assert sign == 0 and log_abs == NEG_INF


def test_signed_log_det_rejects_non_square():
    with pytest.raises(InvalidProblem):
        signed_log_det(np.zeros((2, 3)))


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=10**6))
@settings(max_examples=60, deadline=None)
def test_signed_log_det_of_product(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    b = rng.normal(size=(n, n))
    sa, la = signed_log_det(a)
    sb, lb = signed_log_det(b)
    sp, lp = signed_log_det(a @ b)
    if sa == 0 or sb == 0 or sp == 0:
        return  # numerically singular draw
    assert sp == sa * sb
    assert lp == pytest.approx(la + lb, abs=1e-7)


def test_signed_log_det_matches_numpy_slogdet():
    rng = np.random.default_rng(3)
    for n in (1, 2, 4, 7):
        m = rng.normal(size=(n, n))
        sign, log_abs = signed_log_det(m)
        np_sign, np_log = np.linalg.slogdet(m)
        assert sign == int(np_sign)
        assert log_abs == pytest.approx(np_log, abs=1e-8)


def test_as_log_tensor_rejects_nan():
    with pytest.raises(InvalidProblem):
        as_log_tensor(np.array([0.0, float("nan")]))


def test_masked_dot_zero_times_neg_inf_is_zero():
    assert masked_dot(np.array([0.0, 1.0]), np.array([NEG_INF, 2.0])) == 2.0
    assert masked_dot(np.array([1.0, 0.0]), np.array([NEG_INF, 2.0])) == NEG_INF
