import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brownlab import determinant as dt
from brownlab.algebra import BlockOperator, log_plus_moment, make_algebra, operator_norm
from brownlab.errors import LambdaTooLarge, NonpositiveEpsilon, NonpositiveM
from brownlab.linalg import log_abs_det_lu
from brownlab.verify import random_operator, random_unitary

from conftest import jordan, single


def test_identity_and_scalars():
    alg = make_algebra([0.2, 0.3, 0.5], [2, 3, 4])
    assert dt.log_fk_det(alg.identity()) == 0.0
    assert dt.log_fk_det(alg.identity() * 2.0) == pytest.approx(math.log(2), abs=1e-15)
    assert dt.log_fk_det(alg.identity() * 3j) == pytest.approx(math.log(3), abs=1e-15)


def test_weighted_example():
    alg = make_algebra([0.25, 0.75], [1, 2])
    T = BlockOperator(alg, [[[math.e]], np.diag([1.0, math.e**4])])
    # 0.25 * 1 + 0.75 * (0 + 4) / 2
    assert dt.log_fk_det(T) == pytest.approx(1.75, abs=1e-14)


def test_singular_is_minus_infinity():
    assert dt.log_fk_det(single(jordan(3))) == float("-inf")
    alg = make_algebra([0.5, 0.5], [1, 1])
    assert dt.log_fk_det(BlockOperator(alg, [[[1.0]], [[0.0]]])) == float("-inf")


def test_jordan_shift_gives_log_abs_lambda():
    T = single(jordan(4))
    for lam in (2.0, 1j, -0.5 + 0.5j):
        assert dt.shifted_log_det(T, lam) == pytest.approx(math.log(abs(lam)), abs=1e-12)


def test_eps_regularization_examples():
    # nilpotent 2x2: singular values 0 and 1
    v = dt.log_fk_det_eps(single(jordan(2)), 0.1)
    assert v == pytest.approx(0.5 * (math.log(0.1) + math.log(1.1)), abs=1e-15)
    with pytest.raises(NonpositiveEpsilon):
        dt.log_fk_det_eps(single(jordan(2)), 0.0)


def test_eps_decreases_to_determinant(rng):
    alg = make_algebra([0.2, 0.3, 0.5], [2, 3, 4])
    T = random_operator(alg, rng)
    vals = [dt.log_fk_det_eps(T, e) for e in (1.0, 1e-1, 1e-3, 1e-6, 1e-9)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(dt.log_fk_det(T), abs=1e-7)


def test_quad_reg_examples():
    # |0 - 0|^2 + 1 = 1
    assert dt.quad_reg_log_det(single([[0.0]]), 0, 1.0) == 0.0
    # |2 - 0|^2 + 1/4
    assert dt.quad_reg_log_det(single([[2.0]]), 0, 2.0) == pytest.approx(math.log(4.25), abs=1e-15)
    # nilpotent: |N|^2 = diag(0, 1)
    assert dt.quad_reg_log_det(single(jordan(2)), 0, 10.0) == pytest.approx(
        0.5 * (math.log(0.01) + math.log(1.01)), abs=1e-14
    )
    with pytest.raises(NonpositiveM):
        dt.quad_reg_log_det(single([[1.0]]), 0, 0.0)


def test_quad_reg_tends_to_twice_log_det(rng):
    alg = make_algebra([0.2, 0.3, 0.5], [2, 3, 4])
    T = random_operator(alg, rng)
    for lam in (0, 0.3 - 0.2j):
        exact = 2 * dt.shifted_log_det(T, lam)
        assert dt.quad_reg_log_det(T, lam, 1e6) == pytest.approx(exact, abs=1e-6)


def test_quad_reg_field_matches_pointwise(rng):
    alg = make_algebra([0.4, 0.6], [3, 2])
    T = random_operator(alg, rng)
    lams = np.array([[0, 0.5j], [1 - 1j, -0.2]])
    per = dt.quad_reg_field(T, lams, 7.0)
    total = sum(w * a for w, a in zip(alg.weights, per))
    for idx in np.ndindex(lams.shape):
        assert total[idx] == pytest.approx(dt.quad_reg_log_det(T, lams[idx], 7.0), abs=1e-13)


def test_continuity_probe_examples(rng):
    alg = make_algebra([0.2, 0.3, 0.5], [2, 3, 4])
    T = random_operator(alg, rng)
    lhs, bound, ok = dt.continuity_probe(T, 0.0)
    assert lhs == 0.0 and bound == 0.0 and ok
    lhs, bound, ok = dt.continuity_probe(T, 0.2 + 0.1j)
    assert ok and lhs <= bound
    with pytest.raises(LambdaTooLarge):
        dt.continuity_probe(T, 0.34)


def test_block_log_det_matches_lu_oracle(rng):
    for n in (1, 2, 5, 9):
        B = random_operator(make_algebra([1], [n]), rng).blocks[0]
        assert dt.block_log_det(B) == pytest.approx(log_abs_det_lu(B) / n, abs=1e-12)


@st.composite
def pair(draw):
    k = draw(st.integers(1, 3))
    dims = draw(st.lists(st.integers(1, 5), min_size=k, max_size=k))
    w = draw(st.lists(st.floats(0.1, 1.0), min_size=k, max_size=k))
    r = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    alg = make_algebra(w, dims)
    return alg, random_operator(alg, r), random_operator(alg, r), r


@given(pair())
@settings(max_examples=50, deadline=None)
def test_multiplicative_and_unitarily_invariant(p):
    alg, S, T, r = p
    lhs = dt.log_fk_det(S @ T)
    rhs = dt.log_fk_det(S) + dt.log_fk_det(T)
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))
    U = BlockOperator(alg, [random_unitary(r, n) for n in alg.dims])
    assert dt.log_fk_det(U) == pytest.approx(0.0, abs=1e-12)
    conj = U @ T @ U.adjoint()
    assert dt.log_fk_det(conj) == pytest.approx(dt.log_fk_det(T), abs=1e-10)
    assert dt.log_fk_det(T.adjoint()) == pytest.approx(dt.log_fk_det(T), abs=1e-12)


@given(pair(), st.floats(1e-3, 1.0), st.floats(1.0, 10.0))
@settings(max_examples=40, deadline=None)
def test_eps_monotone_and_log_plus_bound(p, e1, factor):
    _, _, T, _ = p
    e2 = e1 * factor
    assert dt.log_fk_det_eps(T, e1) <= dt.log_fk_det_eps(T, e2) + 1e-14
    assert dt.log_fk_det(T) <= math.log(operator_norm(T)) + 1e-12
    assert dt.log_fk_det(T) <= log_plus_moment(T) + 1e-12


@given(pair(), st.floats(0, 1 / 3), st.floats(0, 2 * math.pi))
@settings(max_examples=40, deadline=None)
def test_continuity_bound_holds(p, r, theta):
    _, _, T, _ = p
    lhs, bound, ok = dt.continuity_probe(T, r * complex(math.cos(theta), math.sin(theta)))
    assert ok, (lhs, bound)
