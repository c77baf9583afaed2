import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brownlab import algebra as al
from brownlab.algebra import BlockOperator, make_algebra, trace
from brownlab.errors import AlgebraMismatch, DimensionMismatch, EmptySpace, NonpositiveWeight, RuleFailure
from brownlab.verify import random_operator

from conftest import single


def test_single_atom_trace_is_normalized_matrix_trace():
    alg = make_algebra([1], [3])
    assert alg.atom_count == 1
    A = np.arange(9.0).reshape(3, 3)
    assert trace(BlockOperator(alg, [A])) == pytest.approx(np.trace(A) / 3)


def test_three_atom_construction():
    alg = make_algebra([0.2, 0.3, 0.5], [2, 3, 4])
    assert alg.weights == (0.2, 0.3, 0.5)
    assert alg.dims == (2, 3, 4)
    assert alg.normalization == 1.0
    assert trace(alg.identity()) == pytest.approx(1.0, abs=1e-12)


def test_weights_normalized_and_factor_reported():
    alg = make_algebra([2, 2], [1, 1])
    assert alg.weights == (0.5, 0.5)
    assert alg.normalization == 4.0


@pytest.mark.parametrize(
    "weights,dims,exc",
    [([], [], EmptySpace), ([1, 0], [1, 1], NonpositiveWeight), ([1, -1], [1, 1], NonpositiveWeight),
     ([1, 1], [1], DimensionMismatch), ([1], [0], DimensionMismatch), ([1], [1.5], DimensionMismatch)],
)
def test_make_algebra_errors(weights, dims, exc):
    with pytest.raises(exc):
        make_algebra(weights, dims)


def test_block_shape_mismatch():
    alg = make_algebra([1, 1], [2, 1])
    with pytest.raises(DimensionMismatch):
        BlockOperator(alg, [np.eye(2), np.eye(2)])
    with pytest.raises(DimensionMismatch):
        BlockOperator(alg, [np.eye(2)])


def test_trace_examples():
    alg = make_algebra([0.5, 0.5], [1, 1])
    assert trace(alg.identity()) == 1
    assert trace(BlockOperator(alg, [[[2]], [[4]]])) == pytest.approx(3)
    alg2 = make_algebra([0.2, 0.8], [2, 3])
    T = BlockOperator(alg2, [np.eye(2), np.zeros((3, 3))])
    assert trace(T) == pytest.approx(0.2 * 1 + 0.8 * 0, abs=1e-15)


def test_star_ops(T3, three_atom, rng):
    assert T3.adjoint().adjoint().max_block_distance(T3) == 0
    assert (T3 @ three_atom.identity()).max_block_distance(T3) == 0
    B = random_operator(three_atom, rng)
    prod = T3 @ B
    for a, b, c in zip(T3.blocks, B.blocks, prod.blocks):
        np.testing.assert_array_equal(c, a @ b)
    np.testing.assert_array_equal(al.add(T3, B).blocks[1], T3.blocks[1] + B.blocks[1])
    np.testing.assert_array_equal(al.sub(T3, B).blocks[2], T3.blocks[2] - B.blocks[2])
    np.testing.assert_array_equal(al.scalar_mul(2j, T3).blocks[0], 2j * T3.blocks[0])


def test_algebra_mismatch(T3):
    other = random_operator(make_algebra([0.5, 0.5], [2, 3]), np.random.default_rng(0))
    with pytest.raises(AlgebraMismatch):
        T3 + other
    with pytest.raises(AlgebraMismatch):
        T3 @ other


def test_operator_norm_examples():
    alg = make_algebra([1, 1, 1], [1, 1, 1])
    assert al.operator_norm(alg.identity()) == pytest.approx(1)
    assert al.operator_norm(BlockOperator(alg, [[[0.5]], [[2.0]], [[1.0]]])) == 2.0
    # N*N = diag(0, 25): singular value 5
    assert al.operator_norm(single([[0, 5], [0, 0]])) == pytest.approx(5)


def test_embed_diagonal():
    alg = make_algebra([0.25, 0.75], [2, 2])
    ones = al.embed_diagonal(al.DiagonalOperator(alg, (1, 1)))
    assert ones.max_block_distance(alg.identity()) == 0
    D = al.embed_diagonal(al.DiagonalOperator(alg, (1j, -1j)))
    np.testing.assert_array_equal(D.blocks[0], 1j * np.eye(2))
    np.testing.assert_array_equal(D.blocks[1], -1j * np.eye(2))
    assert trace(D) == pytest.approx(0.25 * 1j + 0.75 * -1j)


def test_commutes_with_diagonals(T3, three_atom):
    assert al.commutes_with_diagonals(T3) == (True, 0.0)
    assert al.commutes_with_diagonals(three_atom.identity()) == (True, 0.0)


def test_log_plus_moment_examples():
    assert al.log_plus_moment(single(np.diag([0.5, 1.0]))) == 0.0
    assert al.log_plus_moment(single([[math.e]])) == pytest.approx(1.0, abs=1e-15)
    alg = make_algebra([0.5, 0.5], [1, 1])
    T = BlockOperator(alg, [[[math.e**2]], [[math.e**-3]]])
    assert al.log_plus_moment(T) == pytest.approx(0.5 * 2 + 0.5 * 0, abs=1e-15)


def test_truncate_constant_rule():
    alg, T = al.truncate(al.constant_field(1.0), 7)
    assert alg.atom_count == 7
    assert T.max_block_distance(alg.identity()) == 0
    assert sum(alg.weights) == pytest.approx(1, abs=1e-12)


def test_truncate_geometric_weights_renormalized():
    alg, T = al.truncate(al.geometric_field(), 5)
    raw = np.array([2.0**-i for i in range(1, 6)])
    np.testing.assert_allclose(alg.weights, raw / raw.sum(), rtol=1e-15)
    np.testing.assert_allclose([b[0, 0].real for b in T.blocks], [2.0**i for i in range(1, 6)], rtol=1e-14)


def test_geometric_partial_sums_closed_form():
    # sum_{i<=N} i 2^-i = 2 - (N + 2) 2^-N
    d = al.log_plus_diagnostic(al.geometric_field(), 20)
    for N, S in enumerate(d.partial_sums, start=1):
        assert S == pytest.approx((2 - (N + 2) * 2.0**-N) * math.log(2), abs=1e-12)
    assert all(b >= a for a, b in zip(d.partial_sums, d.partial_sums[1:]))
    assert d.cauchy_ok
    assert d.partial_sums[-1] <= 2 * math.log(2)


def test_normalized_log_plus_matches_truncation():
    F = al.geometric_field()
    d = al.log_plus_diagnostic(F, 8)
    for N in (1, 4, 8):
        _, T = al.truncate(F, N)
        assert al.log_plus_moment(T) == pytest.approx(d.normalized[N - 1], rel=1e-12)


def test_doubly_exponential_partial_sums_linear():
    d = al.log_plus_diagnostic(al.doubly_exponential_field(), 20)
    for N, S in enumerate(d.partial_sums, start=1):
        assert S == pytest.approx(N * math.log(2), abs=1e-12)
    assert d.cauchy_ok is None


def test_truncate_overflow_is_rule_failure():
    with pytest.raises(RuleFailure) as info:
        al.truncate(al.doubly_exponential_field(), 12)
    # 2^(2^10) sits right at the double limit; 2^(2^11) cannot
    assert info.value.index in (10, 11)
    al.truncate(al.doubly_exponential_field(), 9)


def test_rule_exception_wrapped():
    F = al.TruncatedField(lambda i: 1.0, lambda i: 1 / (i - 3))
    with pytest.raises(RuleFailure) as info:
        al.truncate(F, 5)
    assert info.value.index == 3


@st.composite
def operator_pairs(draw):
    k = draw(st.integers(1, 4))
    dims = draw(st.lists(st.integers(1, 5), min_size=k, max_size=k))
    weights = draw(st.lists(st.floats(0.05, 5.0), min_size=k, max_size=k))
    seed = draw(st.integers(0, 2**32 - 1))
    alg = make_algebra(weights, dims)
    r = np.random.default_rng(seed)
    return random_operator(alg, r), random_operator(alg, r)


@given(operator_pairs(), st.complex_numbers(max_magnitude=3, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_trace_properties(pair, c):
    A, B = pair
    tA, tB = trace(A), trace(B)
    assert abs(trace(A + B * c) - tA - c * tB) <= 1e-12 * (1 + abs(tA) + abs(c * tB)) * 10
    ab, ba = trace(A @ B), trace(B @ A)
    assert abs(ab - ba) <= 1e-10 * (1 + abs(ab))
    pos = trace(A.adjoint() @ A)
    assert pos.real > 0 and abs(pos.imag) <= 1e-12 * pos.real
    per = sum(w * b.trace() / b.shape[0] for w, b in zip(A.algebra.weights, A.blocks))
    assert abs(tA - per) <= 1e-12
    nA = al.operator_norm(A)
    assert abs(al.operator_norm(A.adjoint() @ A) - nA**2) <= 1e-9 * nA**2
    assert al.commutes_with_diagonals(A)[1] == 0.0


def test_trace_faithful_on_zero():
    alg = make_algebra([0.3, 0.7], [2, 2])
    Z = alg.zero()
    assert trace(Z.adjoint() @ Z) == 0
