import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brownlab import spectral as sp
from brownlab.algebra import BlockOperator, make_algebra, trace
from brownlab.errors import DomainError, NotNormal, NotSelfAdjoint
from brownlab.measures import Rectangle
from brownlab.verify import random_hermitian, random_normal, random_unitary

from conftest import jordan, single


def test_spectrum_diagonal_and_hermitian():
    s = sp.spectrum(single(np.diag([1.0, 2.0])))
    np.testing.assert_allclose(np.sort(s.per_atom[0].real), [1, 2])
    s = sp.spectrum(single([[0, 1], [1, 0]]))
    np.testing.assert_allclose(np.sort(s.per_atom[0].real), [-1, 1], atol=1e-15)


def test_spectrum_union_merges_atoms():
    alg = make_algebra([0.5, 0.5], [1, 2])
    X = BlockOperator(alg, [[[1.0]], np.diag([1.0, 1j])])
    s = sp.spectrum(X)
    assert len(s.points) == 2
    np.testing.assert_allclose(sorted(s.points, key=lambda z: (z.real, z.imag)), [1j, 1])


def test_spectrum_of_normal_rotation():
    # rotation by 90 degrees: eigenvalues +-i
    s = sp.spectrum(single([[0, -1], [1, 0]]))
    np.testing.assert_allclose(sorted(s.per_atom[0].imag), [-1, 1], atol=1e-14)
    np.testing.assert_allclose(s.per_atom[0].real, 0, atol=1e-14)


def test_not_normal_names_atom():
    alg = make_algebra([0.5, 0.5], [1, 2])
    X = BlockOperator(alg, [[[1.0]], jordan(2)])
    with pytest.raises(NotNormal) as info:
        sp.spectrum(X)
    assert info.value.atom == 1
    with pytest.raises(NotNormal):
        sp.spectral_projection(X, Rectangle(-1, 1, -1, 1))


def test_projection_examples():
    T = single(np.diag([-1.0, 0.5, 2.0]))
    E = sp.spectral_projection(T, sp.HalfLine(0.0))
    np.testing.assert_allclose(E.operator.blocks[0], np.diag([0, 1, 1]), atol=1e-15)
    assert E.rank() == [2]
    assert E.residual() <= 1e-14
    E = sp.spectral_projection(T, Rectangle(0, 1, -1, 1))
    assert E.rank() == [1]


def test_projection_counts_eigenvalues_per_block(rng):
    alg = make_algebra([0.2, 0.3, 0.5], [2, 3, 4])
    X = random_normal(alg, rng)
    box = Rectangle(-0.3, 0.7, -0.5, 0.4)
    E = sp.spectral_projection(X, box)
    expect = [int(np.sum(box.contains(ev))) for ev in sp.spectrum(X).per_atom]
    assert E.rank() == expect
    assert E.residual() <= 1e-10


@pytest.mark.filterwarnings("ignore::brownlab.spectral.BoundaryWarning")
def test_half_line_closed_and_below():
    T = single(np.diag([-1.0, 0.0, 1.0]))
    assert sp.spectral_projection(T, sp.HalfLine(0.0, closed=True)).rank() == [2]
    assert sp.spectral_projection(T, sp.HalfLine(0.0, above=False)).rank() == [1]
    assert sp.spectral_projection(T, sp.HalfLine(0.0, above=False, closed=True)).rank() == [2]


def test_boundary_warning_and_half_open_assignment():
    T = single(np.diag([0.0, 1.0 + 1e-14]))
    with pytest.warns(sp.BoundaryWarning):
        E = sp.spectral_projection(T, Rectangle(0, 1, -1, 1))
    # 0 is on the closed left edge; 1 + 1e-14 snaps onto the open right edge
    np.testing.assert_allclose(E.operator.blocks[0], np.diag([1, 0]), atol=1e-15)


def test_no_warning_away_from_boundary():
    with warnings.catch_warnings():
        warnings.simplefilter("error", sp.BoundaryWarning)
        sp.spectral_projection(single(np.diag([0.5])), Rectangle(0, 1, -1, 1))


def _instances(seed):
    r = np.random.default_rng(seed)
    alg = make_algebra([0.2, 0.3, 0.5], [2, 3, 4])
    return [random_hermitian(alg, r), random_normal(alg, r)]


boxes = st.tuples(
    st.floats(-2, 2), st.floats(0.05, 2), st.floats(-2, 2), st.floats(0.05, 2)
).map(lambda t: Rectangle(t[0], t[0] + t[1], t[2], t[2] + t[3]))


@given(st.integers(0, 10**6), boxes, boxes)
@settings(max_examples=40, deadline=None)
def test_projection_additive_and_complement(seed, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sp.BoundaryWarning)
        # make b disjoint from a by shifting it to the right of a
        b = Rectangle(a.x1 + 0.01, a.x1 + 0.01 + b.width, b.y0, b.y1)
        for X in _instances(seed):
            Ea = sp.spectral_projection(X, a).operator
            Eb = sp.spectral_projection(X, b).operator
            Eu = sp.spectral_projection(X, sp.union(a, b)).operator
            assert Eu.max_block_distance(Ea + Eb) <= 1e-10
            Ec = sp.spectral_projection(X, sp.Complement(a)).operator
            assert (Ea + Ec).max_block_distance(X.algebra.identity()) <= 1e-10
            assert (Ea @ Eb).max_block_distance(X.algebra.zero()) <= 1e-10


def test_borel_indicator_equals_projection(rng, three_atom):
    X = random_normal(three_atom, rng)
    box = Rectangle(-0.5, 0.5, -0.5, 0.5)
    assert sp.borel_calculus(X, box).max_block_distance(sp.spectral_projection(X, box).operator) == 0


def test_borel_agrees_with_polynomial_calculus(rng, three_atom):
    X = random_normal(three_atom, rng)
    # g(z) = 1 + 2z - z conj(z) + 0.5 z^2 conj(z)
    c = np.zeros((3, 2), dtype=complex)
    c[0, 0], c[1, 0], c[1, 1], c[2, 1] = 1, 2, -1, 0.5
    P = sp.polynomial_calculus(X, c)
    B = sp.borel_calculus(X, lambda z: 1 + 2 * z - z * np.conj(z) + 0.5 * z**2 * np.conj(z))
    assert P.max_block_distance(B) <= 1e-12


def test_borel_agrees_with_chebyshev_for_exp(rng, three_atom):
    T = random_hermitian(three_atom, rng)
    a, b = -4.0, 4.0
    k = np.arange(40)
    nodes = np.cos(np.pi * (k + 0.5) / 40)
    coeffs = np.polynomial.chebyshev.chebfit(nodes, np.exp(0.5 * (b - a) * nodes + 0.5 * (a + b)), 39)
    C = sp.chebyshev_calculus(T, coeffs, (a, b))
    B = sp.borel_calculus(T, np.exp)
    assert C.max_block_distance(B) <= 1e-12


def test_borel_domain_error():
    with pytest.raises(DomainError):
        sp.borel_calculus(single(np.diag([0.0, 1.0])), np.log)


def test_cayley_examples():
    C = sp.cayley(single([[0.0]]))
    np.testing.assert_allclose(C.blocks[0], [[-1]], atol=1e-15)
    C = sp.cayley(single([[1.0]]))
    np.testing.assert_allclose(C.blocks[0], [[1j]], atol=1e-15)


def test_cayley_rejects_non_hermitian():
    with pytest.raises(NotSelfAdjoint):
        sp.cayley(single(jordan(2)))


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_cayley_unitary_and_inverts(seed):
    alg = make_algebra([0.2, 0.3, 0.5], [2, 3, 4])
    T = random_hermitian(alg, np.random.default_rng(seed)) * 3.0
    U = sp.cayley(T)
    I = alg.identity()
    assert (U.adjoint() @ U).max_block_distance(I) <= 1e-10
    assert sp.inverse_cayley(U).max_block_distance(T) <= 1e-9 * (1 + max(np.abs(b).max() for b in T.blocks))
    # agrees with the scalar map on the spectrum
    B = sp.borel_calculus(T, lambda x: (x + 1j) / (x - 1j))
    assert B.max_block_distance(U) <= 1e-10


def test_cayley_blockwise_equals_global(rng, three_atom):
    T = random_hermitian(three_atom, rng)
    U = sp.cayley(T)
    one = single(T.to_dense())
    Ud = sp.cayley(one)
    np.testing.assert_array_equal(
        np.abs(U.to_dense() - Ud.blocks[0]) <= 1e-14, True
    )


def test_polar_examples():
    V, P = sp.polar(single(np.diag([-2.0, 3.0])))
    np.testing.assert_allclose(P.blocks[0], np.diag([2, 3]), atol=1e-15)
    np.testing.assert_allclose(V.blocks[0], np.diag([-1, 1]), atol=1e-15)
    V, P = sp.polar(single(jordan(2)))
    np.testing.assert_allclose(P.blocks[0], np.diag([0, 1]), atol=1e-15)
    np.testing.assert_allclose(V.blocks[0], jordan(2), atol=1e-15)
    V, P = sp.polar(single([[0.0, 0.0], [0.0, 0.0]]))
    assert np.all(V.blocks[0] == 0) and np.all(P.blocks[0] == 0)


def test_polar_of_unitary_is_itself(rng):
    Q = random_unitary(rng, 5)
    V, P = sp.polar(single(Q))
    np.testing.assert_allclose(V.blocks[0], Q, atol=1e-13)
    np.testing.assert_allclose(P.blocks[0], np.eye(5), atol=1e-13)


def test_distribution_examples():
    mu = sp.distribution(single(np.diag([1.0, 1.0, 3.0])))
    np.testing.assert_allclose(mu.points, [1, 3])
    np.testing.assert_allclose(mu.masses, [2 / 3, 1 / 3])
    alg = make_algebra([0.25, 0.75], [1, 1])
    mu = sp.distribution(BlockOperator(alg, [[[-1.0]], [[2.0]]]))
    np.testing.assert_allclose(mu.masses, [0.25, 0.75])
    assert mu.total_mass == pytest.approx(1)


def test_distribution_moments_match_trace(rng, three_atom):
    T = random_hermitian(three_atom, rng)
    mu = sp.distribution(T)
    for k in range(1, 5):
        Tk = three_atom.identity()
        for _ in range(k):
            Tk = Tk @ T
        assert np.sum(mu.masses * mu.points.real**k) == pytest.approx(trace(Tk).real, abs=1e-12)


def test_distribution_rejects_non_hermitian():
    with pytest.raises(NotSelfAdjoint):
        sp.distribution(single([[1j]]))


def test_truncated_calculus_bounded_function():
    from brownlab.algebra import geometric_field

    alg, A = sp.truncated_calculus(geometric_field(), 6, lambda x: 1 / (1 + x))
    vals = [b[0, 0].real for b in A.blocks]
    np.testing.assert_allclose(vals, [1 / (1 + 2.0**i) for i in range(1, 7)], rtol=1e-14)
