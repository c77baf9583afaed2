"""Spectral theory for normal block operators, one atom at a time.

Regions are finite unions of half-open rectangles, complements and real
half-lines. Eigenvalues within ``1e-12 * max(1, ||X_i||)`` of a region edge
are snapped onto the edge before the half-open membership test, which makes
the assignment deterministic; a BoundaryWarning reports each such event.
"""

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union as _U

import numpy as np

from ._parallel import map_ordered
from .algebra import BlockOperator, TruncatedField, truncate
from .errors import (
    DomainError,
    EigenspaceOrthogonalizationFailure,
    NotNormal,
    NotSelfAdjoint,
)
from .linalg import (
    abs_and_polar,
    complex_schur,
    hermitian_eig,
    hermitian_residual,
    norm2,
    normal_residual,
)
from .measures import AtomicComplexMeasure, Rectangle

BOUNDARY_TOL = 1e-12
CLUSTER_RTOL = 1e-8


class BoundaryWarning(UserWarning):
    pass


# -- regions -----------------------------------------------------------------

def _snap(values, edges, tol):
    out = values.copy()
    hit = np.zeros(values.shape, dtype=bool)
    for e in edges:
        if not np.isfinite(e):
            continue
        near = np.abs(values - e) <= tol
        out[near] = e
        hit |= near
    return out, hit


def _rect_member(rect, z, tol):
    x, hx = _snap(z.real, (rect.x0, rect.x1), tol)
    y, hy = _snap(z.imag, (rect.y0, rect.y1), tol)
    inside = (x >= rect.x0) & (x < rect.x1) & (y >= rect.y0) & (y < rect.y1)
    # only edges the point actually touches count as boundary events
    by = (y >= rect.y0) & (y <= rect.y1)
    bx = (x >= rect.x0) & (x <= rect.x1)
    return inside, (hx & by) | (hy & bx)


@dataclass(frozen=True)
class HalfLine:
    """Real half-line ``(t, inf)`` (``above``) or ``(-inf, t)``; ``closed`` adds ``t``."""

    threshold: float
    above: bool = True
    closed: bool = False

    def member(self, z, tol=BOUNDARY_TOL):
        z = np.asarray(z, dtype=complex)
        x, hit = _snap(z.real, (self.threshold,), tol)
        real = np.abs(z.imag) <= tol
        t = self.threshold
        if self.above:
            side = x >= t if self.closed else x > t
        else:
            side = x <= t if self.closed else x < t
        return real & side, hit & real

    def contains(self, z):
        return self.member(z, 0.0)[0]


@dataclass(frozen=True)
class RectUnion:
    parts: tuple

    def member(self, z, tol=BOUNDARY_TOL):
        z = np.asarray(z, dtype=complex)
        mask = np.zeros(z.shape, dtype=bool)
        hit = np.zeros(z.shape, dtype=bool)
        for p in self.parts:
            m, h = region_member(p, z, tol)
            mask |= m
            hit |= h
        return mask, hit

    def contains(self, z):
        return self.member(z, 0.0)[0]


@dataclass(frozen=True)
class Complement:
    inner: object

    def member(self, z, tol=BOUNDARY_TOL):
        m, h = region_member(self.inner, z, tol)
        return ~m, h

    def contains(self, z):
        return self.member(z, 0.0)[0]


Region = _U[Rectangle, RectUnion, Complement, HalfLine]
_REGION_TYPES = (Rectangle, RectUnion, Complement, HalfLine)


def region_member(region, z, tol=BOUNDARY_TOL):
    """Membership mask and near-boundary mask of points ``z``."""
    z = np.asarray(z, dtype=complex)
    if isinstance(region, Rectangle):
        return _rect_member(region, z, tol)
    return region.member(z, tol)


def union(*parts) -> RectUnion:
    return RectUnion(tuple(parts))


def disk_box(center, radius) -> Rectangle:
    """Axis-aligned square of half-width ``radius`` around ``center``."""
    c = complex(center)
    return Rectangle(c.real - radius, c.real + radius, c.imag - radius, c.imag + radius)


def right_half_plane(x=0.0) -> Rectangle:
    """``{Re z >= x}`` as an unbounded rectangle."""
    return Rectangle(x, np.inf, -np.inf, np.inf)


# -- per-block spectral data -------------------------------------------------

class NormalEigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    hermitian: bool


def _orthonormalize_clusters(w, U, scale):
    """Re-orthonormalize eigenvectors inside numerically-equal eigenvalue clusters."""
    thr = CLUSTER_RTOL * max(scale, 1.0)
    n = w.size
    seen = np.zeros(n, dtype=bool)
    U = U.copy()
    for j in range(n):
        if seen[j]:
            continue
        idx = np.flatnonzero((np.abs(w - w[j]) <= thr) & ~seen)
        seen[idx] = True
        if idx.size > 1:
            Q, R = np.linalg.qr(U[:, idx])
            if np.min(np.abs(np.diag(R))) < 1e-8:
                raise EigenspaceOrthogonalizationFailure(
                    f"eigenvectors for cluster near {w[j]} are linearly dependent"
                )
            U[:, idx] = Q
    return U


def normal_eig(block, atom=0) -> NormalEigenSystem:
    """Orthonormal eigensystem of a normal block.

    Hermitian blocks use the Hermitian solver; other normal blocks use the
    Schur vectors of the QR oracle (a normal Schur form is diagonal).
    """
    scale = norm2(block)
    if hermitian_residual(block) <= 1e-12 * (1.0 + scale):
        w, U = hermitian_eig(block)
        return NormalEigenSystem(w, U, True)
    res = normal_residual(block)
    if res > 1e-10 * (1.0 + scale ** 2):
        raise NotNormal(atom, res)
    R, Z, _ = complex_schur(block)
    off = norm2(np.triu(R, 1))
    if off > 1e-8 * (1.0 + scale):
        raise EigenspaceOrthogonalizationFailure(
            f"block {atom}: Schur form of a normal block has off-diagonal norm {off:.3e}"
        )
    w = np.diag(R).copy()
    Z = _orthonormalize_clusters(w, Z, scale)
    return NormalEigenSystem(w, Z, False)


def _eigs(X: BlockOperator):
    return map_ordered(lambda ib: normal_eig(ib[1], ib[0]), list(enumerate(X.blocks)))


def is_normal_operator(X: BlockOperator) -> bool:
    """Normality of a decomposable operator, decided block by block."""
    return all(
        normal_residual(b) <= 1e-10 * (1.0 + norm2(b) ** 2) for b in X.blocks
    )


def require_normal(X: BlockOperator):
    for i, b in enumerate(X.blocks):
        res = normal_residual(b)
        if res > 1e-10 * (1.0 + norm2(b) ** 2):
            raise NotNormal(i, res)


def require_self_adjoint(T: BlockOperator):
    for i, b in enumerate(T.blocks):
        res = hermitian_residual(b)
        if res > 1e-12 * (1.0 + norm2(b)):
            raise NotSelfAdjoint(i, res)


class Spectrum(NamedTuple):
    per_atom: list
    points: np.ndarray  # union over atoms, merged at 1e-10


def spectrum(X: BlockOperator) -> Spectrum:
    """Eigenvalue multisets per atom and their union.

    Raises NotNormal naming the first offending atom.
    """
    require_normal(X)
    per = [e.eigenvalues.astype(complex) for e in _eigs(X)]
    allpts = np.concatenate(per)
    pts = AtomicComplexMeasure.from_points(allpts, np.ones(allpts.size)).points
    return Spectrum(per, pts)


# -- calculus -----------------------------------------------------------------

@dataclass(frozen=True)
class SpectralProjection:
    operator: BlockOperator

    def residual(self) -> float:
        """max_i max(||P_i^2 - P_i||, ||P_i - P_i*||)."""
        out = 0.0
        for P in self.operator.blocks:
            out = max(out, norm2(P @ P - P), norm2(P - P.conj().T))
        return out

    def rank(self):
        return [int(round(np.trace(P).real)) for P in self.operator.blocks]


def _apply(eig: NormalEigenSystem, values):
    U = eig.eigenvectors
    return (U * values) @ U.conj().T


def _region_values(eig, region, atom, scale):
    tol = BOUNDARY_TOL * max(1.0, scale)
    mask, hit = region_member(region, eig.eigenvalues.astype(complex), tol)
    if np.any(hit):
        warnings.warn(
            f"block {atom}: eigenvalue(s) {eig.eigenvalues[hit].tolist()} within {tol:.1e} "
            "of the region boundary",
            BoundaryWarning,
            stacklevel=3,
        )
    return mask.astype(float)


def borel_calculus(X: BlockOperator, f) -> BlockOperator:
    """``f(X)`` computed per block through the spectral decomposition.

    ``f`` is either a region (giving the indicator, identical to
    ``spectral_projection``) or a vectorized callable on the eigenvalue
    array. Hermitian blocks pass real eigenvalues, other normal blocks
    complex ones.
    """
    require_normal(X)
    eigs = _eigs(X)
    out = []
    for i, (b, e) in enumerate(zip(X.blocks, eigs)):
        if not isinstance(f, _REGION_TYPES):
            with np.errstate(all="ignore"):
                vals = np.asarray(f(e.eigenvalues))
            vals = np.broadcast_to(vals, e.eigenvalues.shape)
            if not np.all(np.isfinite(vals)):
                bad = e.eigenvalues[~np.isfinite(vals)]
                raise DomainError(f"block {i}: f undefined at {bad.tolist()}")
        else:
            vals = _region_values(e, f, i, norm2(b))
        out.append(_apply(e, vals))
    return BlockOperator(X.algebra, out)


def spectral_projection(X: BlockOperator, region) -> SpectralProjection:
    """``E_X(B)`` assembled from the per-block eigenprojections."""
    return SpectralProjection(borel_calculus(X, region))


def polynomial_calculus(X: BlockOperator, coeffs) -> BlockOperator:
    """``g(X, X*) = sum_{p,q} c[p][q] X^p (X*)^q`` by matrix products.

    Independent of any eigendecomposition; for normal ``X`` it agrees with
    the functional calculus of ``z -> sum c[p][q] z^p conj(z)^q``.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    out = []
    for b in X.blocks:
        n = b.shape[0]
        bh = b.conj().T
        pw = [np.eye(n, dtype=complex)]
        qw = [np.eye(n, dtype=complex)]
        for _ in range(c.shape[0] - 1):
            pw.append(pw[-1] @ b)
        for _ in range(c.shape[1] - 1):
            qw.append(qw[-1] @ bh)
        acc = np.zeros((n, n), dtype=complex)
        for p in range(c.shape[0]):
            for q in range(c.shape[1]):
                if c[p, q] != 0:
                    acc += c[p, q] * (pw[p] @ qw[q])
        out.append(acc)
    return BlockOperator(X.algebra, out)


def chebyshev_calculus(T: BlockOperator, coeffs, interval) -> BlockOperator:
    """Chebyshev series ``sum c_k T_k(s)`` of a self-adjoint operator, by the
    three-term recurrence on matrices, with ``s`` the affine image of ``T``
    from ``interval`` onto ``[-1, 1]``."""
    a, b = interval
    out = []
    for blk in T.blocks:
        n = blk.shape[0]
        eye = np.eye(n, dtype=complex)
        S = (2.0 * blk - (a + b) * eye) / (b - a)
        t0, t1 = eye, S
        acc = coeffs[0] * t0
        if len(coeffs) > 1:
            acc = acc + coeffs[1] * t1
        for ck in coeffs[2:]:
            t0, t1 = t1, 2.0 * S @ t1 - t0
            acc = acc + ck * t1
        out.append(acc)
    return BlockOperator(T.algebra, out)


def cayley(T: BlockOperator) -> BlockOperator:
    """``(T + i)(T - i)^-1`` per block; blocks must be Hermitian."""
    require_self_adjoint(T)

    def one(b):
        eye = np.eye(b.shape[0])
        return np.linalg.solve((b - 1j * eye).T, (b + 1j * eye).T).T

    return T.map(one)


def inverse_cayley(U: BlockOperator) -> BlockOperator:
    """``i (U + 1)(U - 1)^-1``; requires ``1`` outside every block spectrum."""

    def one(u):
        eye = np.eye(u.shape[0])
        return 1j * np.linalg.solve((u - eye).T, (u + eye).T).T

    return U.map(one)


def polar(T: BlockOperator):
    """Blockwise polar decomposition ``T = V |T|``; returns ``(V, |T|)``."""
    parts = map_ordered(abs_and_polar, T.blocks)
    V = BlockOperator(T.algebra, [p[0] for p in parts])
    P = BlockOperator(T.algebra, [p[1] for p in parts])
    return V, P


def absolute_value(T: BlockOperator) -> BlockOperator:
    return polar(T)[1]


def distribution(T: BlockOperator) -> AtomicComplexMeasure:
    """Spectral distribution ``sum_i mu_i (1/n_i) sum_j delta_{lambda_ij}`` on R."""
    require_self_adjoint(T)
    pts, ms = [], []
    for w, b in zip(T.algebra.weights, T.blocks):
        ev = hermitian_eig(b).eigenvalues
        pts.append(ev.astype(complex))
        ms.append(np.full(ev.size, w / ev.size))
    return AtomicComplexMeasure.from_points(np.concatenate(pts), np.concatenate(ms))


def truncated_calculus(F: TruncatedField, N: int, f: Callable):
    """Self-adjoint calculus for an unbounded field, realized at level ``N``.

    Returns ``(algebra, f(T_N))`` with ``T_N`` the level-N truncation.
    """
    alg, T = truncate(F, N)
    return alg, borel_calculus(T, f)
