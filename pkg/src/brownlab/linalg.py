"""Dense complex matrix kernel.

Hermitian eigenproblems and singular values go through LAPACK (numpy).
General complex eigenvalues come from a self-contained Hessenberg + shifted
QR Schur solver, so that eigenvalue-based quantities (Brown measures) and
singular-value-based quantities (determinants) are computed along
independent numerical paths.
"""

from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceFailure, DomainError, NotHermitian

ABS_FLOOR = 1e-12

# Sizes for which the QR oracle is exercised by the test-suite.
ORACLE_MAX_DIM = 64


class HermitianEigenSystem(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # unitary, columns


class SchurForm(NamedTuple):
    triangular: np.ndarray
    unitary: np.ndarray
    iterations: int


def as_matrix(A) -> np.ndarray:
    """Validate ``A`` as a finite square complex matrix and return a copy."""
    M = np.array(A, dtype=complex)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def norm2(A) -> float:
    """Spectral norm (largest singular value)."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def hermitian_residual(A) -> float:
    A = np.asarray(A)
    return norm2(A - A.conj().T)


def is_hermitian(A, rtol=1e-12) -> bool:
    return hermitian_residual(A) <= rtol * (1.0 + norm2(A))


def normal_residual(A) -> float:
    A = np.asarray(A)
    Ah = A.conj().T
    return norm2(Ah @ A - A @ Ah)


def is_normal(A, rtol=1e-10) -> bool:
    return normal_residual(A) <= rtol * (1.0 + norm2(A) ** 2)


def hermitian_eig(A) -> HermitianEigenSystem:
    """Eigendecomposition ``A = U diag(w) U*`` of a Hermitian matrix.

    Raises
    ------
    NotHermitian
        If ``||A - A*|| > 1e-12 (1 + ||A||)``.
    """
    A = as_matrix(A)
    res = hermitian_residual(A)
    if res > 1e-12 * (1.0 + norm2(A)):
        raise NotHermitian(f"matrix is not Hermitian (residual {res:.3e})")
    A = 0.5 * (A + A.conj().T)
    w, U = np.linalg.eigh(A)
    return HermitianEigenSystem(w, U)


def hermitian_function(A, f: Callable) -> np.ndarray:
    """Apply ``f`` to a Hermitian matrix through its eigenvalues.

    ``f`` receives the real eigenvalue array and must return an array of the
    same length (real or complex). Non-finite outputs raise DomainError.
    """
    w, U = hermitian_eig(A)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w))
    if fw.shape != w.shape:
        fw = np.broadcast_to(fw, w.shape)
    if not np.all(np.isfinite(fw)):
        bad = w[~np.isfinite(fw)]
        raise DomainError(f"function undefined at eigenvalue(s) {bad.tolist()}")
    return (U * fw) @ U.conj().T


def abs_and_polar(T):
    """Polar decomposition ``T = V P`` with ``P = (T*T)^(1/2)``.

    ``V`` is the partial isometry that vanishes on ``ker P``; singular values
    below ``1e-13 * max(1, ||T||)`` are treated as zero.

    Returns
    -------
    (V, P)
    """
    T = as_matrix(T)
    W, s, Zh = np.linalg.svd(T)
    cutoff = 1e-13 * max(1.0, s[0] if s.size else 0.0)
    keep = s > cutoff
    Z = Zh.conj().T
    P = (Z * np.where(keep, s, 0.0)) @ Zh
    P = 0.5 * (P + P.conj().T)
    V = W[:, keep] @ Zh[keep, :]
    return V, P


def range_projection(P, rtol=1e-13) -> np.ndarray:
    """Orthogonal projection onto the range of a positive matrix."""
    w, U = hermitian_eig(P)
    keep = w > rtol * max(1.0, float(np.max(np.abs(w))))
    return U[:, keep] @ U[:, keep].conj().T


def hessenberg(A):
    """Householder reduction ``A = Q H Q*`` with ``H`` upper Hessenberg."""
    H = as_matrix(A)
    n = H.shape[0]
    Q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H, Q


def _givens(a, b):
    """Return (c, s) with real c such that [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]."""
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    r = np.hypot(abs(a), abs(b))
    c = abs(a) / r
    s = (a / abs(a)) * np.conj(b) / r
    return c, s


def _wilkinson_shift(a, b, c, d):
    # eigenvalue of [[a, b], [c, d]] closest to d
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    if abs(half + disc) < abs(half - disc):
        disc = -disc
    denom = half + disc
    if denom == 0:
        return d
    return d - b * c / denom


def complex_schur(A, max_sweeps=60) -> SchurForm:
    """Complex Schur form ``A = Z R Z*`` via Hessenberg reduction and
    single-shift QR with Wilkinson shifts and exceptional shifts on stagnation.

    Reliable for dimensions up to ``ORACLE_MAX_DIM``; larger inputs work but
    are not covered by tests.
    """
    H, Z = hessenberg(A)
    n = H.shape[0]
    eps = np.finfo(float).eps
    scale = max(np.linalg.norm(H), np.finfo(float).tiny)
    hi = n - 1
    its = 0
    total = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(H[lo, lo - 1])
            ref = abs(H[lo, lo]) + abs(H[lo - 1, lo - 1])
            if ref == 0.0:
                ref = scale
            if sub <= eps * ref:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        if its > max_sweeps:
            raise ConvergenceFailure(
                "QR iteration stalled",
                dim=n, window=(lo, hi), iterations=total,
                subdiagonal=float(abs(H[hi, hi - 1])),
            )
        if its and its % 11 == 0:
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1]) * np.exp(1j * its)
        else:
            mu = _wilkinson_shift(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        rots = []
        for k in range(lo, hi + 1):
            H[k, k] -= mu
        for k in range(lo, hi):
            c, s = _givens(H[k, k], H[k + 1, k])
            rows = H[k:k + 2, k:].copy()
            H[k, k:] = c * rows[0] + s * rows[1]
            H[k + 1, k:] = -np.conj(s) * rows[0] + c * rows[1]
            H[k + 1, k] = 0.0
            rots.append((c, s))
        for k, (c, s) in zip(range(lo, hi), rots):
            top = min(k + 2, hi) + 1
            cols = H[:top, k:k + 2].copy()
            H[:top, k] = c * cols[:, 0] + np.conj(s) * cols[:, 1]
            H[:top, k + 1] = -s * cols[:, 0] + c * cols[:, 1]
            zc = Z[:, k:k + 2].copy()
            Z[:, k] = c * zc[:, 0] + np.conj(s) * zc[:, 1]
            Z[:, k + 1] = -s * zc[:, 0] + c * zc[:, 1]
        for k in range(lo, hi + 1):
            H[k, k] += mu
        its += 1
        total += 1
    return SchurForm(np.triu(H), Z, total)


def complex_eigenvalues_oracle(A) -> np.ndarray:
    """All eigenvalues of ``A`` with algebraic multiplicity.

    Raises ConvergenceFailure when the QR iteration stalls or the computed
    eigenvalues fail the trace consistency check.
    """
    A = as_matrix(A)
    n = A.shape[0]
    R = complex_schur(A).triangular
    ev = np.diag(R).copy()
    drift = abs(ev.sum() - np.trace(A))
    if drift > 1e-8 * n * (1.0 + norm2(A)):
        raise ConvergenceFailure("eigenvalues do not reproduce the trace", drift=float(drift), dim=n)
    return ev


def log_abs_det_lu(A) -> float:
    """``log|det A|`` by Gaussian elimination with partial pivoting.

    Returns ``-inf`` for an exactly singular pivot.
    """
    M = as_matrix(A)
    n = M.shape[0]
    total = 0.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if M[p, k] == 0:
            return float("-inf")
        if p != k:
            M[[k, p]] = M[[p, k]]
        total += np.log(abs(M[k, k]))
        M[k + 1:, k:] -= np.outer(M[k + 1:, k] / M[k, k], M[k, k:])
    return float(total)
