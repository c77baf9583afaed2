"""Fuglede-Kadison determinants of block operators.

``log Delta(T) = tau(log|T|) = sum_i mu_i (1/n_i) sum_j log s_ij``, with
``s_ij`` the singular values of block ``i``. Values are plain floats;
``-inf`` encodes a singular operator.
"""

import math

import numpy as np

from ._parallel import map_ordered
from .algebra import BlockOperator
from .errors import LambdaTooLarge, NonpositiveEpsilon, NonpositiveM

NEG_INF = float("-inf")
SINGULAR_RTOL = 1e-13


def block_log_det(block) -> float:
    """``log Delta`` of one block under its normalized trace, i.e. ``log|det|/n``."""
    s = np.linalg.svd(block, compute_uv=False)
    if s.size == 0:
        return 0.0
    if s[-1] <= SINGULAR_RTOL * max(1.0, s[0]):
        return NEG_INF
    return float(np.sum(np.log(s))) / s.size


def _weighted(T, per_block):
    total = 0.0
    for w, v in zip(T.algebra.weights, per_block):
        if v == NEG_INF:
            return NEG_INF
        total += w * v
    return total


def log_fk_det(T: BlockOperator) -> float:
    """``log Delta(T)``; ``-inf`` if some block has a (numerically) zero singular value."""
    return _weighted(T, map_ordered(block_log_det, T.blocks))


def log_fk_det_eps(T: BlockOperator, eps: float) -> float:
    """``tau(log(|T| + eps))``; finite for every ``eps > 0``."""
    if not eps > 0:
        raise NonpositiveEpsilon(f"eps must be positive, got {eps!r}")

    def one(b):
        s = np.linalg.svd(b, compute_uv=False)
        return float(np.sum(np.log(s + eps))) / s.size

    return _weighted(T, map_ordered(one, T.blocks))


def shifted_log_det(T: BlockOperator, lam) -> float:
    """``log Delta(T - lam)``."""
    return log_fk_det(T.shift(lam))


def _gram(M):
    G = M.conj().swapaxes(-1, -2) @ M
    return 0.5 * (G + G.conj().swapaxes(-1, -2))


def block_quad_reg(block, lams, m, chunk=4096) -> np.ndarray:
    """``tau_i(log(|T_i - lam|^2 + m^-2))`` for an array of shifts.

    ``|T_i - lam|^2`` is formed as ``(T_i - lam)^*(T_i - lam)`` and
    diagonalized directly.
    """
    lams = np.asarray(lams, dtype=complex)
    flat = lams.ravel()
    n = block.shape[0]
    eye = np.eye(n, dtype=complex)
    reg = 1.0 / (m * m)
    out = np.empty(flat.size)
    for a in range(0, flat.size, chunk):
        z = flat[a:a + chunk]
        M = block[None, :, :] - z[:, None, None] * eye
        w = np.linalg.eigvalsh(_gram(M))
        out[a:a + chunk] = np.sum(np.log(np.maximum(w, 0.0) + reg), axis=1) / n
    return out.reshape(lams.shape)


def quad_reg_log_det(T: BlockOperator, lam, m: float) -> float:
    """``tau(log(|T - lam|^2 + 1/m^2))``."""
    if not m > 0:
        raise NonpositiveM(f"m must be positive, got {m!r}")
    vals = map_ordered(lambda b: float(block_quad_reg(b, [lam], m)[0]), T.blocks)
    return _weighted(T, vals)


def quad_reg_field(T: BlockOperator, lams, m: float):
    """Per-block values of ``tau_i(log(|T_i - lam|^2 + 1/m^2))`` on an array of shifts.

    Returns a list with one array per atom; the full trace is
    ``sum_i mu_i out[i]``.
    """
    if not m > 0:
        raise NonpositiveM(f"m must be positive, got {m!r}")
    return map_ordered(lambda b: block_quad_reg(b, lams, m), T.blocks)


def continuity_probe(T: BlockOperator, lam):
    """Compare ``|log Delta(|T-lam|^2+1) - log Delta(|T|^2+1)|`` with the
    norm bound ``max(-log(1 - 2|lam| - |lam|^2), log(1 + 2|lam| + |lam|^2))``.

    Returns ``(lhs, bound, passed)``; ``|lam|`` must not exceed 1/3.
    """
    r = abs(complex(lam))
    if r > 1.0 / 3.0:
        raise LambdaTooLarge(f"|lambda| = {r} exceeds 1/3")
    lhs = abs(quad_reg_log_det(T, lam, 1.0) - quad_reg_log_det(T, 0.0, 1.0))
    t = 2.0 * r + r * r
    bound = max(-math.log(1.0 - t), math.log(1.0 + t))
    return lhs, bound, lhs <= bound + 1e-9
