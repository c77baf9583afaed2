"""Finite direct sums of matrix algebras with weighted normalized traces.

An atomic probability space with weights ``mu_i`` and block sizes ``n_i``
gives the tracial algebra ``M = (+)_i M_{n_i}`` with
``tau(T) = sum_i mu_i tr(T_i) / n_i``. Decomposable operators are tuples of
blocks; every *-algebra operation acts atom by atom.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._parallel import map_ordered
from .errors import (
    AlgebraMismatch,
    DimensionMismatch,
    EmptySpace,
    NonpositiveWeight,
    RuleFailure,
)
from .linalg import as_matrix, norm2

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class AtomicMeasureSpace:
    weights: tuple
    normalization: float = 1.0  # input weights were divided by this

    def __post_init__(self):
        if len(self.weights) == 0:
            raise EmptySpace("measure space needs at least one atom")
        if any(not (w > 0) for w in self.weights):
            raise NonpositiveWeight(f"weights must be strictly positive: {self.weights}")
        if abs(sum(self.weights) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {sum(self.weights)!r}, not 1")

    @property
    def atom_count(self) -> int:
        return len(self.weights)


def make_measure_space(weights) -> AtomicMeasureSpace:
    """Build a probability space, rescaling ``weights`` unless they already sum to 1.

    Weights whose sum is within 1e-12 of one are kept bit-for-bit.
    """
    w = [float(x) for x in weights]
    if not w:
        raise EmptySpace("measure space needs at least one atom")
    for i, x in enumerate(w):
        if not (x > 0) or not np.isfinite(x):
            raise NonpositiveWeight(f"weight {i} is {x!r}; weights must be positive and finite")
    total = sum(w)
    if abs(total - 1.0) <= WEIGHT_TOL:
        return AtomicMeasureSpace(tuple(w), 1.0)
    return AtomicMeasureSpace(tuple(x / total for x in w), total)


@dataclass(frozen=True)
class TracialAlgebra:
    space: AtomicMeasureSpace
    dims: tuple

    def __post_init__(self):
        if len(self.dims) != self.space.atom_count:
            raise DimensionMismatch(
                f"{len(self.dims)} block dimensions for {self.space.atom_count} atoms"
            )
        if any(int(n) != n or n < 1 for n in self.dims):
            raise DimensionMismatch(f"block dimensions must be positive integers: {self.dims}")

    @property
    def weights(self) -> tuple:
        return self.space.weights

    @property
    def atom_count(self) -> int:
        return self.space.atom_count

    @property
    def normalization(self) -> float:
        return self.space.normalization

    def identity(self) -> "BlockOperator":
        return BlockOperator(self, [np.eye(n, dtype=complex) for n in self.dims])

    def zero(self) -> "BlockOperator":
        return BlockOperator(self, [np.zeros((n, n), dtype=complex) for n in self.dims])

    def scalar(self, c) -> "BlockOperator":
        return BlockOperator(self, [complex(c) * np.eye(n, dtype=complex) for n in self.dims])

    def atom(self, i) -> "TracialAlgebra":
        """The single-atom algebra ``M_{n_i}`` with its normalized trace."""
        return make_algebra([1.0], [self.dims[i]])

    def unit_trace(self) -> complex:
        return trace(self.identity())


def make_algebra(weights, dims) -> TracialAlgebra:
    """Tracial algebra from (possibly unnormalized) weights and block sizes.

    The factor the weights were divided by is kept in ``.normalization``.
    """
    space = make_measure_space(weights)
    dims = tuple(dims)
    if any(isinstance(n, bool) or int(n) != n for n in dims):
        raise DimensionMismatch(f"block dimensions must be positive integers: {dims}")
    alg = TracialAlgebra(space, tuple(int(n) for n in dims))
    u = alg.unit_trace()
    assert abs(u - 1.0) <= 1e-12, u
    return alg


class BlockOperator:
    """Decomposable operator: one square block per atom.

    Supports ``+``, ``-``, ``@`` (product), scalar ``*`` and ``.adjoint()``;
    all act blockwise. Blocks are stored read-only.
    """

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: TracialAlgebra, blocks: Sequence):
        if len(blocks) != algebra.atom_count:
            raise DimensionMismatch(f"{len(blocks)} blocks for {algebra.atom_count} atoms")
        mats = []
        for i, (b, n) in enumerate(zip(blocks, algebra.dims)):
            try:
                M = as_matrix(b)
            except ValueError as exc:
                raise DimensionMismatch(f"block {i}: {exc}") from None
            if M.shape != (n, n):
                raise DimensionMismatch(f"block {i} has shape {M.shape}, algebra expects ({n}, {n})")
            M.setflags(write=False)
            mats.append(M)
        self.algebra = algebra
        self.blocks = tuple(mats)

    def __repr__(self):
        return f"BlockOperator(dims={self.algebra.dims}, weights={self.algebra.weights})"

    def _same(self, other):
        if not isinstance(other, BlockOperator):
            raise TypeError(f"expected BlockOperator, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise AlgebraMismatch("operators live on different algebras")

    def map(self, fn) -> "BlockOperator":
        """Apply ``fn`` to every block (in parallel if enabled)."""
        return BlockOperator(self.algebra, map_ordered(fn, self.blocks))

    def __add__(self, other):
        self._same(other)
        return BlockOperator(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._same(other)
        return BlockOperator(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __matmul__(self, other):
        self._same(other)
        return BlockOperator(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, c):
        if isinstance(c, BlockOperator):
            return NotImplemented
        c = complex(c)
        return BlockOperator(self.algebra, [c * a for a in self.blocks])

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def adjoint(self) -> "BlockOperator":
        return BlockOperator(self.algebra, [a.conj().T for a in self.blocks])

    @property
    def H(self):
        return self.adjoint()

    def shift(self, lam) -> "BlockOperator":
        """``T - lam * 1``."""
        lam = complex(lam)
        return BlockOperator(
            self.algebra, [a - lam * np.eye(a.shape[0]) for a in self.blocks]
        )

    def to_dense(self) -> np.ndarray:
        """The honest direct-sum matrix (ignores weights)."""
        N = sum(self.algebra.dims)
        out = np.zeros((N, N), dtype=complex)
        k = 0
        for b in self.blocks:
            n = b.shape[0]
            out[k:k + n, k:k + n] = b
            k += n
        return out

    def allclose(self, other, atol=1e-10) -> bool:
        self._same(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def max_block_distance(self, other) -> float:
        self._same(other)
        return max(norm2(a - b) for a, b in zip(self.blocks, other.blocks))


def add(A, B):
    return A + B


def sub(A, B):
    return A - B


def mul(A, B):
    return A @ B


def adjoint(A):
    return A.adjoint()


def scalar_mul(c, A):
    return A * c


def trace(T: BlockOperator) -> complex:
    """``tau(T) = sum_i mu_i tr(T_i) / n_i``, summed in ascending atom order."""
    total = 0j
    for w, b in zip(T.algebra.weights, T.blocks):
        total += w * (np.trace(b) / b.shape[0])
    return complex(total)


def operator_norm(T: BlockOperator) -> float:
    """Max over atoms of the largest singular value."""
    return max(map_ordered(norm2, T.blocks))


@dataclass(frozen=True)
class DiagonalOperator:
    algebra: TracialAlgebra
    scalars: tuple

    def __post_init__(self):
        if len(self.scalars) != self.algebra.atom_count:
            raise DimensionMismatch(
                f"{len(self.scalars)} scalars for {self.algebra.atom_count} atoms"
            )


def embed_diagonal(D: DiagonalOperator) -> BlockOperator:
    return BlockOperator(
        D.algebra,
        [complex(c) * np.eye(n, dtype=complex) for c, n in zip(D.scalars, D.algebra.dims)],
    )


def indicator_diagonals(algebra: TracialAlgebra):
    """Generating set of the diagonal algebra: one indicator per atom."""
    k = algebra.atom_count
    return [
        DiagonalOperator(algebra, tuple(1.0 if j == i else 0.0 for j in range(k)))
        for i in range(k)
    ]


def commutes_with_diagonals(T: BlockOperator):
    """Check ``TD = DT`` for the indicator diagonals.

    Returns ``(commutes, max_residual)``; for any BlockOperator the residual is
    exactly zero.
    """
    residual = 0.0
    for D in indicator_diagonals(T.algebra):
        E = embed_diagonal(D)
        C = T @ E - E @ T
        residual = max(residual, operator_norm(C))
    return residual <= 1e-15, residual


def singular_values(T: BlockOperator):
    return map_ordered(lambda b: np.linalg.svd(b, compute_uv=False), T.blocks)


def log_plus_moment(T: BlockOperator) -> float:
    """``tau(log+ |T|) = sum_i mu_i (1/n_i) sum_j log+ s_ij``."""
    total = 0.0
    for w, s in zip(T.algebra.weights, singular_values(T)):
        with np.errstate(divide="ignore"):
            lp = np.maximum(np.log(s), 0.0)
        total += w * float(np.sum(lp)) / s.size
    return total


@dataclass
class TruncatedField:
    """Countable family of blocks ``T_i = exp(log_scale(i)) * block_rule(i)``, i >= 1.

    ``weight_rule(i)`` gives the (unnormalized) mass of atom ``i``. The
    separate log-scale keeps astronomically large blocks representable for
    the log+ diagnostics; ``truncate`` must materialize them and fails with
    RuleFailure if they overflow. ``tail_bound(N)``, if given, is an analytic
    bound on the log+ mass carried by atoms ``i > N``.
    """

    weight_rule: Callable[[int], float]
    block_rule: Callable[[int], object]
    description: str = ""
    log_scale: Optional[Callable[[int], float]] = None
    tail_bound: Optional[Callable[[int], float]] = None

    def scaled_block(self, i):
        try:
            M = as_matrix(self.block_rule(i))
            c = 0.0 if self.log_scale is None else float(self.log_scale(i))
            w = float(self.weight_rule(i))
        except Exception as exc:  # rule code is user supplied
            raise RuleFailure(i, exc) from exc
        if not (w > 0):
            raise RuleFailure(i, f"nonpositive weight {w!r}")
        return w, c, M


def truncate(F: TruncatedField, N: int):
    """Atoms ``1..N`` of the field, weights renormalized to a probability.

    Returns ``(algebra, operator)``.
    """
    if N < 1:
        raise ValueError("truncation level must be >= 1")
    weights, blocks = [], []
    for i in range(1, N + 1):
        w, c, M = F.scaled_block(i)
        with np.errstate(over="ignore", invalid="ignore"):
            B = np.exp(c) * M if c else M
        if not np.all(np.isfinite(B)):
            raise RuleFailure(i, f"block overflows double precision (log-scale {c})")
        weights.append(w)
        blocks.append(B)
    alg = make_algebra(weights, [b.shape[0] for b in blocks])
    return alg, BlockOperator(alg, blocks)


@dataclass
class LogPlusDiagnostic:
    """Partial sums of the log+ moment over a TruncatedField.

    ``partial_sums[N-1]`` is ``sum_{i<=N} mu_i tau_i(log+|T_i|)`` with the
    field's own weights; ``normalized[N-1]`` is the log+ moment of the
    level-N truncation (weights renormalized).
    """

    partial_sums: list
    normalized: list
    mass: list
    tail_bounds: Optional[list] = None
    cauchy_ok: Optional[bool] = None
    notes: list = field(default_factory=list)


def log_plus_diagnostic(F: TruncatedField, N: int) -> LogPlusDiagnostic:
    """log+ partial sums up to level ``N``.

    With a declared tail bound, also checks the Cauchy condition
    ``|S_M - S_K| <= tail_bound(K)`` for all ``K < M <= N``. Convergence of
    the full series is not decided here.
    """
    sums, normalized, mass = [], [], []
    S = 0.0
    W = 0.0
    for i in range(1, N + 1):
        w, c, M = F.scaled_block(i)
        s = np.linalg.svd(M, compute_uv=False)
        with np.errstate(divide="ignore"):
            lp = np.maximum(c + np.log(s), 0.0)
        S += w * float(np.sum(lp)) / s.size
        W += w
        sums.append(S)
        mass.append(W)
        normalized.append(S / W)
    diag = LogPlusDiagnostic(sums, normalized, mass)
    if F.tail_bound is not None:
        bounds = [float(F.tail_bound(k)) for k in range(1, N + 1)]
        ok = all(
            sums[j] - sums[k] <= bounds[k] + 1e-12 * (1 + abs(sums[j]))
            for k in range(N) for j in range(k, N)
        )
        diag.tail_bounds = bounds
        diag.cauchy_ok = ok
        if ok and N:
            diag.notes.append(f"series bounded by {sums[-1] + bounds[-1]!r}")
    return diag


# Fixtures for the exp(L1) diagnostic. Both put mass 2^-i on atom i.

def geometric_field() -> TruncatedField:
    """``T_i = 2^i`` on a 1x1 block: log+ moment ``log 2 * sum i 2^-i = 2 log 2``."""
    return TruncatedField(
        weight_rule=lambda i: 2.0 ** -i,
        block_rule=lambda i: [[1.0]],
        log_scale=lambda i: i * np.log(2.0),
        tail_bound=lambda N: (N + 2) * 2.0 ** -N * np.log(2.0),
        description="T_i = 2^i, mu_i = 2^-i (summable log+ tail)",
    )


def doubly_exponential_field() -> TruncatedField:
    """``T_i = 2^(2^i)``: each atom contributes ``log 2``, so the series diverges."""
    return TruncatedField(
        weight_rule=lambda i: 2.0 ** -i,
        block_rule=lambda i: [[1.0]],
        log_scale=lambda i: 2.0 ** i * np.log(2.0),
        description="T_i = 2^(2^i), mu_i = 2^-i (divergent log+ tail)",
    )


def constant_field(value=1.0) -> TruncatedField:
    return TruncatedField(
        weight_rule=lambda i: 2.0 ** -i,
        block_rule=lambda i: [[value]],
        tail_bound=lambda N: 0.0 if abs(value) <= 1 else np.log(abs(value)) * 2.0 ** -N,
        description=f"T_i = {value}",
    )


NAMED_FIELDS = {
    "constant": constant_field,
    "geometric": geometric_field,
    "doubly_exponential": doubly_exponential_field,
}
