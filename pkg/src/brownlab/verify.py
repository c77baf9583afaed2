"""Invariant suites run by ``brownlab verify``.

Random instances: ``numpy.random.default_rng(seed)`` (PCG64). For each
block in ascending atom order, an ``n x n`` array of real parts and then
one of imaginary parts are drawn uniformly from ``[-1, 1)``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import algebra as al
from . import brown as br
from . import determinant as dt
from . import spectral as sp
from .errors import UnknownSuite
from .linalg import norm2
from .measures import Rectangle

DEFAULT_WEIGHTS = (0.2, 0.3, 0.5)
DEFAULT_DIMS = (2, 3, 4)


def random_block(rng, n):
    re = rng.uniform(-1.0, 1.0, (n, n))
    im = rng.uniform(-1.0, 1.0, (n, n))
    return re + 1j * im


def random_operator(alg, rng) -> al.BlockOperator:
    return al.BlockOperator(alg, [random_block(rng, n) for n in alg.dims])


def random_unitary(rng, n):
    Q, R = np.linalg.qr(random_block(rng, n))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_normal(alg, rng, spread=1.0) -> al.BlockOperator:
    """``U diag(z) U*`` per block with uniform random unitary-ish ``U``."""
    blocks = []
    for n in alg.dims:
        U = random_unitary(rng, n)
        z = spread * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
        blocks.append((U * z) @ U.conj().T)
    return al.BlockOperator(alg, blocks)


def random_hermitian(alg, rng) -> al.BlockOperator:
    T = random_operator(alg, rng)
    return (T + T.adjoint()) * 0.5


def rank_deficient(alg, rng) -> al.BlockOperator:
    """Random operator whose atom-0 block has a zero column (and atom 1, if
    present, a rank-one block)."""
    T = random_operator(alg, rng)
    blocks = [np.array(b) for b in T.blocks]
    blocks[0][:, 0] = 0.0
    if len(blocks) > 1:
        u = random_block(rng, blocks[1].shape[0])[:, :1]
        blocks[1] = u @ u.conj().T
    return al.BlockOperator(alg, blocks)


def default_instance(seed):
    alg = al.make_algebra(DEFAULT_WEIGHTS, DEFAULT_DIMS)
    return random_operator(alg, np.random.default_rng(seed))


@dataclass
class Check:
    name: str
    tag: str
    measured: float
    bound: float
    passed: bool

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<34} [{self.tag}]  measured={self.measured:.6e}  bound={self.bound:.6e}"


@dataclass
class VerifyReport:
    suite: str
    seed: int
    checks: list = field(default_factory=list)

    def add(self, name, tag, measured, bound, passed=None):
        measured = float(measured)
        ok = bool(measured <= bound) if passed is None else bool(passed)
        self.checks.append(Check(name, tag, measured, float(bound), ok))

    @property
    def failed(self):
        return sum(not c.passed for c in self.checks)

    @property
    def ok(self):
        return self.failed == 0

    def render(self):
        lines = [f"# brownlab verify suite={self.suite} seed={self.seed}"]
        lines += [c.line() for c in self.checks]
        lines.append(f"# {len(self.checks) - self.failed} passed, {self.failed} failed")
        return "\n".join(lines) + "\n"



def suite_trace(rep, T, rng):
    alg = T.algebra
    B = random_operator(alg, rng)
    a, b = 0.7 - 0.2j, -1.3 + 0.5j
    lin = abs(al.trace(T * a + B * b) - a * al.trace(T) - b * al.trace(B))
    rep.add("trace linear", "trace-linear", lin, 1e-12 * (1 + abs(al.trace(T)) + abs(al.trace(B))))
    tab, tba = al.trace(T @ B), al.trace(B @ T)
    rep.add("trace tracial", "trace-tracial", abs(tab - tba), 1e-10 * (1 + abs(tab)))
    pos = al.trace(T.adjoint() @ T)
    rep.add("trace positive", "trace-positive", -pos.real, 0.0, pos.real >= 0 and abs(pos.imag) <= 1e-12 * (1 + pos.real))
    z = al.trace(alg.zero().adjoint() @ alg.zero())
    rep.add("trace faithful", "trace-faithful", abs(z), 0.0, z == 0 and pos.real > 0)
    rep.add("trace normalized", "trace-unit", abs(al.trace(alg.identity()) - 1), 1e-12)
    per = sum(w * complex(np.sum(np.diag(b_))) / b_.shape[0] for w, b_ in zip(alg.weights, T.blocks))
    rep.add("trace decomposes over atoms", "trace-decomposition", abs(al.trace(T) - per), 1e-12)
    nT = al.operator_norm(T)
    rep.add("C*-identity", "cstar-identity", abs(al.operator_norm(T.adjoint() @ T) - nT ** 2), 1e-9 * nT ** 2)
    _, res = al.commutes_with_diagonals(T)
    rep.add("commutes with diagonals", "decomposable-commutant", res, 0.0)


def suite_calculus(rep, T, rng):
    alg = T.algebra
    H = (T + T.adjoint()) * 0.5
    N = random_normal(alg, rng)
    for label, X in (("hermitian", H), ("normal", N)):
        spec = sp.spectrum(X)
        worst = max(
            float(np.min(np.abs(spec.points - z))) for ev in spec.per_atom for z in ev
        )
        rep.add(f"spectrum inclusion ({label})", "spectrum-inclusion", worst, 1e-8)
        B1 = Rectangle(-10.0, 0.1, -10.0, 10.0)
        B2 = Rectangle(0.1, 10.0, -10.0, 0.2)
        E1 = sp.spectral_projection(X, B1).operator
        E2 = sp.spectral_projection(X, B2).operator
        E12 = sp.spectral_projection(X, sp.union(B1, B2)).operator
        rep.add(f"sigma-additivity ({label})", "projection-additive", E12.max_block_distance(E1 + E2), 1e-10)
        Ec = sp.spectral_projection(X, sp.Complement(B1)).operator
        rep.add(f"complement ({label})", "projection-complement",
                Ec.max_block_distance(alg.identity() - E1), 1e-10)
        rep.add(f"projection idempotent ({label})", "projection",
                sp.spectral_projection(X, B1).residual(), 1e-10)
    # continuous calculus vs polynomial approximation in (X, X*)
    K = 24
    r2 = al.operator_norm(N) ** 2
    coeffs = np.zeros((K + 1, K + 1), dtype=complex)
    for k in range(K + 1):
        coeffs[k, k] = (-1) ** k / math.factorial(k)
    t = np.linspace(0.0, r2, 2001)
    approx = sum(((-t) ** k) / math.factorial(k) for k in range(K + 1))
    eps_k = float(np.max(np.abs(np.exp(-t) - approx)))
    fN = sp.borel_calculus(N, lambda z: np.exp(-np.abs(z) ** 2))
    gN = sp.polynomial_calculus(N, coeffs)
    rep.add("borel vs polynomial calculus", "continuous-calculus",
            fN.max_block_distance(gN), 2 * eps_k + 1e-9)
    D = sp.distribution(H)
    rep.add("distribution total mass", "distribution", abs(D.total_mass - 1.0), 1e-12)
    step = lambda x: np.where(np.real(x) >= 0.0, 1.0, -1.0)
    pushed = D.pushforward(step)
    direct = sp.distribution(sp.borel_calculus(H, step))
    dev = float(np.max(np.abs(pushed.masses - direct.masses))) if pushed.points.shape == direct.points.shape else float("inf")
    rep.add("distribution pushforward", "distribution", dev, 1e-12)


def suite_polar(rep, T, rng):
    for label, X in (("generic", T), ("rank-deficient", rank_deficient(T.algebra, rng))):
        V, P = sp.polar(X)
        nT = al.operator_norm(X)
        rep.add(f"T = V|T| ({label})", "polar", (V @ P).max_block_distance(X), 1e-10 * (1 + nT))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sp.BoundaryWarning)
            E = sp.spectral_projection(P, sp.HalfLine(0.0)).operator
        rep.add(f"V*V = E_P(0,inf) ({label})", "polar-range", (V.adjoint() @ V).max_block_distance(E), 1e-10)
        rep.add(f"|T|^2 = T*T ({label})", "abs-value",
                (P @ P).max_block_distance(X.adjoint() @ X), 1e-9 * (1 + nT ** 2))


def suite_cayley(rep, T, rng):
    H = (T + T.adjoint()) * 0.5
    U = sp.cayley(H)
    unit = max(norm2(u.conj().T @ u - np.eye(u.shape[0])) for u in U.blocks)
    rep.add("cayley unitary", "cayley", unit, 1e-10)
    back = sp.inverse_cayley(U)
    rep.add("inverse cayley", "cayley", back.max_block_distance(H), 1e-8 * (1 + al.operator_norm(H)))
    alg = T.algebra
    t = [float(x) for x in rng.uniform(-2, 2, alg.atom_count)]
    D = al.embed_diagonal(al.DiagonalOperator(alg, tuple(t)))
    UD = sp.cayley(D)
    dev = max(
        norm2(u - (s + 1j) / (s - 1j) * np.eye(u.shape[0])) for s, u in zip(t, UD.blocks)
    )
    rep.add("cayley scalar formula", "cayley", dev, 1e-14)
    blockwise = max(
        float(np.max(np.abs(sp.cayley(al.BlockOperator(alg.atom(i), [b])).blocks[0] - U.blocks[i])))
        for i, b in enumerate(H.blocks)
    )
    rep.add("cayley blockwise = global", "cayley", blockwise, 0.0)


def suite_det(rep, T, rng):
    alg = T.algebra
    B = random_operator(alg, rng)
    g = dt.log_fk_det(T)
    per = 0.0
    for w, b in zip(alg.weights, T.blocks):
        per += w * float(np.sum(np.log(np.linalg.svd(b, compute_uv=False)))) / b.shape[0]
    rep.add("FK decomposes over atoms", "fk-decomposition", abs(g - per), 1e-12)
    lab, la, lb = dt.log_fk_det(T @ B), g, dt.log_fk_det(B)
    rep.add("FK multiplicative", "fk-multiplicative", abs(lab - la - lb), 1e-8 * (1 + abs(la) + abs(lb)))
    U = al.BlockOperator(alg, [random_unitary(rng, n) for n in alg.dims])
    rep.add("FK unitary invariance", "fk-multiplicative", abs(dt.log_fk_det(U @ T) - g), 1e-10)
    eps = [1.0, 0.5, 0.1, 1e-2, 1e-4, 1e-6]
    vals = [dt.log_fk_det_eps(T, e) for e in eps]
    mono = all(a > b for a, b in zip(vals, vals[1:]))
    rep.add("eps-regularization monotone", "fk-regularization", 0.0, 0.0, mono)
    rep.add("eps -> 0 limit", "fk-regularization", abs(vals[-1] - g) / (1 + abs(g)), 1e-4)
    lp = al.log_plus_moment(T)
    worst = max(dt.log_fk_det_eps(T, e) - lp - math.log1p(e) for e in eps)
    rep.add("log+ bound on eps-regularization", "log-plus", worst, 0.0)
    worst = 0.0
    ok = True
    for _ in range(5):
        lam = complex(*rng.uniform(-0.23, 0.23, 2))
        lhs, bound, passed = dt.continuity_probe(T, lam)
        worst = max(worst, lhs - bound)
        ok &= passed
    rep.add("continuity probe", "fk-continuity", worst, 1e-9, ok)


def suite_brown(rep, T, rng):
    nu = br.brown_exact(T)
    rep.add("brown total mass", "brown-probability", abs(nu.total_mass - 1.0), 1e-12)
    nT = al.operator_norm(T)
    rep.add("brown support in norm disk", "brown-support", float(np.max(np.abs(nu.points))) - nT, 1e-8)
    probes = []
    while len(probes) < 20:
        lam = complex(*rng.uniform(-1.5 * nT, 1.5 * nT, 2))
        if np.min(np.abs(nu.points - lam)) >= 1e-3:
            probes.append(lam)
    rep.add("log potential = log FK det", "brown-characterization",
            br.characterization_check(T, probes), 1e-8)
    rep.add("log+ moment <= log+ norm", "brown-log-plus",
            nu.log_plus_moment() - max(math.log(nT), 0.0), 1e-10)


def suite_mixture(rep, T, rng, n_cells=200, m=1e3):
    tv, r = br.mixture_check(T, br.auto_region(T, n_cells), n_cells, n_cells, m)
    rep.add("brown exact = mixture of blocks", "brown-decomposition", r.exact_deviation, 1e-12, r.exact_match)
    rep.add("brown grid = mixture of blocks", "brown-decomposition", tv, 1e-9)


SUITES = {
    "trace": suite_trace,
    "calculus": suite_calculus,
    "polar": suite_polar,
    "cayley": suite_cayley,
    "det": suite_det,
    "brown": suite_brown,
    "mixture": suite_mixture,
}


def run_verify(suite, seed=0, operator=None) -> VerifyReport:
    """Run one suite (or ``all``) on ``operator``, or on the seeded default
    3-atom instance when ``operator`` is None."""
    if suite != "all" and suite not in SUITES:
        raise UnknownSuite(f"unknown suite {suite!r}; choose from {sorted(SUITES) + ['all']}")
    rng = np.random.default_rng(seed)
    T = operator if operator is not None else random_operator(
        al.make_algebra(DEFAULT_WEIGHTS, DEFAULT_DIMS), rng)
    rep = VerifyReport(suite, seed)
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        SUITES[name](rep, T, np.random.default_rng([seed, list(SUITES).index(name)]))
    return rep
