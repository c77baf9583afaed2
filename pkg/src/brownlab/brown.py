"""Brown measures of block operators, computed three independent ways.

* exact: the weighted eigenvalue counting measure of the blocks;
* grid: ``(1/4pi)`` times a 5-point Laplacian of the regularized potential
  ``F_m(lam) = tau(log(|T - lam|^2 + 1/m^2))`` on a cell-centred lattice;
* mollifier: lattice Riemann sums of ``F_m * Laplacian(f_n)`` against
  smooth bumps ``f_n`` increasing to the indicator of a box.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .algebra import BlockOperator, make_algebra, operator_norm
from .determinant import NEG_INF, quad_reg_field, shifted_log_det
from .errors import (
    ConvergenceFailure,
    NonpositiveM,
    OracleFailure,
    ProbeOnSupport,
    RegionTooSmall,
    ScheduleEmpty,
)
from .linalg import complex_eigenvalues_oracle
from .measures import AtomicComplexMeasure, GridMeasure, Rectangle

PAD_CELLS = 3
BALANCE_RADIUS = 3
MIN_BAND_POINTS = 10


class ResolutionWarning(UserWarning):
    pass


def brown_exact(T: BlockOperator) -> AtomicComplexMeasure:
    """``nu_T = sum_i mu_i nu_{T_i}``, coincident atoms (< 1e-10 apart) merged."""
    pts, ms = [], []
    for i, (w, b) in enumerate(zip(T.algebra.weights, T.blocks)):
        try:
            ev = complex_eigenvalues_oracle(b)
        except ConvergenceFailure as exc:
            raise OracleFailure(i, exc) from exc
        pts.append(ev)
        ms.append(np.full(ev.size, w / ev.size))
    return AtomicComplexMeasure.from_points(np.concatenate(pts), np.concatenate(ms))


def log_potential(nu: AtomicComplexMeasure, lam) -> float:
    """``int log|z - lam| dnu(z)``; ``-inf`` on the support."""
    d = np.abs(nu.points - complex(lam))
    if np.any(d == 0):
        return NEG_INF
    return float(np.sum(nu.masses * np.log(d)))


# -- grid estimator -------------------------------------------------------------

def auto_region(T: BlockOperator, n_cells, margin=0.5) -> Rectangle:
    """Centred square large enough for ``brown_grid`` at ``n_cells`` per side."""
    r = (operator_norm(T) + margin) / (1.0 - 2.0 * PAD_CELLS / n_cells)
    return Rectangle(-r, r, -r, r)


def _check_region(T, region, nx, ny):
    hx = region.width / nx
    hy = region.height / ny
    pad = PAD_CELLS * max(hx, hy)
    r = operator_norm(T) + pad
    if region.x0 > -r or region.x1 < r or region.y0 > -r or region.y1 < r:
        raise RegionTooSmall(
            f"region {region} does not contain the disk |z| <= {r:.6g} "
            f"(operator norm plus {PAD_CELLS} cells)"
        )


def _node_values(T, region, nx, ny, m):
    hx = region.width / nx
    hy = region.height / ny
    xs = region.x0 + (np.arange(-1, nx + 1) + 0.5) * hx
    ys = region.y0 + (np.arange(-1, ny + 1) + 0.5) * hy
    lam = xs[:, None] + 1j * ys[None, :]
    per_block = quad_reg_field(T, lam, m)
    F = np.zeros(lam.shape)
    for w, f in zip(T.algebra.weights, per_block):
        F += w * f
    return F, hx, hy


def _laplacian_mass(F, hx, hy):
    c = F[1:-1, 1:-1]
    lap = (F[2:, 1:-1] + F[:-2, 1:-1] - 2.0 * c) / hx ** 2 + (F[1:-1, 2:] + F[1:-1, :-2] - 2.0 * c) / hy ** 2
    return hx * hy * lap / (4.0 * math.pi)


def _box_sum(A, r):
    return ndimage.convolve(A, np.ones((2 * r + 1, 2 * r + 1)), mode="constant", cval=0.0)


def balance_negative(raw, max_radius=BALANCE_RADIUS, rounds=16):
    """Zero out negative cells, taking each deficit from positive cells within
    ``max_radius`` cells (proportionally to their mass).

    Total mass is conserved, and so is the mass of any cell union whose
    boundary stays more than ``max_radius`` cells from the negative lobes.
    Deficits with no positive mass in reach are plainly clipped.

    Returns ``(balanced, unbalanced_mass, radius_used)``.
    """
    M = np.array(raw, dtype=float)
    used = 0
    for r in range(1, max_radius + 1):
        for _ in range(rounds):
            neg = M < 0
            if not neg.any():
                return M, 0.0, used
            used = r
            d = np.where(neg, -M, 0.0)
            P = np.where(neg, 0.0, M)
            S = _box_sum(P, r)
            ratio = np.where(neg & (S > 0), np.minimum(d / np.where(S > 0, S, 1.0), 1.0), 0.0)
            gets = ratio * S
            M = P - P * _box_sum(ratio, r) + np.where(neg, gets - d, 0.0)
            if not np.any(ratio):
                break
    neg = M < 0
    rest = float(-np.sum(M[neg]))
    M[neg] = 0.0
    return M, rest, used


def brown_grid(T: BlockOperator, region: Rectangle, nx: int, ny: int, m: float) -> GridMeasure:
    """Grid estimate of the Brown measure.

    ``F_m`` is evaluated once per lattice node (cell centres plus one ghost
    ring) and ``raw_mass = (1/4pi) hx hy * Laplacian_h F_m``. This raw
    estimate is affine in the trace and its cell-union sums equal discrete
    boundary fluxes. When ``1/m`` is far below the cell size, the stencil
    leaves negative lobes next to each eigenvalue. ``cell_mass`` removes them
    by zeroing negative cells and charging the deficit to positive cells at
    most ``BALANCE_RADIUS`` cells away. ``clipped_total`` is the negative
    mass that was zeroed.
    """
    if not m > 0:
        raise NonpositiveM(f"m must be positive, got {m!r}")
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be positive")
    _check_region(T, region, nx, ny)
    F, hx, hy = _node_values(T, region, nx, ny, m)
    raw = _laplacian_mass(F, hx, hy)
    clipped = float(-np.sum(raw[raw < 0]))
    cells, rest, radius = balance_negative(raw)
    g = GridMeasure(
        region, nx, ny, cells, float(m),
        raw_mass=raw, clipped_total=clipped,
        most_negative=float(min(0.0, raw.min())),
    )
    if g.most_negative < -1e-6:
        g.notes.append(
            f"stencil produced cell mass {g.most_negative:.3e}; {clipped:.3e} negative mass "
            f"rebalanced within {radius} cells"
        )
    if rest > 0:
        g.notes.append(f"{rest:.3e} negative mass clipped without compensation")
    if g.total_mass > 1.0 + 1e-2:
        g.notes.append(f"total mass {g.total_mass:.6f} exceeds 1 + 1e-2")
    return g


# -- mollifier estimator --------------------------------------------------------

def _psi(t):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1; returns (g, g', g'')."""
    t = np.asarray(t, dtype=float)
    u = np.clip(t, 0.0, 1.0)
    a, b = _psi(u), _psi(1.0 - u)
    with np.errstate(divide="ignore", invalid="ignore"):
        iu = np.where(u > 0, 1.0 / np.where(u > 0, u, 1.0), 0.0)
        iv = np.where(u < 1, 1.0 / np.where(u < 1, 1.0 - u, 1.0), 0.0)
    a1 = a * iu ** 2
    a2 = a * (iu ** 4 - 2.0 * iu ** 3)
    b1 = -b * iv ** 2
    b2 = b * (iv ** 4 - 2.0 * iv ** 3)
    S, S1, S2 = a + b, a1 + b1, a2 + b2
    g = a / S
    g1 = (a1 * S - a * S1) / S ** 2
    g2 = (a2 * S - a * S2) / S ** 2 - 2.0 * S1 * (a1 * S - a * S1) / S ** 3
    inner = (t > 0) & (t < 1)
    g = np.where(t >= 1, 1.0, np.where(inner, g, 0.0))
    return g, np.where(inner, g1, 0.0), np.where(inner, g2, 0.0)


@dataclass(frozen=True)
class MollifierSpec:
    """Bump ``f_n(x, y) = X(x) Y(y)`` on ``box``, each factor a product of two
    smooth steps of width ``scale / n`` rising from the box edges.

    ``0 <= f_n <= 1``, ``f_n = 0`` off the open box, ``f_n = 1`` deeper than
    ``scale / n`` inside, and ``f_n`` is pointwise nondecreasing in ``n``.
    """

    box: Rectangle
    scale: float
    n: int = 1

    @property
    def width(self):
        return self.scale / self.n

    def _factor(self, x, lo, hi):
        s = self.width
        ga, ga1, ga2 = smooth_step((x - lo) / s)
        gb, gb1, gb2 = smooth_step((hi - x) / s)
        F = ga * gb
        F1 = (ga1 * gb - ga * gb1) / s
        F2 = (ga2 * gb - 2.0 * ga1 * gb1 + ga * gb2) / s ** 2
        return F, F1, F2

    def value(self, x, y):
        X = self._factor(np.asarray(x, float), self.box.x0, self.box.x1)[0]
        Y = self._factor(np.asarray(y, float), self.box.y0, self.box.y1)[0]
        return X * Y

    def gradient(self, x, y):
        X, X1, _ = self._factor(np.asarray(x, float), self.box.x0, self.box.x1)
        Y, Y1, _ = self._factor(np.asarray(y, float), self.box.y0, self.box.y1)
        return X1 * Y, X * Y1

    def laplacian(self, x, y):
        X, _, X2 = self._factor(np.asarray(x, float), self.box.x0, self.box.x1)
        Y, _, Y2 = self._factor(np.asarray(y, float), self.box.y0, self.box.y1)
        return X2 * Y + X * Y2


def _lattice(lo, hi, k):
    j0 = math.floor(lo * k)
    j1 = math.ceil(hi * k)
    j = np.arange(j0, j1 + 1)
    x = j / k
    return x[(x > lo) & (x < hi)]


def mollifier_mass(T: BlockOperator, box: Rectangle, schedule, scale: float = 0.05):
    """Estimates of ``nu_T(box)`` along a schedule of ``(n, m, k)`` triples.

    Each entry is ``(1/4pi) (1/k^2) sum_{lam in (1/k)(Z + iZ)} F_m(lam)
    Laplacian(f_n)(lam)``. Lattice points where the Laplacian vanishes are
    skipped, so only the band of width ``scale/n`` along the edges costs
    evaluations. Entries must be nondecreasing in each of ``n``, ``m``, ``k``.

    The sum resolves the edge band only when ``k * scale / n`` is around 20
    or more (relative error near 1e-4 there, a few percent at 10); entries
    below ``MIN_BAND_POINTS`` raise a ResolutionWarning.
    """
    schedule = [(int(n), float(m), int(k)) for n, m, k in schedule]
    if not schedule:
        raise ScheduleEmpty("schedule has no entries")
    for prev, cur in zip(schedule, schedule[1:]):
        if any(c < p for p, c in zip(prev, cur)):
            raise ValueError(f"schedule must be nondecreasing: {prev} then {cur}")
    for _, m, _ in schedule:
        if not m > 0:
            raise NonpositiveM(f"m must be positive, got {m!r}")
    out = []
    for n, m, k in schedule:
        spec = MollifierSpec(box, scale, n)
        if k * spec.width < MIN_BAND_POINTS:
            warnings.warn(
                f"schedule entry {(n, m, k)}: only {k * spec.width:.1f} lattice points across "
                "the mollifier edge band", ResolutionWarning, stacklevel=2)
        xs = _lattice(box.x0, box.x1, k)
        ys = _lattice(box.y0, box.y1, k)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        lap = spec.laplacian(X, Y)
        live = lap != 0
        lam = X[live] + 1j * Y[live]
        F = np.zeros(lam.shape)
        for w, f in zip(T.algebra.weights, quad_reg_field(T, lam, m)):
            F += w * f
        out.append(float(np.sum(F * lap[live])) / (4.0 * math.pi * k * k))
    return out


# -- decomposition checks ------------------------------------------------------

@dataclass
class MixtureReport:
    tv_boxes: float
    tv_clipped: float
    full_mass: float
    mixture_mass: float
    exact_match: bool
    exact_deviation: float
    per_atom_mass: list = field(default_factory=list)


def mixture_check(T: BlockOperator, region: Rectangle, nx: int, ny: int, m: float):
    """Compare the Brown measure of ``T`` with the mixture of its blocks'.

    The grid path runs ``brown_grid`` on ``T`` and on each block as a
    single-atom operator; ``tv_boxes`` is half the l1 distance of the
    unclipped cell masses. The exact path compares ``brown_exact``
    measures point by point.

    Returns ``(tv_boxes, report)``.
    """
    full = brown_grid(T, region, nx, ny, m)
    mix_raw = np.zeros_like(full.raw_mass)
    mix_clip = np.zeros_like(full.cell_mass)
    masses, atoms = [], []
    for w, b in zip(T.algebra.weights, T.blocks):
        alg = make_algebra([1.0], [b.shape[0]])
        gi = brown_grid(BlockOperator(alg, [b]), region, nx, ny, m)
        mix_raw += w * gi.raw_mass
        mix_clip += w * gi.cell_mass
        masses.append(gi.total_mass)
        atoms.append(brown_exact(BlockOperator(alg, [b])))
    tv = 0.5 * float(np.sum(np.abs(full.raw_mass - mix_raw)))
    tvc = 0.5 * float(np.sum(np.abs(full.cell_mass - mix_clip)))
    ex = brown_exact(T)
    mix = AtomicComplexMeasure.mixture(T.algebra.weights, atoms)
    same = ex.points.shape == mix.points.shape
    dev = (
        max(float(np.max(np.abs(ex.points - mix.points))), float(np.max(np.abs(ex.masses - mix.masses))))
        if same else float("inf")
    )
    report = MixtureReport(tv, tvc, full.total_mass, float(mix_clip.sum()),
                           same and dev <= 1e-12, dev, masses)
    return tv, report


def characterization_check(T: BlockOperator, probes) -> float:
    """``max_lam |int log|z - lam| dnu_T - log Delta(T - lam)|`` over the probes."""
    nu = brown_exact(T)
    worst = 0.0
    for lam in probes:
        lam = complex(lam)
        d = float(np.min(np.abs(nu.points - lam)))
        if d < 1e-6:
            raise ProbeOnSupport(f"probe {lam} is {d:.2e} from the support")
        worst = max(worst, abs(log_potential(nu, lam) - shifted_log_det(T, lam)))
    return worst
