"""Finite measures on the complex plane and their CSV forms.

CSV formats
-----------
Point-mass measure: one ``re,im,mass`` line per atom, no header.

Grid measure: a header line carrying ``x0,x1,y0,y1,nx,ny,m`` (values, in that
order), then ``nx * ny`` lines ``ix,iy,mass`` with ``ix`` varying slowest.

Floats are written with 17 significant digits so that a read reproduces
them bit-exactly.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

MERGE_TOL = 1e-10


def fmt(x) -> str:
    x = float(x)
    if x == float("-inf"):
        return "-inf"
    if x == float("inf"):
        return "inf"
    return f"{x:.17g}"


def merge_points(points, masses, tol=MERGE_TOL):
    """Combine point masses closer than ``tol``; output sorted by (re, im)."""
    pts = np.asarray(points, dtype=complex).ravel()
    ms = np.asarray(masses, dtype=float).ravel()
    order = np.lexsort((pts.imag, pts.real))
    out_p, out_m = [], []
    for j in order:
        z = pts[j]
        for k, q in enumerate(out_p):
            if abs(q - z) < tol:
                out_m[k] += ms[j]
                break
        else:
            out_p.append(z)
            out_m.append(float(ms[j]))
    return np.array(out_p, dtype=complex), np.array(out_m, dtype=float)


@dataclass
class AtomicComplexMeasure:
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex).ravel()
        self.masses = np.asarray(self.masses, dtype=float).ravel()
        if self.points.shape != self.masses.shape:
            raise ValueError("points and masses differ in length")
        if np.any(self.masses <= 0):
            raise ValueError("masses must be positive")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("support points must be finite")

    @classmethod
    def from_points(cls, points, masses, tol=MERGE_TOL):
        p, m = merge_points(points, masses, tol)
        return cls(p, m)

    @classmethod
    def mixture(cls, weights, measures, tol=MERGE_TOL):
        """``sum_i w_i nu_i`` with coincident support points merged."""
        pts = np.concatenate([nu.points for nu in measures])
        ms = np.concatenate([w * nu.masses for w, nu in zip(weights, measures)])
        return cls.from_points(pts, ms, tol)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def mass_in(self, region) -> float:
        """Mass of a region object exposing ``contains(points) -> bool array``."""
        inside = region.contains(self.points)
        return float(np.sum(self.masses[inside]))

    def log_plus_moment(self) -> float:
        """``int log+|z| dnu``."""
        with np.errstate(divide="ignore"):
            lp = np.maximum(np.log(np.abs(self.points)), 0.0)
        return float(np.sum(self.masses * lp))

    def pushforward(self, f, tol=MERGE_TOL):
        return AtomicComplexMeasure.from_points(f(self.points), self.masses, tol)

    def same_as(self, other, atol=1e-12) -> bool:
        if self.points.shape != other.points.shape:
            return False
        return bool(
            np.all(np.abs(self.points - other.points) <= atol)
            and np.all(np.abs(self.masses - other.masses) <= atol)
        )

    def to_csv(self) -> str:
        return "".join(
            f"{fmt(z.real)},{fmt(z.imag)},{fmt(m)}\n" for z, m in zip(self.points, self.masses)
        )

    @classmethod
    def from_csv(cls, text):
        pts, ms = [], []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            re_, im_, m = (float(t) for t in line.split(","))
            pts.append(complex(re_, im_))
            ms.append(m)
        return cls(pts, ms)


@dataclass(frozen=True)
class Rectangle:
    """Half-open box ``[x0, x1) x [y0, y1)``; infinite bounds allowed."""

    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def degenerate(self) -> bool:
        return not (self.x1 > self.x0 and self.y1 > self.y0)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real >= self.x0) & (z.real < self.x1) & (z.imag >= self.y0) & (z.imag < self.y1)

    def contains_closed(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real >= self.x0) & (z.real <= self.x1) & (z.imag >= self.y0) & (z.imag <= self.y1)

    def boundary_distance(self, z):
        """Distance from ``z`` to the boundary of the box."""
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        inside = self.contains_closed(z)
        dx_in = np.minimum(x - self.x0, self.x1 - x)
        dy_in = np.minimum(y - self.y0, self.y1 - y)
        d_in = np.minimum(dx_in, dy_in)
        ox = np.maximum(np.maximum(self.x0 - x, x - self.x1), 0.0)
        oy = np.maximum(np.maximum(self.y0 - y, y - self.y1), 0.0)
        d_out = np.hypot(ox, oy)
        return np.where(inside, d_in, d_out)

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0


@dataclass
class GridMeasure:
    """Cell masses on an ``nx x ny`` partition of a rectangle.

    ``cell_mass`` is the clipped (nonnegative) estimate; ``raw_mass`` keeps
    the stencil output before clipping, and ``clipped_total`` is the
    absolute mass removed by clipping.
    """

    region: Rectangle
    nx: int
    ny: int
    cell_mass: np.ndarray
    m: float
    raw_mass: Optional[np.ndarray] = None
    clipped_total: float = 0.0
    most_negative: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def hx(self):
        return self.region.width / self.nx

    @property
    def hy(self):
        return self.region.height / self.ny

    @property
    def h(self):
        return max(self.hx, self.hy)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.cell_mass))

    def cell_centers(self):
        xs = self.region.x0 + (np.arange(self.nx) + 0.5) * self.hx
        ys = self.region.y0 + (np.arange(self.ny) + 0.5) * self.hy
        return xs, ys

    def cell_index(self, x, y):
        """Index of the cell containing the point (floored, clamped)."""
        ix = int(math.floor((x - self.region.x0) / self.hx))
        iy = int(math.floor((y - self.region.y0) / self.hy))
        return min(max(ix, 0), self.nx - 1), min(max(iy, 0), self.ny - 1)

    def box_mass(self, ix0, ix1, iy0, iy1, raw=False) -> float:
        """Mass of the cell union ``ix0 <= ix < ix1``, ``iy0 <= iy < iy1``."""
        src = self.raw_mass if raw and self.raw_mass is not None else self.cell_mass
        return float(np.sum(src[ix0:ix1, iy0:iy1]))

    def box_rectangle(self, ix0, ix1, iy0, iy1) -> Rectangle:
        r = self.region
        return Rectangle(r.x0 + ix0 * self.hx, r.x0 + ix1 * self.hx,
                         r.y0 + iy0 * self.hy, r.y0 + iy1 * self.hy)

    def to_csv(self) -> str:
        r = self.region
        lines = [",".join([fmt(r.x0), fmt(r.x1), fmt(r.y0), fmt(r.y1),
                           str(self.nx), str(self.ny), fmt(self.m)])]
        for ix in range(self.nx):
            for iy in range(self.ny):
                lines.append(f"{ix},{iy},{fmt(self.cell_mass[ix, iy])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text):
        rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
        head = rows[0].split(",")
        x0, x1, y0, y1 = (float(t) for t in head[:4])
        nx, ny = int(head[4]), int(head[5])
        m = float(head[6])
        if len(rows) - 1 != nx * ny:
            raise ValueError(f"expected {nx * ny} cell rows, found {len(rows) - 1}")
        mass = np.zeros((nx, ny))
        for ln in rows[1:]:
            a, b, c = ln.split(",")
            mass[int(a), int(b)] = float(c)
        return cls(Rectangle(x0, x1, y0, y1), nx, ny, mass, m)
