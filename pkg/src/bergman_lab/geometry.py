"""Model domains: symbolic specs, exact boundary distance, rasterization, dyadic collars.

Planar specs (disc, annulus, polygon, slit disc) rasterize to masked grids with
analytically computed boundary distance.  Two-dimensional specs (products,
Reinhardt ellipsoids) are never rasterized; they are consumed through closed
forms and radial quadrature elsewhere.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.optimize import brentq

from .errors import (
    EmptyRasterization,
    NonPositiveSpacing,
    PointOutsideDomain,
    UnsupportedSpec,
)

_SLIT_X0, _SLIT_X1 = 0.0, 1.0  # the removed segment [0,1) on the real axis


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitDisc:
    def to_json(self):
        return {"type": "unit_disc"}


@dataclass(frozen=True)
class Annulus:
    r_inner: float

    def __post_init__(self):
        if not 0.0 < self.r_inner < 1.0:
            raise ValueError(f"annulus inner radius must lie in (0,1), got {self.r_inner}")

    def to_json(self):
        return {"type": "annulus", "r_inner": self.r_inner}


@dataclass(frozen=True)
class Polygon:
    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if _signed_area(verts) <= 0:
            raise ValueError("polygon vertices must be in counterclockwise order")
        if _self_intersects(verts):
            raise ValueError("polygon edges must not self-intersect")

    def to_json(self):
        return {"type": "polygon", "vertices": [list(v) for v in self.vertices]}


@dataclass(frozen=True)
class SlitDisc:
    """Unit disc minus the radial segment [0,1) on the positive real axis."""

    def to_json(self):
        return {"type": "slit_disc"}


@dataclass(frozen=True)
class ProductDomain:
    left: "PlanarSpec"
    right: "PlanarSpec"

    def to_json(self):
        return {"type": "product", "left": self.left.to_json(), "right": self.right.to_json()}


@dataclass(frozen=True)
class ReinhardtEllipsoid:
    """{ |z1|**a1 + |z2|**a2 < 1 } in C^2 with positive exponents."""

    a1: float
    a2: float

    def __post_init__(self):
        if self.a1 <= 0 or self.a2 <= 0:
            raise ValueError("exponents must be positive")

    def to_json(self):
        return {"type": "reinhardt", "a1": self.a1, "a2": self.a2}


PlanarSpec = Union[UnitDisc, Annulus, Polygon, SlitDisc]
DomainSpec = Union[UnitDisc, Annulus, Polygon, SlitDisc, ProductDomain, ReinhardtEllipsoid]


def spec_from_json(obj) -> DomainSpec:
    """Inverse of ``spec.to_json()``; accepts a dict or a JSON string."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    t = obj["type"]
    if t == "unit_disc":
        return UnitDisc()
    if t == "annulus":
        return Annulus(float(obj["r_inner"]))
    if t == "polygon":
        return Polygon(tuple((v[0], v[1]) for v in obj["vertices"]))
    if t == "slit_disc":
        return SlitDisc()
    if t == "product":
        return ProductDomain(spec_from_json(obj["left"]), spec_from_json(obj["right"]))
    if t == "reinhardt":
        return ReinhardtEllipsoid(float(obj["a1"]), float(obj["a2"]))
    raise UnsupportedSpec(f"unknown domain type {t!r}")


def canonical_json(obj) -> str:
    """Deterministic JSON used for fingerprints and cache keys."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def is_planar(spec: DomainSpec) -> bool:
    return not isinstance(spec, (ProductDomain, ReinhardtEllipsoid))


def _require_planar(spec, op):
    if not is_planar(spec):
        raise UnsupportedSpec(f"{op} is only defined for planar specs, got {type(spec).__name__}")


# ---------------------------------------------------------------------------
# polygon helpers
# ---------------------------------------------------------------------------

def _signed_area(verts):
    a = 0.0
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        a += x1 * y2 - x2 * y1
    return 0.5 * a


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _self_intersects(verts):
    n = len(verts)
    edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared endpoint
            if _segments_cross(*edges[i], *edges[j]):
                return True
    return False


def _poly_edges(spec: Polygon):
    v = np.asarray(spec.vertices, float)
    return v, np.roll(v, -1, axis=0)


def _point_segment_distance(x, y, ax, ay, bx, by):
    """Vectorized distance from points (x, y) to segment (a, b)."""
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    t = np.clip(((x - ax) * vx + (y - ay) * vy) / L2, 0.0, 1.0)
    px, py = ax + t * vx, ay + t * vy
    return np.hypot(x - px, y - py), px, py


# ---------------------------------------------------------------------------
# membership and distance (planar, vectorized)
# ---------------------------------------------------------------------------

def contains(spec: DomainSpec, x, y):
    """Boolean array: point strictly inside the planar spec."""
    _require_planar(spec, "contains")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    r = np.hypot(x, y)
    if isinstance(spec, UnitDisc):
        return r < 1.0
    if isinstance(spec, Annulus):
        return (r < 1.0) & (r > spec.r_inner)
    if isinstance(spec, SlitDisc):
        on_slit = (y == 0.0) & (x >= _SLIT_X0) & (x < _SLIT_X1)
        return (r < 1.0) & ~on_slit
    if isinstance(spec, Polygon):
        inside = np.zeros(np.broadcast(x, y).shape, bool)
        a, b = _poly_edges(spec)
        for (ax, ay), (bx, by) in zip(a, b):
            cond = (ay > y) != (by > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xc = ax + (y - ay) * (bx - ax) / (by - ay)
            inside ^= cond & (x < xc)
        return inside
    raise UnsupportedSpec(type(spec).__name__)


def boundary_distance(spec: DomainSpec, x, y):
    """Exact Euclidean distance from planar points to the boundary (unsigned)."""
    _require_planar(spec, "boundary_distance")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    r = np.hypot(x, y)
    if isinstance(spec, UnitDisc):
        return np.abs(1.0 - r)
    if isinstance(spec, Annulus):
        return np.minimum(np.abs(1.0 - r), np.abs(r - spec.r_inner))
    if isinstance(spec, SlitDisc):
        d_slit, _, _ = _point_segment_distance(x, y, _SLIT_X0, 0.0, _SLIT_X1, 0.0)
        return np.minimum(np.abs(1.0 - r), d_slit)
    if isinstance(spec, Polygon):
        a, b = _poly_edges(spec)
        best = None
        for (ax, ay), (bx, by) in zip(a, b):
            d, _, _ = _point_segment_distance(x, y, ax, ay, bx, by)
            best = d if best is None else np.minimum(best, d)
        return best
    raise UnsupportedSpec(type(spec).__name__)


def nearest_boundary_point(spec: DomainSpec, x, y):
    """Closest boundary point for each planar point; returns (bx, by) arrays."""
    _require_planar(spec, "nearest_boundary_point")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    r = np.hypot(x, y)
    safe_r = np.where(r == 0, 1.0, r)
    if isinstance(spec, UnitDisc):
        bx = np.where(r == 0, 1.0, x / safe_r)
        by = np.where(r == 0, 0.0, y / safe_r)
        return bx, by
    if isinstance(spec, Annulus):
        to_outer = np.abs(1.0 - r) <= np.abs(r - spec.r_inner)
        scale = np.where(to_outer, 1.0, spec.r_inner) / safe_r
        return x * scale, y * scale
    if isinstance(spec, SlitDisc):
        d_slit, px, py = _point_segment_distance(x, y, _SLIT_X0, 0.0, _SLIT_X1, 0.0)
        d_circ = np.abs(1.0 - r)
        cx = np.where(r == 0, 1.0, x / safe_r)
        cy = np.where(r == 0, 0.0, y / safe_r)
        use_slit = d_slit <= d_circ
        return np.where(use_slit, px, cx), np.where(use_slit, py, cy)
    if isinstance(spec, Polygon):
        a, b = _poly_edges(spec)
        best_d = None
        bx = by = None
        for (ax, ay), (bxx, byy) in zip(a, b):
            d, px, py = _point_segment_distance(x, y, ax, ay, bxx, byy)
            if best_d is None:
                best_d, bx, by = d, px, py
            else:
                upd = d < best_d
                best_d = np.where(upd, d, best_d)
                bx = np.where(upd, px, bx)
                by = np.where(upd, py, by)
        return bx, by
    raise UnsupportedSpec(type(spec).__name__)


def first_crossing(spec: DomainSpec, x, y, dx: int, dy: int, max_len: float):
    """Distance along the axis direction (dx, dy) to the first boundary crossing.

    Returns an array with +inf where no crossing occurs within (0, max_len].
    Directions are restricted to the four lattice axes.
    """
    _require_planar(spec, "first_crossing")
    if (dx, dy) not in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        raise ValueError("direction must be a unit lattice direction")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    out = np.full(np.broadcast(x, y).shape, np.inf)

    def circle_hits(R):
        # |(x,y) + t (dx,dy)| = R  ->  t^2 + 2 t (x dx + y dy) + r^2 - R^2 = 0
        b = x * dx + y * dy
        c = x * x + y * y - R * R
        disc = b * b - c
        ok = disc >= 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        for root in (-b - sq, -b + sq):
            t = np.where(ok, root, np.inf)
            yield np.where((t > 1e-15) & (t <= max_len), t, np.inf)

    if isinstance(spec, (UnitDisc, Annulus, SlitDisc)):
        for t in circle_hits(1.0):
            np.minimum(out, t, out=out)
    if isinstance(spec, Annulus):
        for t in circle_hits(spec.r_inner):
            np.minimum(out, t, out=out)
    if isinstance(spec, SlitDisc) and dy != 0:
        t = -y / dy
        hits = (t > 1e-15) & (t <= max_len) & (x >= _SLIT_X0) & (x < _SLIT_X1)
        np.minimum(out, np.where(hits, t, np.inf), out=out)
    if isinstance(spec, Polygon):
        a, b = _poly_edges(spec)
        for (ax, ay), (bx, by) in zip(a, b):
            ex, ey = bx - ax, by - ay
            if dx != 0:
                if ey == 0:
                    continue  # path parallel to a horizontal edge
                s = (y - ay) / ey
                xc = ax + s * ex
                t = (xc - x) / dx
            else:
                if ex == 0:
                    continue
                s = (x - ax) / ex
                yc = ay + s * ey
                t = (yc - y) / dy
            hits = (s >= 0.0) & (s <= 1.0) & (t > 1e-15) & (t <= max_len)
            np.minimum(out, np.where(hits, t, np.inf), out=out)
    return out


# ---------------------------------------------------------------------------
# diameter / bounding box
# ---------------------------------------------------------------------------

def bounding_box(spec: DomainSpec):
    _require_planar(spec, "bounding_box")
    if isinstance(spec, (UnitDisc, SlitDisc, Annulus)):
        return (-1.0, -1.0, 1.0, 1.0)
    v = np.asarray(spec.vertices, float)
    return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())


def diameter(spec: DomainSpec) -> float:
    if isinstance(spec, (UnitDisc, SlitDisc, Annulus)):
        return 2.0
    if isinstance(spec, Polygon):
        v = np.asarray(spec.vertices, float)
        d = np.hypot(v[:, None, 0] - v[None, :, 0], v[:, None, 1] - v[None, :, 1])
        return float(d.max())
    if isinstance(spec, ProductDomain):
        return math.hypot(diameter(spec.left), diameter(spec.right))
    if isinstance(spec, ReinhardtEllipsoid):
        t = np.linspace(0.0, 1.0, 2049)
        r1 = t ** (1.0 / spec.a1)
        r2 = (1.0 - t) ** (1.0 / spec.a2)
        return 2.0 * float(np.sqrt(r1 * r1 + r2 * r2).max())
    raise UnsupportedSpec(type(spec).__name__)


# ---------------------------------------------------------------------------
# exact boundary distance for points, including 2-D specs
# ---------------------------------------------------------------------------

def distance_to_boundary(spec: DomainSpec, z) -> float:
    """Exact boundary distance of an interior point.

    Planar specs take a complex (or 2-tuple) point; products and Reinhardt
    ellipsoids take a pair (z1, z2) of complex numbers.
    """
    if isinstance(spec, ProductDomain):
        z1, z2 = z
        return min(distance_to_boundary(spec.left, z1), distance_to_boundary(spec.right, z2))
    if isinstance(spec, ReinhardtEllipsoid):
        z1, z2 = z
        r1, r2 = abs(complex(z1)), abs(complex(z2))
        if r1 ** spec.a1 + r2 ** spec.a2 >= 1.0:
            raise PointOutsideDomain(f"{z} is not interior to {spec}")
        return _reinhardt_profile_distance(spec.a1, spec.a2, r1, r2)
    zc = complex(z) if not isinstance(z, tuple) else complex(z[0], z[1])
    if not bool(contains(spec, zc.real, zc.imag)):
        raise PointOutsideDomain(f"{z} is not interior to {spec}")
    return float(boundary_distance(spec, zc.real, zc.imag))


def _reinhardt_profile_distance(a1, a2, r1, r2, tol=1e-12):
    """Distance from (r1, r2) to the curve x**a1 + y**a2 = 1 in the closed quadrant.

    The 4-real-dimensional boundary distance reduces to this planar problem
    after aligning phases.  The stationarity condition of the squared distance
    along the curve is solved by bracketed root finding.
    """

    def ycurve(xv):
        return (1.0 - xv ** a1) ** (1.0 / a2)

    def dist2(xv):
        return (xv - r1) ** 2 + (ycurve(xv) - r2) ** 2

    def ddist2(xv):
        yv = ycurve(xv)
        dy = -(a1 / a2) * xv ** (a1 - 1.0) * (1.0 - xv ** a1) ** (1.0 / a2 - 1.0)
        return 2.0 * (xv - r1) + 2.0 * (yv - r2) * dy

    eps = 1e-14
    xs = np.linspace(eps, 1.0 - eps, 257)
    vals = np.array([ddist2(v) for v in xs])
    candidates = [dist2(eps), dist2(1.0 - eps), (1.0 - r1) ** 2 + r2 ** 2, r1 ** 2 + (1.0 - r2) ** 2]
    for i in range(len(xs) - 1):
        if vals[i] == 0.0:
            candidates.append(dist2(xs[i]))
        elif vals[i] * vals[i + 1] < 0:
            root = brentq(ddist2, xs[i], xs[i + 1], xtol=tol)
            candidates.append(dist2(root))
    return math.sqrt(min(candidates))


# ---------------------------------------------------------------------------
# rasterization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridDomain:
    """Masked cell-center grid with analytic boundary distance at every inside cell."""

    spec: DomainSpec
    h: float
    origin: tuple
    mask: np.ndarray
    delta: np.ndarray
    fingerprint: str = field(default="", compare=False)

    @property
    def shape(self):
        return self.mask.shape

    @property
    def xs(self):
        nx = self.mask.shape[0]
        return self.origin[0] + (np.arange(nx) + 0.5) * self.h

    @property
    def ys(self):
        ny = self.mask.shape[1]
        return self.origin[1] + (np.arange(ny) + 0.5) * self.h

    def centers(self):
        """Complex cell centers as a (nx, ny) array."""
        return self.xs[:, None] + 1j * self.ys[None, :]

    def cell_center(self, flat_index):
        i, j = np.unravel_index(flat_index, self.mask.shape)
        return (self.origin[0] + (i + 0.5) * self.h) + 1j * (self.origin[1] + (j + 0.5) * self.h)

    def nearest_cell(self, z):
        """Flat index of the masked cell nearest to the complex point z."""
        i = int(np.clip(round((z.real - self.origin[0]) / self.h - 0.5), 0, self.mask.shape[0] - 1))
        j = int(np.clip(round((z.imag - self.origin[1]) / self.h - 0.5), 0, self.mask.shape[1] - 1))
        if self.mask[i, j]:
            return i * self.mask.shape[1] + j
        # search a small neighborhood for a masked cell
        best, bestd = None, np.inf
        n0, n1 = self.mask.shape
        for di in range(-3, 4):
            for dj in range(-3, 4):
                a, b = i + di, j + dj
                if 0 <= a < n0 and 0 <= b < n1 and self.mask[a, b]:
                    c = self.cell_center(a * n1 + b)
                    d = abs(c - z)
                    if d < bestd:
                        best, bestd = a * n1 + b, d
        if best is None:
            raise PointOutsideDomain(f"{z} has no masked cell nearby")
        return best

    def masked_centers(self):
        """Complex centers of masked cells (flattened) and their flat indices."""
        idx = np.flatnonzero(self.mask)
        c = self.centers().ravel()[idx]
        return c, idx


def rasterize(spec: DomainSpec, h: float) -> GridDomain:
    """Rasterize a planar spec to cell centers with exact boundary distance."""
    _require_planar(spec, "rasterize")
    if h <= 0:
        raise NonPositiveSpacing(f"spacing must be positive, got {h}")
    if h >= diameter(spec) / 8.0:
        raise NonPositiveSpacing(f"spacing {h} too coarse for domain of diameter {diameter(spec)}")
    x0, y0, x1, y1 = bounding_box(spec)
    nx = int(math.ceil((x1 - x0) / h))
    ny = int(math.ceil((y1 - y0) / h))
    xs = x0 + (np.arange(nx) + 0.5) * h
    ys = y0 + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    mask = contains(spec, X, Y)
    if not mask.any():
        raise EmptyRasterization(f"no interior cell for {spec} at h={h}")
    delta = np.full(mask.shape, np.nan)
    delta[mask] = boundary_distance(spec, X[mask], Y[mask])
    fp = hashlib.blake2b(
        canonical_json({"spec": spec.to_json(), "h": repr(float(h))}).encode(),
        digest_size=8,
    ).hexdigest()
    return GridDomain(spec=spec, h=float(h), origin=(float(x0), float(y0)),
                      mask=mask, delta=delta, fingerprint=fp)


# ---------------------------------------------------------------------------
# dyadic collars
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Collar:
    level: int
    cells: np.ndarray  # flat indices into the grid


@dataclass(frozen=True)
class CollarPartition:
    """Disjoint decomposition of masked cells: core, dyadic collars, deep tail.

    core         cells with delta > 1/2
    collars[k-1] cells with 2**-(k+1) < delta <= 2**-k, k = 1..k_max
    tail         cells with delta <= 2**-(k_max+1)
    """

    core: np.ndarray
    collars: tuple
    tail: np.ndarray

    def all_levels(self):
        return self.collars


def collar_partition(grid: GridDomain, k_max: int) -> CollarPartition:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    d = grid.delta.ravel()
    m = grid.mask.ravel()
    core = np.flatnonzero(m & (d > 0.5))
    collars = []
    for k in range(1, k_max + 1):
        lo, hi = 2.0 ** (-k - 1), 2.0 ** (-k)
        collars.append(Collar(k, np.flatnonzero(m & (d > lo) & (d <= hi))))
    tail = np.flatnonzero(m & (d <= 2.0 ** (-k_max - 1)))
    return CollarPartition(core=core, collars=tuple(collars), tail=tail)


def usable_collar_levels(grid: GridDomain, k_max: int, min_cells_per_level: int = 1):
    """Dyadic levels the grid resolves: 2**-k >= 4h."""
    levels = [k for k in range(1, k_max + 1) if 2.0 ** (-k) >= 4.0 * grid.h]
    return levels
