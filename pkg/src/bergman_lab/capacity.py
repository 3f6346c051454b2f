"""Logarithmic capacity by exchange-optimized point configurations,
similarity dimension via the Moran equation, and the planar integrability
ceiling formula."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateSet, DimOutOfRange, InvalidRatios


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("interval needs b > a")

    def to_json(self):
        return {"type": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def to_json(self):
        return {"type": "circle", "radius": self.radius}


@dataclass(frozen=True)
class CantorLinear:
    """Level-L prefix of the two-piece self-similar construction on [0, 1]."""

    ratio: float
    levels: int

    def __post_init__(self):
        if not 0.0 < self.ratio < 0.5:
            raise ValueError("ratio must lie in (0, 1/2) for disjoint pieces")
        if self.levels < 0:
            raise ValueError("levels must be nonnegative")

    def to_json(self):
        return {"type": "cantor", "ratio": self.ratio, "levels": self.levels}

    def intervals(self):
        segs = [(0.0, 1.0)]
        for _ in range(self.levels):
            nxt = []
            for a, b in segs:
                L = (b - a) * self.ratio
                nxt.append((a, a + L))
                nxt.append((b - L, b))
            segs = nxt
        return segs


@dataclass(frozen=True)
class FinitePoints:
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))
        if not self.points:
            raise ValueError("need at least one point")

    def to_json(self):
        return {"type": "finite", "points": [[p.real, p.imag] for p in self.points]}


CompactSetSpec = Union[Interval, Circle, CantorLinear, FinitePoints]


def compact_set_from_json(obj) -> CompactSetSpec:
    t = obj["type"]
    if t == "interval":
        return Interval(float(obj["a"]), float(obj["b"]))
    if t == "circle":
        return Circle(float(obj["radius"]))
    if t == "cantor":
        return CantorLinear(float(obj["ratio"]), int(obj["levels"]))
    if t == "finite":
        return FinitePoints(tuple(complex(p[0], p[1]) for p in obj["points"]))
    raise ValueError(f"unknown compact set type {t!r}")


def candidate_sites(spec: CompactSetSpec, count: int, rng) -> np.ndarray:
    """Discretization of the set the exchange search selects from."""
    if isinstance(spec, Interval):
        return np.linspace(spec.a, spec.b, count).astype(complex)
    if isinstance(spec, Circle):
        th = 2.0 * math.pi * np.arange(count) / count
        return spec.radius * np.exp(1j * th)
    if isinstance(spec, CantorLinear):
        segs = spec.intervals()
        per = max(2, count // len(segs))
        pts = np.concatenate([np.linspace(a, b, per) for a, b in segs])
        return pts.astype(complex)
    if isinstance(spec, FinitePoints):
        return np.asarray(spec.points, complex)
    raise ValueError(type(spec).__name__)


def pairwise_log_sum(pts: np.ndarray) -> float:
    d = np.abs(pts[:, None] - pts[None, :])
    iu = np.triu_indices(pts.size, 1)
    vals = d[iu]
    if np.any(vals == 0.0):
        return -math.inf
    return float(np.log(vals).sum())


def _corrected_diameter(log_sum: float, n: int) -> float:
    """Geometric-mean estimate with the first-order self-interaction correction.

    exp(2 S / (n (n-1)) - log(n)/(n-1)): exact for equally spaced points on a
    circle at every n, and removes the O(log n / n) upward bias of the plain
    pairwise geometric mean on other sets.
    """
    if log_sum == -math.inf:
        return 0.0
    return math.exp(2.0 * log_sum / (n * (n - 1)) - math.log(n) / (n - 1))


def fekete_capacity(spec: CompactSetSpec, n_points: int, restarts: int = 8,
                    seed: int = 0, candidates_per_point: int = 64,
                    max_sweeps: int = 60) -> float:
    """Capacity estimate from an exchange-maximized n-point configuration.

    Coordinate exchange with first-improvement sweeps over a fixed candidate
    discretization, seeded multistart, deterministic max-product reduction.
    """
    if n_points < 8:
        raise ValueError("n_points must be >= 8")
    rng = np.random.default_rng(seed)
    sites = candidate_sites(spec, candidates_per_point * n_points, rng)
    if np.unique(np.round(sites, 14)).size < 2:
        raise DegenerateSet("candidate discretization collapses to a point")
    if isinstance(spec, FinitePoints) and n_points > sites.size:
        # repeated points force the product to zero: finite sets are polar
        return 0.0
    best_val = -math.inf
    for rs in range(restarts):
        sub = np.random.default_rng(seed * 1000003 + rs)
        val = _exchange_run(sites, n_points, sub, max_sweeps)
        if val > best_val:
            best_val = val
    return _corrected_diameter(best_val, n_points)


def _exchange_run(sites, n, rng, max_sweeps):
    pick = rng.choice(sites.size, size=n, replace=False)
    pts = sites[pick].copy()
    # log-sums of each point against the rest
    with np.errstate(divide="ignore"):
        logd = np.log(np.abs(pts[:, None] - pts[None, :]))
    np.fill_diagonal(logd, 0.0)
    row = logd.sum(axis=1)
    for _ in range(max_sweeps):
        improved = False
        for i in range(n):
            others = np.delete(pts, i)
            with np.errstate(divide="ignore"):
                gains = np.log(np.abs(sites[:, None] - others[None, :])).sum(axis=1)
            j = int(np.argmax(gains))
            if gains[j] > row[i] + 1e-12 and sites[j] not in others:
                pts[i] = sites[j]
                with np.errstate(divide="ignore"):
                    cols = np.log(np.abs(pts[:, None] - pts[None, :]))
                np.fill_diagonal(cols, 0.0)
                row = cols.sum(axis=1)
                improved = True
        if not improved:
            break
    return pairwise_log_sum(pts)


def moran_dimension(ratios) -> float:
    """Unique s >= 0 with sum(r_i ** s) = 1, by bisection to 1e-12."""
    ratios = [float(r) for r in ratios]
    if not ratios or any(not 0.0 < r < 1.0 for r in ratios):
        raise InvalidRatios("each ratio must lie in (0, 1)")
    if sum(ratios) >= len(ratios):
        raise InvalidRatios("sum of ratios must be < number of pieces")

    def f(s):
        return sum(r ** s for r in ratios) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1e6:
            raise InvalidRatios("Moran equation has no root in range")
    if f(lo) <= 0:
        return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-12:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def beta_upper_planar(dim: float) -> float:
    """Integrability ceiling 2 + d/(1-d) for complements of thin compact sets."""
    if not 0.0 <= dim < 1.0:
        raise DimOutOfRange(f"dimension must lie in [0, 1), got {dim}")
    return 2.0 + dim / (1.0 - dim)
