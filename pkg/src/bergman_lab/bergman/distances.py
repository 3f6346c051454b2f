"""Kernel-based invariant distances and grid-geodesic upper bounds.

The metric-weighted shortest path on the 8-neighbor cell graph gives an upper
approximation of the Riemannian distance; pairs aligned with lattice
directions avoid the octagonal anisotropy of the graph.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..errors import Disconnected
from ..geometry import GridDomain, boundary_distance

_OFFS = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]


def skwarczynski_distance(B: float) -> float:
    return math.sqrt(max(0.0, 1.0 - math.sqrt(max(0.0, min(B, 1.0)))))


def diastasis(B: float) -> float:
    if B <= 0:
        return math.inf
    return -math.log(min(B, 1.0))


@dataclass(frozen=True)
class DistanceSummary:
    d_B_upper: float
    d_S: float
    D_B: float
    d_K_upper: float


def geodesic_upper(grid: GridDomain, density_at, z0: complex, z1: complex) -> float:
    """Dijkstra over masked cells; edge weight = density(midpoint) * edge length."""
    nx, ny = grid.mask.shape
    mask = grid.mask
    h = grid.h
    xs = grid.xs
    ys = grid.ys

    edge_w = []
    for dx, dy in _OFFS:
        ok = mask & _shift_bool(mask, dx, dy)
        mx = xs[:, None] + 0.5 * dx * h
        my = ys[None, :] + 0.5 * dy * h
        mid = np.broadcast_to(mx, (nx, ny)) + 1j * np.broadcast_to(my, (nx, ny))
        dens = np.full((nx, ny), np.inf)
        pts = mid[ok]
        if pts.size:
            dens[ok] = density_at(pts)
        edge_w.append(np.where(ok, dens * (h * math.hypot(dx, dy)), np.inf).ravel())

    src = grid.nearest_cell(z0)
    dst = grid.nearest_cell(z1)
    dist = np.full(mask.size, np.inf)
    dist[src] = 0.0
    heap = [(0.0, src)]
    strides = [dx * ny + dy for dx, dy in _OFFS]
    while heap:
        d0, u = heapq.heappop(heap)
        if u == dst:
            return d0
        if d0 > dist[u]:
            continue
        for k, s in enumerate(strides):
            w = edge_w[k][u]
            if not math.isfinite(w):
                continue
            v = u + s
            nd = d0 + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    raise Disconnected(f"{z1} not reachable from {z0} through the mask")


def _shift_bool(mask, dx, dy):
    out = np.zeros_like(mask)
    sx = slice(None) if dx == 0 else (slice(None, -dx) if dx > 0 else slice(-dx, None))
    tx = slice(None) if dx == 0 else (slice(dx, None) if dx > 0 else slice(None, dx))
    sy = slice(None) if dy == 0 else (slice(None, -dy) if dy > 0 else slice(-dy, None))
    ty = slice(None) if dy == 0 else (slice(dy, None) if dy > 0 else slice(None, dy))
    out[sx, sy] = mask[tx, ty]
    return out


def bergman_distance_upper(metric_density, grid: GridDomain, z0: complex, z1: complex) -> float:
    """Graph upper bound of the metric distance; density(pts) returns b(pts)."""

    def dens(pts):
        return np.sqrt(np.maximum(metric_density(pts), 0.0))

    return geodesic_upper(grid, dens, z0, z1)


def kobayashi_distance_upper(grid: GridDomain, z0: complex, z1: complex) -> float:
    """Graph upper bound via the ball-inclusion estimate: density 1/delta."""

    def dens(pts):
        d = boundary_distance(grid.spec, pts.real, pts.imag)
        return 1.0 / np.maximum(d, 1e-300)

    return geodesic_upper(grid, dens, z0, z1)


def distances(metric_density, kernel_value, grid: GridDomain, z0: complex, z1: complex) -> DistanceSummary:
    """Bundle of the four quantities for one pair: graph d_B, d_S, diastasis, graph d_K."""
    B = kernel_value.B
    return DistanceSummary(
        d_B_upper=bergman_distance_upper(metric_density, grid, z0, z1),
        d_S=skwarczynski_distance(B),
        D_B=diastasis(B),
        d_K_upper=kobayashi_distance_upper(grid, z0, z1),
    )
