"""Boundary-exponent estimation from collar envelopes and Lp scan verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import AllInconclusive, TooFewLevels
from ..geometry import GridDomain, collar_partition
from ..bergman.collars import CONVERGED, DIVERGED, lp_collar_scan
from ..potential import ScalarField


@dataclass(frozen=True)
class IndexEstimate:
    value: float
    slope: float
    intercept: float
    r_squared: float
    fit_range: tuple
    method: str
    detail: dict = None

    def to_json(self):
        d = {
            "value": self.value,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "fit_range": list(self.fit_range),
            "method": self.method,
        }
        if self.detail:
            d["detail"] = self.detail
        return d


def fit_loglog(xs, ys):
    """Least-squares slope/intercept/r^2 of ys against xs."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    xm, ym = xs.mean(), ys.mean()
    sxx = ((xs - xm) ** 2).sum()
    sxy = ((xs - xm) * (ys - ym)).sum()
    slope = sxy / sxx
    intercept = ym - slope * xm
    res = ys - (slope * xs + intercept)
    ss_tot = ((ys - ym) ** 2).sum()
    r2 = 1.0 - float((res ** 2).sum() / ss_tot) if ss_tot > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def estimate_alpha(rho: ScalarField, grid: GridDomain, k_max: int | None = None,
                   window: int = 4) -> IndexEstimate:
    """Decay exponent of the extremal function's collar envelope.

    Fits log(max |rho| over collar k) against the boundary distance of the cell
    attaining the max, over the deepest resolved levels.  The envelope cell's
    own distance is used instead of the nominal dyadic midpoint because deep
    collars hold few discrete distance values and the nominal abscissa skews
    the slope.  Collars touching the obstacle (where rho pins at -1) measure
    the ball, not the boundary, and are excluded; the shallowest levels carry
    the crossover from interior to boundary behavior and only the deepest
    `window` levels enter the fit.
    """
    if k_max is None:
        # envelope maxima stay reliable down to a two-cell layer
        k_max = max(1, int(math.floor(math.log2(1.0 / (2.0 * grid.h)))))
    part = collar_partition(grid, k_max)
    vals = np.abs(rho.values.ravel())
    dd = grid.delta.ravel()
    levels = []
    envelope = []
    env_delta = []
    for col in part.collars:
        if 2.0 ** (-col.level) < 2.0 * grid.h or col.cells.size == 0:
            continue
        v = vals[col.cells]
        fin = np.isfinite(v)
        if not fin.any():
            continue
        cells = col.cells[fin]
        v = v[fin]
        j = int(np.argmax(v))
        m = float(v[j])
        if m >= 1.0 - 1e-9:
            continue  # obstacle inside this collar
        levels.append(col.level)
        envelope.append(m)
        env_delta.append(float(dd[cells[j]]))
    if len(levels) < 3:
        raise TooFewLevels(f"{len(levels)} usable collar levels; need >= 3")
    if len(levels) > window:
        levels = levels[-window:]
        envelope = envelope[-window:]
        env_delta = env_delta[-window:]
    xs = [math.log(d) for d in env_delta]
    ys = [math.log(v) for v in envelope]
    slope, intercept, r2 = fit_loglog(xs, ys)
    return IndexEstimate(value=slope, slope=slope, intercept=intercept, r_squared=r2,
                         fit_range=tuple(levels), method="collar-envelope")


def estimate_beta(source, grid: GridDomain, quad, w, p_grid) -> IndexEstimate:
    """Integrability exponent bracket from per-p collar verdicts.

    Runs the collar scan over ascending p; the estimate is the midpoint of the
    largest converged and smallest diverged p, +inf when nothing diverges.
    """
    p_grid = sorted(float(p) for p in p_grid)
    if not p_grid or p_grid[0] < 2.0:
        raise ValueError("p_grid must be ascending with min >= 2")
    verdicts = {}
    exponents = {}
    for p in p_grid:
        scan = lp_collar_scan(source, w, p, grid, quad)
        verdicts[p] = scan.verdict
        exponents[p] = scan.tail_exponent
    converged = [p for p, v in verdicts.items() if v == CONVERGED]
    diverged = [p for p, v in verdicts.items() if v == DIVERGED]
    detail = {
        "verdicts": {f"{p:g}": verdicts[p] for p in p_grid},
        "tail_exponents": {f"{p:g}": exponents[p] for p in p_grid},
    }
    if not converged and not diverged:
        raise AllInconclusive("every p in the grid fell in the verdict deadband")
    if not diverged:
        value = math.inf
        fit = (p_grid[0], p_grid[-1])
    elif not converged:
        value = 2.0
        fit = (p_grid[0], min(diverged))
    else:
        lo = max(converged)
        hi = min(diverged)
        value = 0.5 * (lo + hi)
        fit = (lo, hi)
    value = max(value, 2.0)
    return IndexEstimate(value=value, slope=math.nan, intercept=math.nan,
                         r_squared=math.nan, fit_range=fit,
                         method="lp-collar-bracket", detail=detail)


def holder_transport(gamma: float, alpha2: float) -> float:
    """Exponent carried through a Holder-continuous boundary extension."""
    if not (0.0 < gamma <= 1.0 and 0.0 < alpha2 <= 1.0):
        raise ValueError("need 0 < gamma <= 1 and 0 < alpha2 <= 1")
    return gamma * alpha2
