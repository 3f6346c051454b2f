"""Escape-time Green function of polynomial basins and boundary-exponent fits.

Everything runs on the log scale once iterates leave the escape radius, so no
intermediate quantity overflows; the infinite tail of the escape limit is
closed analytically with a rigorous remainder bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DidNotEscape, InsufficientEscapes, ZeroGradient
from .indices.estimates import IndexEstimate, fit_loglog

_BIG = 1e100
_FACTOR_FREEZE = 1e12


@dataclass(frozen=True)
class PolynomialMap:
    """q(z) = sum a_j z^j with degree >= 2 and a guarded escape radius."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(a) for a in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 3 or coeffs[-1] == 0:
            raise ValueError("need degree >= 2 with nonzero leading coefficient")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def escape_radius(self) -> float:
        lead = abs(self.coefficients[-1])
        rest = sum(abs(a) for a in self.coefficients[:-1])
        # |q(z)| >= 2 |z| whenever |z| >= this radius
        return max(2.0, (2.0 + rest) / lead)

    def __call__(self, z):
        acc = 0.0 + 0.0j
        for a in reversed(self.coefficients):
            acc = acc * z + a
        return acc

    def deriv(self, z):
        acc = 0.0 + 0.0j
        d = self.degree
        for j, a in enumerate(reversed(self.coefficients[1:])):
            acc = acc * z + (d - j) * a
        return acc

    def to_json(self):
        return {"coefficients": [[a.real, a.imag] for a in self.coefficients]}


@dataclass(frozen=True)
class EscapeResult:
    g: float
    err: float
    iterations: int
    grad: complex = field(default=0j)


def escape_green(q: PolynomialMap, w, n_max: int = 2000) -> EscapeResult:
    """Escape-rate potential g = lim d^-n log|q^n(w)| with a tail bound.

    Truncates at the first iterate beyond the escape radius, then accumulates
    the exactly-computable increments d^-(n+1) log(|q(z)|/|z|^d) until they are
    dominated by the leading coefficient, closing the rest as a geometric sum.
    """
    d = q.degree
    lead = abs(q.coefficients[-1])
    rest = sum(abs(a) for a in q.coefficients[:-1])
    z = complex(w)
    R = q.escape_radius
    n = 0
    while abs(z) <= R:
        if n >= n_max:
            raise DidNotEscape(w, n_max)
        z = q(z)
        n += 1
    n_escape = n
    g = math.log(abs(z)) * d ** (-float(n))
    # explicit increments while the iterate is representable
    while abs(z) < _BIG and n < n_max + 64:
        ratio = q(z) / (z ** d)  # a_d + lower-order corrections
        g += math.log(abs(ratio)) * d ** (-float(n + 1))
        z = q(z)
        n += 1
    # analytic closure: remaining increments equal log|a_d| up to O(1/|z|)
    scale = d ** (-float(n)) / (d - 1.0)
    g += math.log(lead) * scale
    err = scale * math.log1p(rest / (lead * abs(z))) if abs(z) < math.inf else 0.0
    err += 1e-15 * abs(g)
    return EscapeResult(g=g, err=err, iterations=n_escape)


def green_gradient(q: PolynomialMap, w) -> complex:
    """Complex logarithmic derivative d^-n (q^n)'(w) / q^n(w) at the frozen tail.

    The update factor z q'(z) / (d q(z)) tends to 1, so the recurrence is run in
    ratio form and frozen once iterates are astronomically large; no overflow.
    """
    d = q.degree
    z = complex(w)
    if z == 0 and q(0j) == 0:
        raise ZeroGradient("gradient recurrence starts at a fixed point")
    s = 1.0 / z if z != 0 else 0j
    n = 0
    escape_green(q, w)  # raises DidNotEscape when the limit does not exist
    while abs(z) < _FACTOR_FREEZE and n < 2000 + 64:
        factor = z * q.deriv(z) / (d * q(z))
        s *= factor
        z = q(z)
        n += 1
    if s == 0:
        raise ZeroGradient(f"vanishing gradient at {w}")
    return s


def julia_distance(q: PolynomialMap, w):
    """Conservative distance bracket [m/4, 4m] with m = g/|grad g|."""
    res = escape_green(q, w)
    s = green_gradient(q, w)
    m = res.g / abs(s)
    return 0.25 * m, 4.0 * m


def _distance_proxy(q: PolynomialMap, w):
    res = escape_green(q, w)
    s = green_gradient(q, w)
    return res.g, abs(s), res.g / abs(s)


def basin_alpha(q: PolynomialMap, rays: int = 192, levels: int = 6,
                seed: int = 0, skip_levels: int = 2) -> IndexEstimate:
    """Boundary exponent of the escape potential from a dyadic ray descent.

    Rays follow the outward gradient field; per dyadic proxy-distance level the
    envelope max of g over rays is fitted against the proxy distance.  The
    envelope, not the per-ray pointwise slope, measures the binding exponent:
    generic rays land on smooth boundary stretches and report exponent one
    regardless of corners elsewhere.  The shallowest levels sit outside the
    asymptotic regime of the distance proxy and are skipped in the fit.
    """
    if rays < 4 or levels < 3:
        raise ValueError("need rays >= 4 and levels >= 3")
    rng = np.random.default_rng(seed)
    jitter = rng.uniform(-0.3, 0.3, rays)
    start_r = 2.0 * q.escape_radius
    levels = levels + skip_levels
    per_level_g = [[] for _ in range(levels)]
    per_level_m = [[] for _ in range(levels)]
    escapes = 0
    for i in range(rays):
        theta = 2.0 * math.pi * (i + jitter[i]) / rays
        w = start_r * complex(math.cos(theta), math.sin(theta))
        try:
            g, mod_s, m = _distance_proxy(q, w)
        except DidNotEscape:
            continue
        escapes += 1
        for k in range(1, levels + 1):
            target = 2.0 ** (-k)
            guard = 0
            while m > target * 1.05 and guard < 400:
                s = green_gradient(q, w)
                step = min(0.25 * m, max(m - target, 0.05 * m))
                # inward along the gradient field, at most a quarter of the proxy distance
                w_try = w - step * (np.conj(s) / abs(s))
                try:
                    g, mod_s, m = _distance_proxy(q, w_try)
                    w = w_try
                except DidNotEscape:
                    step *= 0.5
                    retry = 0
                    while retry < 8:
                        w_try = w - step * (np.conj(s) / abs(s))
                        try:
                            g, mod_s, m = _distance_proxy(q, w_try)
                            w = w_try
                            break
                        except DidNotEscape:
                            step *= 0.5
                            retry += 1
                    else:
                        guard = 400
                guard += 1
            if abs(m - target) <= 0.25 * target:
                per_level_g[k - 1].append(g)
                per_level_m[k - 1].append(m)
    if escapes < rays // 2:
        raise InsufficientEscapes(f"only {escapes}/{rays} rays escaped")
    xs = []
    ys = []
    fit_levels = []
    for k in range(1 + skip_levels, levels + 1):
        if not per_level_g[k - 1]:
            continue
        j = int(np.argmax(per_level_g[k - 1]))
        xs.append(math.log(per_level_m[k - 1][j]))
        ys.append(math.log(per_level_g[k - 1][j]))
        fit_levels.append(k)
    if len(xs) < 3:
        raise InsufficientEscapes(f"only {len(xs)} resolved levels")
    slope, intercept, r2 = fit_loglog(xs, ys)
    return IndexEstimate(value=slope, slope=slope, intercept=intercept, r_squared=r2,
                         fit_range=tuple(fit_levels), method="basin-envelope",
                         detail={"rays": rays, "seed": seed})
