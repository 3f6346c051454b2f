"""Closed-form reference kernels, Green functions, and the slit-disc transport oracle.

Everything here is an independent analytic path used to validate the numerical
machinery: disc formulas, product rules, Reinhardt series with Gamma-integral
norms, and the explicit conformal map of the slit disc.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ..errors import UnsupportedFactor, UnsupportedSpec
from ..geometry import (
    Annulus,
    DomainSpec,
    Polygon,
    ProductDomain,
    ReinhardtEllipsoid,
    SlitDisc,
    UnitDisc,
)
from .basis import KernelValue, normalized_square

# ---------------------------------------------------------------------------
# unit disc
# ---------------------------------------------------------------------------

def disc_kernel(z, w):
    z = np.asarray(z, complex)
    w = np.asarray(w, complex)
    return 1.0 / (math.pi * (1.0 - z * np.conj(w)) ** 2)


def disc_green(z, w):
    """Green function of the unit disc with pole w (negative inside)."""
    z = np.asarray(z, complex)
    w = complex(w)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z - w)) - np.log(np.abs(1.0 - np.conj(w) * z))


def disc_extremal_radial(z, ball_radius: float):
    """Relative extremal function of a centered closed ball in the unit disc.

    Harmonic in the annulus, -1 on the ball, 0 on the circle:
    log|z| / log(1/r0), clamped to [-1, 0].
    """
    z = np.asarray(z, complex)
    r = np.abs(z)
    with np.errstate(divide="ignore"):
        val = np.log(r) / math.log(1.0 / ball_radius)
    return np.clip(val, -1.0, 0.0)


def disc_metric(z):
    z = np.asarray(z, complex)
    return 2.0 / (1.0 - np.abs(z) ** 2) ** 2


def disc_bergman_distance(z0, z1) -> float:
    """Closed form sqrt(2) * (hyperbolic distance / 2) when one endpoint is 0."""
    a = abs(complex(z0))
    b = abs(complex(z1))
    if a != 0.0 and b != 0.0:
        raise UnsupportedFactor("closed form used with one endpoint at the origin")
    r = max(a, b)
    return math.sqrt(2.0) * math.atanh(r)


# ---------------------------------------------------------------------------
# slit disc transport oracle
# ---------------------------------------------------------------------------

def slit_map(z):
    """Conformal map of the slit disc onto the unit disc.

    sqrt with the cut along the slit sends the domain to the upper half-disc;
    the Joukowski-type map -(s + 1/s)/2 opens that to the upper half-plane,
    and a Cayley transform lands on the disc.
    """
    z = np.asarray(z, complex)
    r = np.abs(z)
    th = np.mod(np.angle(z), 2.0 * np.pi)
    s = np.sqrt(r) * np.exp(0.5j * th)
    t = -(s + 1.0 / s) / 2.0
    return (t - 1j) / (t + 1j)


def slit_map_deriv(z):
    z = np.asarray(z, complex)
    r = np.abs(z)
    th = np.mod(np.angle(z), 2.0 * np.pi)
    s = np.sqrt(r) * np.exp(0.5j * th)
    t = -(s + 1.0 / s) / 2.0
    df_dt = 2j / (t + 1j) ** 2
    dt_ds = -(1.0 - 1.0 / s ** 2) / 2.0
    ds_dz = 1.0 / (2.0 * s)
    return df_dt * dt_ds * ds_dz


def slit_kernel(z, w):
    """Transport of the disc kernel through the slit map (oracle of record)."""
    fz = slit_map(z)
    fw = slit_map(w)
    return slit_map_deriv(z) * np.conj(slit_map_deriv(w)) * disc_kernel(fz, fw)


def slit_green(z, w):
    """Green function of the slit disc via conformal invariance."""
    return disc_green(slit_map(z), complex(slit_map(np.asarray(w, complex)).item()))


def slit_extremal(z, ball_center, ball_radius):
    """Transported relative extremal function for a hyperbolic-ball obstacle.

    The image of the obstacle is taken as the closed disc centered at
    f(ball_center) whose radius is the image of the rightmost ball point;
    exact for the transported obstacle, a sub-percent proxy for the Euclidean
    ball at the fixture sizes used here.
    """
    fc = complex(slit_map(np.asarray(ball_center, complex)).item())
    edge = ball_center + ball_radius
    fe = complex(slit_map(np.asarray(edge, complex)).item())
    rho = abs((fe - fc) / (1.0 - np.conj(fc) * fe))
    fz = slit_map(z)
    m = np.abs((fz - fc) / (1.0 - np.conj(fc) * fz))
    with np.errstate(divide="ignore"):
        val = np.log(m) / math.log(1.0 / rho)
    return np.clip(val, -1.0, 0.0)


# ---------------------------------------------------------------------------
# products and Reinhardt ellipsoids
# ---------------------------------------------------------------------------

def kernel_exact(spec: DomainSpec, z, w) -> KernelValue:
    """Closed-form kernel value for specs that admit one."""
    K_zw = _kernel_exact_raw(spec, z, w)
    K_z = _kernel_exact_raw(spec, z, z).real
    K_w = _kernel_exact_raw(spec, w, w).real
    return KernelValue(K_zw=complex(K_zw), K_z=float(K_z), K_w=float(K_w),
                       B=normalized_square(K_zw, K_z, K_w))


def _kernel_exact_raw(spec: DomainSpec, z, w):
    if isinstance(spec, UnitDisc):
        return complex(disc_kernel(z, w))
    if isinstance(spec, SlitDisc):
        return complex(slit_kernel(z, w))
    if isinstance(spec, ProductDomain):
        return _kernel_exact_raw(spec.left, z[0], w[0]) * _kernel_exact_raw(spec.right, z[1], w[1])
    if isinstance(spec, ReinhardtEllipsoid):
        return _reinhardt_series(spec, z, w)
    raise UnsupportedSpec(f"no closed-form kernel for {type(spec).__name__}")


def reinhardt_monomial_norm2(spec: ReinhardtEllipsoid, j1: int, j2: int) -> float:
    """||z1^j1 z2^j2||^2 via the Dirichlet integral in the radii."""
    s1 = (2.0 * j1 + 2.0) / spec.a1
    s2 = (2.0 * j2 + 2.0) / spec.a2
    logval = gammaln(s1) + gammaln(s2) - gammaln(s1 + s2 + 1.0)
    return (2.0 * math.pi) ** 2 / (spec.a1 * spec.a2) * math.exp(logval)


def _reinhardt_series(spec: ReinhardtEllipsoid, z, w, tol=1e-13, max_degree=600):
    u1 = complex(z[0]) * np.conj(complex(w[0]))
    u2 = complex(z[1]) * np.conj(complex(w[1]))
    total = 0.0 + 0.0j
    deg = 0
    while deg <= max_degree:
        layer = 0.0 + 0.0j
        layer_abs = 0.0
        for j1 in range(deg + 1):
            j2 = deg - j1
            term = (u1 ** j1) * (u2 ** j2) / reinhardt_monomial_norm2(spec, j1, j2)
            layer += term
            layer_abs += abs(term)
        total += layer
        if deg > 4 and layer_abs < tol * max(1.0, abs(total)):
            break
        deg += 1
    return total


def product_green(left_green, right_green, pole):
    """Two-variable Green function of a product: max of the factor functions."""
    a, b = pole

    def g(z1, z2):
        return np.maximum(left_green(z1, a), right_green(z2, b))

    return g


def product_extremal(rho1, rho2):
    """Relative extremal function of a product obstacle: max of factor functions."""

    def rho(z1, z2):
        return np.maximum(rho1(z1), rho2(z2))

    return rho
