"""Orthonormal holomorphic bases by Gram-matrix orthonormalization.

Monomial families per domain variant (integer powers on discs and polygons,
Laurent powers on annuli, half-integer powers with the cut along the slit on
slit discs, two-index monomials on Reinhardt ellipsoids) are orthonormalized
with pivoted Cholesky so near-dependent tails are dropped instead of poisoning
the factor.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg import solve_triangular

from ..errors import BasisLargerThanQuadrature, DegenerateKernel, GramNotPD, UnsupportedSpec
from ..geometry import (
    Annulus,
    DomainSpec,
    Polygon,
    ReinhardtEllipsoid,
    SlitDisc,
    UnitDisc,
    canonical_json,
)
from .quadrature import QuadratureRule

PIVOT_DROP = 1e-13


@dataclass(frozen=True)
class KernelValue:
    K_zw: complex
    K_z: float
    K_w: float
    B: float


def normalized_square(K_zw, K_z, K_w) -> float:
    return float(abs(K_zw) ** 2 / (K_z * K_w))


def _branch_power(z, e):
    """z**e with the branch cut along the nonnegative real axis (arg in [0, 2pi))."""
    z = np.asarray(z, complex)
    e = float(e)
    if e == 0.0:
        return np.ones_like(z)
    if e == round(e):
        return z ** int(round(e))
    r = np.abs(z)
    th = np.mod(np.angle(z), 2.0 * np.pi)
    out = np.zeros_like(z)
    pos = r > 0
    out[pos] = np.exp(e * (np.log(r[pos]) + 1j * th[pos]))
    return out


def planar_exponents(spec: DomainSpec, N: int):
    """Monomial exponent ladder used for each planar variant."""
    if isinstance(spec, (UnitDisc, Polygon)):
        return np.arange(0, N + 1, dtype=float)
    if isinstance(spec, SlitDisc):
        return np.arange(0, 2 * N + 1, dtype=float) / 2.0
    if isinstance(spec, Annulus):
        return np.array(sorted(range(-N, N + 1), key=abs), dtype=float)
    raise UnsupportedSpec(type(spec).__name__)


def _normalization(spec: DomainSpec):
    """Affine conditioning map z -> (z - center)/scale applied before Gram assembly.

    The slit and annulus ladders stay in domain coordinates: their powers are
    tied to the cut and to the hole, so recentering would change the family.
    """
    if isinstance(spec, Polygon):
        v = np.asarray(spec.vertices, float)
        c = v.mean(axis=0)
        scale = float(np.hypot(v[:, 0] - c[0], v[:, 1] - c[1]).max())
        return complex(c[0], c[1]), scale
    return 0.0 + 0.0j, 1.0


@dataclass(frozen=True)
class OrthoBasis:
    """Orthonormalized family phi_k = sum_j Linv[k, j] * m_piv[j] over a quadrature rule."""

    spec: DomainSpec
    exponents: np.ndarray          # [m] floats (planar) or [m, 2] ints (Reinhardt)
    center: complex
    scale: float
    lower: np.ndarray              # Cholesky factor of the pivoted Gram, lower triangular
    piv: np.ndarray                # pivot order into exponents
    gram: np.ndarray = field(repr=False, default=None)
    quad_fingerprint: str = ""
    pivot_log: tuple = ()

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def fingerprint(self) -> str:
        payload = {
            "spec": self.spec.to_json(),
            "quad": self.quad_fingerprint,
            "m": int(self.exponents.shape[0]),
            "dim": int(self.dim),
        }
        return hashlib.blake2b(canonical_json(payload).encode(), digest_size=8).hexdigest()

    # -- monomials -----------------------------------------------------------

    def _monomials(self, pts, deriv=False):
        pts = np.atleast_1d(np.asarray(pts, complex))
        if self.exponents.ndim == 2:
            if deriv:
                raise UnsupportedSpec("derivatives on two-variable bases")
            z1 = np.asarray([p[0] for p in pts]) if pts.dtype == object else None
            raise UnsupportedSpec("two-variable monomials take tuple points; use eval_basis_pair")
        zeta = (pts - self.center) / self.scale
        exps = self.exponents[self.piv]
        M = np.empty((exps.size, pts.size), complex)
        for i, e in enumerate(exps):
            if deriv:
                M[i] = (e / self.scale) * _branch_power(zeta, e - 1.0) if e != 0.0 else 0.0
            else:
                M[i] = _branch_power(zeta, e)
        return M

    def eval_basis(self, pts) -> np.ndarray:
        """phi_k at planar points; shape [dim, npts]."""
        M = self._monomials(pts)
        return solve_triangular(self.lower, M, lower=True)

    def eval_basis_deriv(self, pts) -> np.ndarray:
        """d/dz of phi_k at planar points; shape [dim, npts]."""
        M = self._monomials(pts, deriv=True)
        return solve_triangular(self.lower, M, lower=True)

    def eval_basis_pair(self, pts1, pts2) -> np.ndarray:
        """phi_k for two-variable bases at paired points (z1_i, z2_i)."""
        if self.exponents.ndim != 2:
            raise UnsupportedSpec("eval_basis_pair requires a two-variable basis")
        z1 = np.atleast_1d(np.asarray(pts1, complex))
        z2 = np.atleast_1d(np.asarray(pts2, complex))
        exps = self.exponents[self.piv]
        M = np.empty((exps.shape[0], z1.size), complex)
        for i, (j1, j2) in enumerate(exps):
            M[i] = z1 ** int(j1) * z2 ** int(j2)
        return solve_triangular(self.lower, M, lower=True)

    # -- kernel evaluations ----------------------------------------------------

    def kernel(self, z, w) -> KernelValue:
        if self.exponents.ndim == 2:
            Pz = self.eval_basis_pair(z[0], z[1])[:, 0]
            Pw = self.eval_basis_pair(w[0], w[1])[:, 0]
        else:
            Pz = self.eval_basis(z)[:, 0]
            Pw = self.eval_basis(w)[:, 0]
        K_zw = complex(np.sum(Pz * np.conj(Pw)))
        K_z = float(np.sum(np.abs(Pz) ** 2))
        K_w = float(np.sum(np.abs(Pw) ** 2))
        if K_z <= 0 or K_w <= 0:
            raise DegenerateKernel("vanishing diagonal kernel")
        return KernelValue(K_zw=K_zw, K_z=K_z, K_w=K_w, B=normalized_square(K_zw, K_z, K_w))

    def kernel_with_pole(self, w, pts) -> np.ndarray:
        """K(pts, w) as a complex vector."""
        Pw = np.conj(self.eval_basis(w)[:, 0])
        P = self.eval_basis(pts)
        return Pw @ P

    def kernel_diag(self, pts) -> np.ndarray:
        P = self.eval_basis(pts)
        return np.sum(np.abs(P) ** 2, axis=0).real


def gram(quad: QuadratureRule, N: int, spec: DomainSpec, keep_gram: bool = False) -> OrthoBasis:
    """Monomial Gram matrix over the rule, pivoted-Cholesky orthonormalization."""
    if isinstance(spec, ReinhardtEllipsoid):
        return _gram_reinhardt(N, spec)
    exps = planar_exponents(spec, N)
    m = exps.size
    if m > len(quad):
        raise BasisLargerThanQuadrature(f"basis size {m} exceeds {len(quad)} quadrature nodes")
    center, scale = _normalization(spec)
    zeta = (quad.points - center) / scale
    G = np.zeros((m, m), complex)
    chunk = 200_000
    for lo in range(0, zeta.size, chunk):
        zz = zeta[lo:lo + chunk]
        ww = quad.weights[lo:lo + chunk]
        A = np.empty((m, zz.size), complex)
        for i, e in enumerate(exps):
            A[i] = _branch_power(zz, e)
        G += (A * ww) @ np.conj(A.T)
    L, piv, ranked, pivot_log = _pivoted_cholesky(G)
    basis = OrthoBasis(spec=spec, exponents=exps, center=center, scale=scale,
                       lower=L, piv=piv[:ranked],
                       gram=G if keep_gram else None,
                       quad_fingerprint=quad.fingerprint, pivot_log=tuple(pivot_log))
    return basis


def _pivoted_cholesky(G):
    """Diagonal-pivoted Cholesky with relative drop threshold; returns (L, piv, rank, log)."""
    G = np.array(G, complex)
    m = G.shape[0]
    piv = np.arange(m)
    d0 = float(np.max(G.diagonal().real))
    if d0 <= 0:
        raise GramNotPD("Gram diagonal is not positive")
    log = []
    for i in range(m):
        drem = G.diagonal().real.copy()
        drem[:i] = -np.inf
        j = int(np.argmax(drem))
        if G[j, j].real <= PIVOT_DROP * d0:
            rank = i
            if rank == 0:
                raise GramNotPD("first pivot below threshold")
            log.append(("drop", m - rank))
            return np.tril(G[:rank, :rank]), piv, rank, log
        if j != i:
            G[[i, j], :] = G[[j, i], :]
            G[:, [i, j]] = G[:, [j, i]]
            piv[[i, j]] = piv[[j, i]]
        G[i, i] = math.sqrt(G[i, i].real)
        if i + 1 < m:
            G[i + 1:, i] /= G[i, i]
            G[i + 1:, i + 1:] -= np.outer(G[i + 1:, i], np.conj(G[i + 1:, i]))
        G[i, i + 1:] = 0.0
    return np.tril(G), piv, m, log


def _gram_reinhardt(N: int, spec: ReinhardtEllipsoid) -> OrthoBasis:
    """Diagonal Gram on a Reinhardt ellipsoid via one-axis-reduced radial quadrature.

    Rotational symmetry kills every off-diagonal inner product, so only the
    squared norms of z1**j1 z2**j2 are integrated:
      ||m||^2 = (2 pi)^2 / (2 j2 + 2) * int_0^1 r^(2 j1 + 1) (1 - r^a1)^((2 j2 + 2)/a2) dr.
    """
    exps = np.array([(j1, j2) for j1 in range(N + 1) for j2 in range(N + 1 - j1)], dtype=int)
    norms2 = np.empty(exps.shape[0])
    for i, (j1, j2) in enumerate(exps):
        power = (2.0 * j2 + 2.0) / spec.a2

        def integrand(r, p1=2 * j1 + 1, pw=power, a1=spec.a1):
            return r ** p1 * (1.0 - r ** a1) ** pw

        val, _ = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
        norms2[i] = (2.0 * math.pi) ** 2 / (2.0 * j2 + 2.0) * val
    L = np.diag(np.sqrt(norms2)).astype(complex)
    return OrthoBasis(spec=spec, exponents=exps, center=0.0j, scale=1.0,
                      lower=L, piv=np.arange(exps.shape[0]),
                      quad_fingerprint=f"reinhardt-radial-{spec.a1}-{spec.a2}")


# ---------------------------------------------------------------------------
# projection, Berezin transform, metric
# ---------------------------------------------------------------------------

def projection(basis: OrthoBasis, f_samples, quad: QuadratureRule):
    """L2 projection onto the basis span: coefficients and a pointwise evaluator."""
    P = _basis_at_nodes(basis, quad)
    coeffs = (P * quad.weights) @ np.conj(np.asarray(f_samples, complex))
    coeffs = np.conj(coeffs)

    def evaluate(pts):
        return coeffs @ basis.eval_basis(pts)

    return coeffs, evaluate


def berezin(basis: OrthoBasis, f_samples, z, quad: QuadratureRule) -> complex:
    """Berezin transform of sampled f at z: weighted |K(., z)|^2 / K(z) average."""
    Kz = basis.kernel_with_pole(z, quad.points)
    K_at_z = basis.kernel(z, z).K_z
    dens = np.abs(Kz) ** 2 / K_at_z
    return complex(np.sum(quad.weights * np.asarray(f_samples) * dens))


_NODE_CACHE = {}


def _basis_at_nodes(basis: OrthoBasis, quad: QuadratureRule) -> np.ndarray:
    key = (basis.fingerprint(), quad.fingerprint)
    hit = _NODE_CACHE.get(key)
    if hit is not None:
        return hit
    P = basis.eval_basis(quad.points)
    if len(_NODE_CACHE) > 8:
        _NODE_CACHE.clear()
    _NODE_CACHE[key] = P
    return P


def bergman_metric(basis: OrthoBasis, z) -> float:
    """Metric density b(z) = (A C - |B|^2) / A^2 from exact basis derivatives."""
    P = basis.eval_basis(z)[:, 0]
    D = basis.eval_basis_deriv(z)[:, 0]
    A = float(np.sum(np.abs(P) ** 2))
    if A <= 0:
        raise DegenerateKernel("kernel vanishes at evaluation point")
    Bc = complex(np.sum(D * np.conj(P)))
    C = float(np.sum(np.abs(D) ** 2))
    return (A * C - abs(Bc) ** 2) / (A * A)


def bergman_metric_grid(basis: OrthoBasis, pts) -> np.ndarray:
    """Vectorized metric density at many points."""
    P = basis.eval_basis(pts)
    D = basis.eval_basis_deriv(pts)
    A = np.sum(np.abs(P) ** 2, axis=0).real
    Bc = np.sum(D * np.conj(P), axis=0)
    C = np.sum(np.abs(D) ** 2, axis=0).real
    if np.any(A <= 0):
        raise DegenerateKernel("kernel vanishes at an evaluation point")
    return (A * C - np.abs(Bc) ** 2) / (A * A)
