"""Best L^2(S^d) approximation from span{sigma_k(theta_j . eta)} for zonal targets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .activation import CoefficientTable, index_set_mask, relu_k
from .polynomials import (
    gauss_rule,
    harmonic_dims,
    legendre_norm_sq,
    legendre_series,
    sphere_product_rule,
)
from .sphere_points import PointSet, normalize


@dataclass(frozen=True)
class ZonalTarget:
    """f(eta) = sum_m fhat(m) p_m(center . eta)."""

    d: int
    center: np.ndarray
    coeffs: np.ndarray = field(repr=False)
    r: float = math.nan
    restricted: bool = False

    @property
    def max_degree(self) -> int:
        return len(self.coeffs) - 1

    def degree_energy(self) -> np.ndarray:
        """||Pi_m f||^2 = fhat(m)^2 N(m)."""
        return self.coeffs**2 * harmonic_dims(self.d, self.max_degree)

    def norm_sq(self) -> float:
        return float(self.degree_energy().sum())

    def sobolev_norm_sq(self, s: float) -> float:
        m = np.arange(self.max_degree + 1, dtype=float)
        return float(np.dot(m ** (2 * s) + 1, self.degree_energy()))

    def tail_norm(self, cutoff_degree: int) -> float:
        """||f - P_{cutoff-1} f||, the energy on degrees >= cutoff_degree."""
        return math.sqrt(float(self.degree_energy()[cutoff_degree:].sum()))

    def __call__(self, eta) -> np.ndarray:
        t = np.clip(np.asarray(eta) @ self.center, -1.0, 1.0)
        return legendre_series(self.d, self.coeffs, t)


def _default_center(d: int) -> np.ndarray:
    # fixed generic direction, away from coordinate axes
    c = np.arange(1, d + 2, dtype=float) ** 0.5
    c[::2] *= -1
    return normalize(c)


def make_sobolev_target(
    d: int,
    k: int,
    r: float,
    M_f: int,
    center=None,
    restrict_to_index_set: bool = True,
    delta: float = 0.5,
) -> ZonalTarget:
    """Zonal target with fhat(m)^2 N(m) = (1+m)^{-2r-1-delta} on the allowed degrees."""
    if r <= 0:
        raise ValueError("r must be positive")
    if M_f < 8:
        raise ValueError("M_f must be >= 8")
    m = np.arange(M_f + 1, dtype=float)
    energy = (1 + m) ** (-2 * r - 1 - delta)
    if restrict_to_index_set:
        energy[~index_set_mask(k, M_f)] = 0.0
    coeffs = np.sqrt(energy / harmonic_dims(d, M_f))
    center = _default_center(d) if center is None else normalize(center)
    return ZonalTarget(d, center, coeffs, r, restrict_to_index_set)


def monomial_target(d: int, k: int, center) -> ZonalTarget:
    """f(eta) = (center . eta)^k expanded in p_0..p_k."""
    rule = gauss_rule(d, k + 2)
    P = np.array([legendre_series(d, np.eye(k + 1)[m], rule.nodes) for m in range(k + 1)])
    c = np.array([rule.integrate(rule.nodes**k * P[m]) / legendre_norm_sq(d, m) for m in range(k + 1)])
    return ZonalTarget(d, normalize(center), c, r=math.inf)


def relu_kernel(d: int, k: int, t, num_nodes: int | None = None):
    """Exact kernel K(x . y) = mean over S^d of sigma_k(x . eta) sigma_k(y . eta).

    Projecting a Gaussian direction onto span{x, y} reduces the sphere average
    to an arc integral:

        K = 2^k k! / (2 pi prod_{i<k} (d+1+2i)) * int_{theta-pi/2}^{pi/2} cos^k(psi) cos^k(psi-theta) dpsi.

    The integrand is a trigonometric polynomial, so Gauss-Legendre converges
    to rounding with a handful of nodes.
    """
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    theta = np.arccos(t)
    moment = math.prod(d + 1 + 2 * i for i in range(k))
    const = 2.0**k * math.factorial(k) / (2 * math.pi * moment)
    if k == 0:
        return const * (np.pi - theta)
    if num_nodes is None:
        num_nodes = 2 * k + 24
    x, w = np.polynomial.legendre.leggauss(num_nodes)
    lo = theta - np.pi / 2
    half = (np.pi / 2 - lo) / 2
    mid = (np.pi / 2 + lo) / 2
    psi = mid[..., None] + half[..., None] * x
    vals = (np.cos(psi) * np.cos(psi - theta[..., None])) ** k
    return const * half * (vals @ w)


@dataclass(frozen=True)
class GramSystem:
    G: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    norm_sq_f: float
    ps: PointSet = field(repr=False)
    table: CoefficientTable = field(repr=False)
    target: ZonalTarget = field(repr=False)
    spectral_tail: float

    @property
    def k(self) -> int:
        return self.table.k


def network_coeffs_b(ps: PointSet, table: CoefficientTable, target: ZonalTarget) -> np.ndarray:
    """b_j = <f, sigma_k(theta_j .)> = sum_m fhat(m) sigma_hat(m) p_m(theta0 . theta_j)."""
    M = target.max_degree
    c = target.coeffs * table.coeffs[: M + 1]
    t = np.clip(ps.points @ target.center, -1.0, 1.0)
    return legendre_series(ps.d, c, t)


def assemble_gram(ps: PointSet, table: CoefficientTable, target: ZonalTarget) -> GramSystem:
    """Gram system for min_a ||f - sum_j a_j sigma_k(theta_j .)||.

    G uses the exact kernel (no truncation); the table is used for b, which
    involves only the finitely many degrees of the target.
    """
    if ps.d != table.d or ps.d != target.d:
        raise ValueError("dimension mismatch between points, table and target")
    if table.max_degree < target.max_degree:
        raise ValueError(
            f"coefficient table too shallow: max_degree {table.max_degree} < required {target.max_degree}"
        )
    G = relu_kernel(ps.d, table.k, ps.gram())
    G = (G + G.T) / 2
    b = network_coeffs_b(ps, table, target)
    return GramSystem(G, b, target.norm_sq(), ps, table, target, table.tail)


@dataclass
class ApproxResult:
    error: float
    a: np.ndarray = field(repr=False)
    error_sq: float
    projection: float
    clamp: float
    dropped_modes: int
    n: int
    norm_f: float
    error_source: str = "gram"

    @property
    def ill_conditioned(self) -> bool:
        return self.dropped_modes > self.n / 2

    def __iter__(self):
        yield self.error
        yield self.a


def residual_norm_quadrature(sys: GramSystem, a, n_polar: int = 200, n_azimuth: int = 400) -> float:
    """||f - f_n|| by direct product quadrature of the pointwise residual."""
    pts, w = sphere_product_rule(sys.ps.d, n_polar, n_azimuth)
    res = sys.target(pts)
    k = sys.table.k
    for start in range(0, sys.ps.n, 64):
        blk = sys.ps.points[start : start + 64]
        res -= relu_k(pts @ blk.T, k) @ np.asarray(a)[start : start + 64]
    return math.sqrt(float(np.dot(w, res**2)))


def best_approx_error(sys: GramSystem, rcond: float = 1e-12, refine_floor: bool = True) -> ApproxResult:
    """Error of the best approximation via the spectral pseudo-inverse of G.

    error^2 = ||f||^2 - b^T G^+ b, evaluated as the residual quadratic form at
    a = G^+ b (stationary, so errors in a enter only to second order).  When
    that value sinks below its rounding floor, the error is recomputed from
    the pointwise residual by surface quadrature.
    """
    if not 0 < rcond < 1:
        raise ValueError("rcond must lie in (0, 1)")
    w, V = scipy.linalg.eigh(sys.G)
    keep = w > rcond * w.max()
    c = V[:, keep].T @ sys.b
    a = V[:, keep] @ (c / w[keep])
    proj = float(np.sum(c**2 / w[keep]))
    ba = float(sys.b @ a)
    aGa = float(a @ sys.G @ a)
    err_sq = sys.norm_sq_f - 2 * ba + aGa
    clamp = max(0.0, -err_sq)
    err = math.sqrt(max(err_sq, 0.0))
    source = "gram"
    floor = 64 * np.finfo(float).eps * (sys.norm_sq_f + abs(ba) + abs(aGa)) * math.sqrt(len(a))
    if refine_floor and err_sq < floor:
        err = residual_norm_quadrature(sys, a)
        source = "residual_quadrature"
    return ApproxResult(err, a, err_sq, proj, clamp, int((~keep).sum()), len(a), math.sqrt(sys.norm_sq_f), source)


def low_degree_energy(a, ps: PointSet, table: CoefficientTable, cutoff_degree: int, total: float | None = None):
    """Split ||f_n||^2 into degrees < cutoff_degree (low) and >= cutoff_degree (high).

    low is the finite sum of sigma_hat(m)^2 a^T P(m) a; high is the exact
    ||f_n||^2 (closed-form kernel, or ``total`` if already known) minus low.
    """
    a = np.asarray(a, dtype=float)
    g = ps.gram()
    if total is None:
        total = float(a @ relu_kernel(ps.d, table.k, g) @ a)
    M = min(cutoff_degree - 1, table.max_degree)
    if M < 0:
        return 0.0, total
    if cutoff_degree - 1 > table.max_degree:
        raise ValueError(f"table max_degree {table.max_degree} below cutoff {cutoff_degree}")
    K_low = legendre_series(ps.d, table.sigma_sq[: M + 1], g)
    low = float(a @ K_low @ a)
    return low, total - low


def spectral_norm_sq(a, ps: PointSet, table: CoefficientTable, with_tail: bool = True) -> float:
    """sum_{m <= M} sigma_hat(m)^2 a^T P(m) a, plus the diagonal tail estimate."""
    a = np.asarray(a, dtype=float)
    K = legendre_series(ps.d, table.sigma_sq, ps.gram())
    val = float(a @ K @ a)
    if with_tail:
        val += table.tail * float(a @ a)
    return val


def pair_integral_quadrature(k: int, rho: float, n_polar: int = 400, n_azimuth: int = 400) -> float:
    """Mean over S^2 of sigma_k(x . eta) sigma_k(y . eta) for rho(x, y) = rho, by direct quadrature.

    Frame: x at the pole, y in the (e1, e3) plane.  In the polar variable
    t = x . eta the inner azimuthal integral has a square-root kink at
    t = sin(rho); the polar range is split there and each piece mapped by
    t = t* -+ w u^2 so Gauss-Legendre sees a smooth integrand.  The azimuthal
    integral runs over the arc where y . eta > 0 (Gauss-Legendre on the arc).
    """
    if not 0.0 <= rho <= np.pi:
        raise ValueError("rho must lie in [0, pi]")
    u, wu = np.polynomial.legendre.leggauss(n_polar // 2)
    u, wu = (u + 1) / 2, wu / 2
    ts = min(max(math.sin(rho), 0.0), 1.0)
    t_parts, w_parts = [], []
    if ts > 0:
        t_parts.append(ts - ts * u**2)
        w_parts.append(wu * 2 * ts * u)
    if ts < 1:
        t_parts.append(ts + (1 - ts) * u**2)
        w_parts.append(wu * 2 * (1 - ts) * u)
    t = np.concatenate(t_parts)
    wt = np.concatenate(w_parts)
    A = np.sqrt(np.clip(1 - t**2, 0, None)) * math.sin(rho)
    B = t * math.cos(rho)
    x, wx = np.polynomial.legendre.leggauss(n_azimuth)
    inner = np.zeros_like(t)
    full = A <= B
    part = (A > np.abs(B))
    # arc half-width where A cos(phi) + B > 0; the full circle when A <= B
    phi_star = np.where(full, np.pi, 0.0)
    phi_star[part] = np.arccos(np.clip(-B[part] / A[part], -1.0, 1.0))
    live = phi_star > 0
    phi = (phi_star[live, None] / 2) * (x + 1)
    vals = relu_k(A[live, None] * np.cos(phi) + B[live, None], k)
    inner[live] = 2 * (phi_star[live] / 2) * (vals @ wx)
    return float(np.dot(wt, t**k * inner) / (4 * np.pi))


def gram_quadrature(ps: PointSet, k: int, n_polar: int = 400, n_azimuth: int = 400) -> np.ndarray:
    """Gram matrix of the network features on S^2, one surface quadrature per pair."""
    if ps.d != 2:
        raise ValueError("pairwise surface quadrature is implemented for d = 2")
    rho = np.arccos(ps.gram())
    K = np.empty((ps.n, ps.n))
    for i in range(ps.n):
        for j in range(i, ps.n):
            K[i, j] = K[j, i] = pair_integral_quadrature(k, float(rho[i, j]), n_polar, n_azimuth)
    return K


def network_norm_sq_quadrature(a, ps: PointSet, k: int, n_polar: int = 400, n_azimuth: int = 400, K=None) -> float:
    """||sum_j a_j sigma_k(theta_j .)||^2 on S^2 from pairwise surface quadratures.

    Pass ``K`` from gram_quadrature to reuse it across coefficient vectors.
    """
    a = np.asarray(a, dtype=float)
    if K is None:
        K = gram_quadrature(ps, k, n_polar, n_azimuth)
    return float(a @ K @ a)


def network_norm_sq_product_rule(a, ps: PointSet, k: int, n_polar: int = 400, n_azimuth: int = 400) -> float:
    """||f_n||^2 by the plain product rule on S^d (accurate only for smooth enough f_n)."""
    pts, w = sphere_product_rule(ps.d, n_polar, n_azimuth)
    vals = relu_k(pts @ ps.points.T, k) @ np.asarray(a, dtype=float)
    return float(np.dot(w, vals**2))
