"""Gegenbauer/Legendre polynomials on S^d in the addition-theorem normalization.

The degree-m polynomial ``p_m`` is normalized so that

    p_m(x . y) = sum_l Y_{m,l}(x) Y_{m,l}(y)

for an orthonormal basis of degree-m spherical harmonics under the
*normalized* surface measure.  In particular ``p_m(1) = N(m)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

DEGREE_CAP = 4096


def _check_dim(d: int) -> None:
    if int(d) != d or d < 2:
        raise ValueError(f"d must be >= 2, got {d}")


def sphere_area(d: int) -> float:
    """Surface area omega_d of S^d (d >= 0)."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def harmonic_dim(d: int, m: int) -> int:
    """Dimension N(m) of the degree-m spherical harmonics on S^d."""
    _check_dim(d)
    if m < 0:
        raise ValueError("degree must be nonnegative")
    if m == 0:
        return 1
    # (2m+d-1)/m * C(m+d-2, d-1) is always an integer
    num = (2 * m + d - 1) * math.comb(m + d - 2, d - 1)
    q, r = divmod(num, m)
    assert r == 0
    return q


def harmonic_dims(d: int, M: int) -> np.ndarray:
    """N(0..M) as a float array."""
    return np.array([harmonic_dim(d, m) for m in range(M + 1)], dtype=float)


def poly_space_dim(d: int, m: int) -> int:
    """Dimension of P_m(S^d), polynomials of degree <= m restricted to S^d."""
    _check_dim(d)
    if m < 0:
        raise ValueError("degree must be nonnegative")
    if m <= 1:
        return math.comb(d + 1 + m, m)
    return math.comb(d + 1 + m, m) - math.comb(d - 1 + m, m - 2)


def weight_exponent(d: int) -> float:
    return (d - 2) / 2


def _recurrence_coeffs(d: int, M: int):
    """Coefficients of the normalized recurrence R_{m+1} = A_m t R_m - B_m R_{m-1}.

    R_m = C_m^lam / C_m^lam(1) with lam = (d-1)/2, i.e. the Jacobi polynomial
    P_m^{(a,a)}, a = (d-2)/2, rescaled to one at t = 1.
    """
    lam = (d - 1) / 2
    m = np.arange(M, dtype=float)
    A = (2 * m + 2 * lam) / (m + 2 * lam)
    B = m / (m + 2 * lam)
    return A, B


def legendre_eval(d: int, m: int, t):
    """Evaluate p_m(t) with p_m(1) = N(m) by three-term recurrence."""
    _check_dim(d)
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise ValueError("t must lie in [-1, 1]")
    if m < 0:
        raise ValueError("degree must be nonnegative")
    A, B = _recurrence_coeffs(d, m)
    r_prev = np.zeros_like(t)
    r = np.ones_like(t)
    for j in range(m):
        r, r_prev = A[j] * t * r - B[j] * r_prev, r
    out = harmonic_dim(d, m) * r
    return float(out) if out.ndim == 0 else out


def legendre_table(d: int, M: int, t) -> np.ndarray:
    """Array ``P`` with ``P[m] = p_m(t)`` for m = 0..M."""
    _check_dim(d)
    t = np.asarray(t, dtype=float)
    A, B = _recurrence_coeffs(d, M)
    out = np.empty((M + 1,) + t.shape)
    r_prev = np.zeros_like(t)
    r = np.ones_like(t)
    out[0] = r
    for j in range(M):
        r, r_prev = A[j] * t * r - B[j] * r_prev, r
        out[j + 1] = r
    out *= harmonic_dims(d, M).reshape((-1,) + (1,) * t.ndim)
    return out


def legendre_series(d: int, coeffs, t) -> np.ndarray:
    """Evaluate sum_m c[..., m] p_m(t) without storing the whole table.

    ``coeffs`` may be 2-D with shape (S, M+1); the result then has shape
    (S,) + t.shape.  Leading zero coefficients are cheap, trailing ones are
    trimmed.
    """
    _check_dim(d)
    t = np.asarray(t, dtype=float)
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))
    nz = np.flatnonzero(np.any(c != 0, axis=0))
    out = np.zeros((c.shape[0],) + t.shape)
    if nz.size == 0:
        return out if np.ndim(coeffs) > 1 else out[0]
    M = int(nz[-1])
    # fold N(m) into the coefficients so the loop runs on R_m
    cw = c[:, : M + 1] * harmonic_dims(d, M)
    A, B = _recurrence_coeffs(d, M)
    active = cw != 0
    r_prev = np.zeros_like(t)
    r = np.ones_like(t)
    tmp = np.empty_like(t)
    for j in range(M + 1):
        for s in np.flatnonzero(active[:, j]):
            out[s] += cw[s, j] * r
        if j < M:
            # r_next = A t r - B r_prev, written into r_prev's buffer
            np.multiply(t, r, out=tmp)
            tmp *= A[j]
            r_prev *= B[j]
            np.subtract(tmp, r_prev, out=r_prev)
            r, r_prev = r_prev, r
    return out if np.ndim(coeffs) > 1 else out[0]


def legendre_norm_sq(d: int, m: int) -> float:
    """||p_m||^2 in L^2_{w_d}([-1,1]); equals N(m) omega_d / omega_{d-1}."""
    _check_dim(d)
    return harmonic_dim(d, m) * sphere_area(d) / sphere_area(d - 1)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    weight_exponent: float

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def gauss_rule(d: int, num_nodes: int) -> QuadratureRule:
    """Gauss rule on [-1, 1] for the weight (1 - t^2)^{(d-2)/2}."""
    _check_dim(d)
    if num_nodes < 1:
        raise ValueError("num_nodes must be >= 1")
    a = weight_exponent(d)
    x, w = roots_jacobi(num_nodes, a, a)
    return QuadratureRule(np.asarray(x), np.asarray(w), a)


def half_gauss_rule(d: int, num_nodes: int):
    """Nodes/weights on [0, 1] for the weight (1 - t^2)^{(d-2)/2}.

    Gauss-Jacobi for (1 - t)^a on [0, 1]; the remaining factor (1 + t)^a is
    folded into the weights.  For even d it is a polynomial and the rule is
    exact through degree 2*num_nodes - 1 - (d-2)/2.
    """
    _check_dim(d)
    a = weight_exponent(d)
    x, w = roots_jacobi(num_nodes, a, 0.0)
    t = (x + 1) / 2
    w = w * 0.5 ** (a + 1) * (1 + t) ** a
    return t, w


def sphere_product_rule(d: int, n_polar: int, n_azimuth: int):
    """Product rule on S^d for the normalized surface measure.

    Gauss rule in each polar coordinate (weight (1-t^2)^{(j-2)/2} on S^j)
    times the uniform trapezoid rule on the final circle.  Returns
    ``(points, weights)`` with weights summing to one; exact for polynomials
    of degree < min(2 n_polar, n_azimuth).
    """
    _check_dim(d)
    phi = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    wts = np.full(n_azimuth, 1.0 / n_azimuth)
    for j in range(2, d + 1):
        rule = gauss_rule(j, n_polar)
        tw = rule.weights * sphere_area(j - 1) / sphere_area(j)
        s = np.sqrt(1 - rule.nodes**2)
        new_pts = np.concatenate(
            [
                (s[:, None, None] * pts[None, :, :]),
                np.broadcast_to(rule.nodes[:, None, None], (n_polar, len(pts), 1)),
            ],
            axis=2,
        )
        pts = new_pts.reshape(-1, j + 1)
        wts = (tw[:, None] * wts[None, :]).ravel()
    return pts, wts


def rodrigues_shape(d: int, m: int):
    """(1-t^2)^{-a} (d/dt)^m (1-t^2)^{m+a}, a = (d-2)/2, as a sympy expression.

    Proportional to p_m; used as a small-degree oracle after rescaling so
    the value at t = 1 equals N(m).
    """
    import sympy as sp

    t = sp.Symbol("t")
    a = sp.Rational(d - 2, 2)
    expr = (1 - t**2) ** (-a) * sp.diff((1 - t**2) ** (m + a), t, m)
    return t, sp.simplify(expr)
