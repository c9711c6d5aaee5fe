"""Legendre spectrum of the ReLU^k activation sigma_k(t) = max(t, 0)^k on S^d."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .polynomials import (
    _check_dim,
    half_gauss_rule,
    harmonic_dim,
    legendre_eval,
    legendre_norm_sq,
    sphere_area,
)


def parity_offset(k: int) -> int:
    """I_k: 0 for odd k, 1 for even k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return (k + 1) % 2


def relu_k(t, k: int):
    t = np.asarray(t, dtype=float)
    if k == 0:
        return (t > 0).astype(float)
    return np.maximum(t, 0.0) ** k


def index_set_member(k: int, m: int) -> bool:
    """Whether m lies in E_k, the degrees with a nonzero coefficient."""
    if m < 0:
        return False
    return m <= k or (m - k) % 2 == 1


def index_set_mask(k: int, M: int) -> np.ndarray:
    m = np.arange(M + 1)
    return (m <= k) | ((m - k) % 2 == 1)


def _prefactor_log(d: int, k: int) -> float:
    # log of omega_{d-1} k! Gamma(d/2) / omega_d
    return (
        math.log(sphere_area(d - 1)) - math.log(sphere_area(d))
        + math.lgamma(k + 1) + math.lgamma(d / 2)
    )


def _closed_form_array(d: int, k: int, m: np.ndarray) -> np.ndarray:
    """Closed-form coefficients for an array of degrees m >= k+1 (zeros off E_k)."""
    m = np.asarray(m, dtype=np.int64)
    out = np.zeros(m.shape)
    on = (m >= k + 1) & ((m - k) % 2 == 1)
    mm = m[on].astype(float)
    logmag = (
        _prefactor_log(d, k)
        + gammaln(mm - k) - mm * math.log(2.0)
        - gammaln((mm - k + 1) / 2) - gammaln((mm + d + k + 1) / 2)
    )
    sign = np.where(((m[on] - k - 1) // 2) % 2 == 0, 1.0, -1.0)
    out[on] = sign * np.exp(logmag)
    return out


def coeff_closed_form(d: int, k: int, m: int) -> float:
    """sigma_hat_k(m) from the Gamma-ratio formula, valid for m >= k+1.

    Raises ``ValueError`` for m <= k, where only the quadrature projection
    applies.  Returns exactly 0.0 when m - k is even.
    """
    _check_dim(d)
    if m <= k:
        raise ValueError(f"m={m} <= k={k}: use coeff_quadrature")
    if not index_set_member(k, m):
        return 0.0
    return float(_closed_form_array(d, k, np.array([m]))[0])


def coeff_quadrature(d: int, k: int, m: int, num_nodes: int | None = None) -> float:
    """sigma_hat_k(m) = <p_m, sigma_k>_w / ||p_m||_w^2 by Gauss quadrature on [0, 1].

    sigma_k vanishes on [-1, 0], and on [0, 1] the integrand t^k p_m(t) is a
    polynomial, so the half-interval rule is exact for even d.
    """
    _check_dim(d)
    if num_nodes is None:
        num_nodes = (m + k) // 2 + 2 if d % 2 == 0 else max(64, m + k + 32)
    t, w = half_gauss_rule(d, num_nodes)
    ip = np.dot(w, t**k * legendre_eval(d, m, t))
    return float(ip / legendre_norm_sq(d, m))


def log_xi(d: int, k: int, t):
    """log xi(t) for t > k."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= k):
        raise ValueError("xi requires t > k")
    c = _prefactor_log(d, k) - (k + 1) * math.log(2.0) - 0.5 * math.log(math.pi)
    return 2 * c + 2 * (gammaln((t - k) / 2) - gammaln((t + d + k + 1) / 2))


def xi_eval(d: int, k: int, t):
    """xi(t); equals sigma_hat_k(m)^2 at integers m in E_k with m >= k+1."""
    _check_dim(d)
    out = np.exp(log_xi(d, k, t))
    return float(out) if out.ndim == 0 else out


def harmonic_dims_float(d: int, m) -> np.ndarray:
    """N(m) in floating point for large degree arrays."""
    m = np.asarray(m, dtype=float)
    safe = np.maximum(m, 1.0)
    out = (2 * safe + d - 1) / safe * np.exp(
        gammaln(safe + d - 1) - gammaln(d) - gammaln(safe)
    )
    return np.where(m == 0, 1.0, out)


def spectral_tail(d: int, k: int, M: int, *, explicit_terms: int = 1 << 20) -> float:
    """Estimate sum_{m > M, m in E_k} xi(m) N(m).

    Sums ``explicit_terms`` degrees exactly and closes the remainder with the
    integral comparison for the m^{-(2k+2)} decay.
    """
    start = max(M + 1, k + 1)
    m = np.arange(start, start + explicit_terms)
    m = m[(m - k) % 2 == 1]
    terms = np.exp(log_xi(d, k, m)) * harmonic_dims_float(d, m)
    last = m[-1]
    # sum over every other degree beyond `last` of C m^{-(2k+2)}
    remainder = terms[-1] * last / (2 * (2 * k + 1))
    return float(terms.sum() + remainder)


@dataclass(frozen=True)
class CoefficientTable:
    """sigma_hat_k(m) for m = 0..max_degree."""

    d: int
    k: int
    max_degree: int
    coeffs: np.ndarray = field(repr=False)
    tail: float

    @property
    def sigma_sq(self) -> np.ndarray:
        return self.coeffs**2

    @property
    def index_mask(self) -> np.ndarray:
        return index_set_mask(self.k, self.max_degree)

    def kernel_diag(self) -> float:
        """sum_m sigma_hat^2 N(m) up to max_degree, without the tail."""
        N = harmonic_dims_float(self.d, np.arange(self.max_degree + 1))
        return float(np.dot(self.sigma_sq, N))


def build_table(d: int, k: int, M: int) -> CoefficientTable:
    _check_dim(d)
    if M < k + 2:
        raise ValueError("max degree must be >= k+2")
    c = _closed_form_array(d, k, np.arange(M + 1))
    for m in range(k + 1):
        c[m] = coeff_quadrature(d, k, m)
    c.setflags(write=False)
    return CoefficientTable(d, k, M, c, spectral_tail(d, k, M))


def default_table_size(n: int, d: int) -> int:
    """4 n^{1/d} rounded up to a power of two."""
    return 1 << max(3, math.ceil(math.log2(4 * n ** (1.0 / d))))


def coefficient_rows(d: int, k: int, M: int):
    """Rows (m, in_index_set, sigma_hat, xi, gap) for the coeffs CSV."""
    table = build_table(d, k, M)
    for m in range(M + 1):
        member = index_set_member(k, m)
        s = table.coeffs[m]
        xi = xi_eval(d, k, m) if m > k else float("nan")
        if m > k and member:
            q = coeff_quadrature(d, k, m)
            gap = abs(s - q) / abs(q)
        else:
            gap = 0.0 if m <= k else abs(coeff_quadrature(d, k, m))
        yield m, member, s, xi, gap
