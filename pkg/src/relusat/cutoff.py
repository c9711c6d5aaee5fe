"""Smooth dyadic cutoff zeta and the block symbols phi_q."""
from __future__ import annotations

import math

import numpy as np

from .activation import parity_offset, xi_eval


def smooth_step(x):
    """C^infinity step: 1 on (-inf, 1], 0 on [2, inf)."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= 1.0, 1.0, 0.0)
    mid = (x > 1.0) & (x < 2.0)
    xm = x[mid]
    with np.errstate(over="ignore"):
        out[mid] = 1.0 / (1.0 + np.exp(1.0 / (2.0 - xm) - 1.0 / (xm - 1.0)))
    return out


def zeta_eval(t):
    """zeta(t) = h(t) - h(2t); supported in [1/2, 2] with zeta(t) + zeta(2t) = 1 on [1/2, 1]."""
    t = np.asarray(t, dtype=float)
    out = smooth_step(t) - smooth_step(2 * t)
    return float(out) if out.ndim == 0 else out


def partition_check(m: float, q_max: int) -> float:
    """sum_{q=0}^{q_max} zeta(2^{-q} m); equals 1 once 2^{q_max} >= m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if q_max < math.ceil(math.log2(2 * m)):
        raise ValueError(f"q_max={q_max} too small to cover m={m}")
    q = np.arange(q_max + 1)
    return float(np.sum(zeta_eval(m * 2.0 ** (-q))))


def zeta_derivatives(t, h: float = 1e-3):
    """(zeta, zeta', zeta'') by central differences with step h."""
    t = np.asarray(t, dtype=float)
    zp, z0, zm = zeta_eval(t + h), zeta_eval(t), zeta_eval(t - h)
    return z0, (zp - zm) / (2 * h), (zp - 2 * z0 + zm) / h**2


def positivity_constant(num: int = 20001) -> float:
    """Measured c1 = min of zeta over [3/5, 5/3]."""
    return float(np.min(zeta_eval(np.linspace(0.6, 5 / 3, num))))


def phi_eval(q: int, d: int, k: int, t):
    """phi_q(t) = zeta(2t + I_k/2^q) xi(2^{q+1} t + I_k), zero where the xi argument is <= k."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    ik = parity_offset(k)
    arg = 2.0 ** (q + 1) * t + ik
    z = np.atleast_1d(zeta_eval(2 * t + ik / 2.0**q))
    arg = np.atleast_1d(arg)
    out = np.zeros_like(arg)
    ok = (arg > k) & (z != 0)
    out[ok] = z[ok] * xi_eval(d, k, arg[ok])
    return float(out[0]) if t.ndim == 0 else out


def block_degrees(q: int, k: int) -> np.ndarray:
    """Degrees 2m + I_k (> k) where zeta(2^{-q}(2m + I_k)) can be nonzero."""
    ik = parity_offset(k)
    lo, hi = 2.0 ** (q - 1), 2.0 ** (q + 1)
    deg = np.arange(ik, int(hi) + 2, 2)
    return deg[(deg > lo) & (deg < hi) & (deg > k)]


def block_weights(q: int, d: int, k: int):
    """(degrees, weights) with weights phi_q(2^{-q} m) on degree 2m + I_k."""
    deg = block_degrees(q, k)
    w = zeta_eval(deg * 2.0**-q) * xi_eval(d, k, deg) if deg.size else np.zeros(0)
    keep = np.atleast_1d(w) > 0
    return deg[keep], np.atleast_1d(w)[keep]
