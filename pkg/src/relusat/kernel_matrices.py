"""Degree blocks P(m), dyadic blocks Q_q and their dominance certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .activation import parity_offset
from .cutoff import block_weights
from .polynomials import harmonic_dims, legendre_eval, legendre_series
from .sphere_points import PointSet, UniformityReport, kappa_threshold


class NumericalFailure(RuntimeError):
    pass


def degree_block(ps: PointSet, m: int) -> np.ndarray:
    """P(m) = (p_m(theta_i . theta_j))_{ij}."""
    return legendre_eval(ps.d, m, ps.gram())


def _block_coeffs(levels, d: int, k: int):
    """Coefficient rows over degrees for each level's L_q."""
    rows = [block_weights(q, d, k) for q in levels]
    M = max((int(deg[-1]) for deg, _ in rows if len(deg)), default=0)
    c = np.zeros((len(rows), M + 1))
    for i, (deg, w) in enumerate(rows):
        c[i, deg] = w
    return c


def lq_at_one(q: int, d: int, k: int) -> float:
    """L_q(1) = sum phi_q(2^{-q} m) N(2m + I_k)."""
    deg, w = block_weights(q, d, k)
    if deg.size == 0:
        return 0.0
    return float(np.dot(w, harmonic_dims(d, int(deg[-1]))[deg]))


def localized_kernel_eval(q: int, d: int, k: int, t, M: int | None = None):
    """L_q(t) = sum_m phi_q(2^{-q} m) p_{2m + I_k}(t).

    The symbol has compact support, so the sum is finite; ``M`` (if given)
    must reach the top of the support, 2^{q+1}.
    """
    if M is not None and M < 2 ** (q + 1):
        raise ValueError(f"truncation degree {M} < 2^(q+1) = {2 ** (q + 1)}")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1):
        raise ValueError("t must lie in [-1, 1]")
    out = legendre_series(d, _block_coeffs([q], d, k)[0], t)
    return float(out) if out.ndim == 0 else out


def localized_kernels(levels, d: int, k: int, t) -> np.ndarray:
    """L_q(t) for several levels in a single recurrence pass; shape (len(levels),) + t.shape."""
    return legendre_series(d, _block_coeffs(list(levels), d, k), np.asarray(t, dtype=float))


@dataclass(frozen=True)
class DyadicBlock:
    q: int
    d: int
    k: int
    matrix: np.ndarray = field(repr=False)
    degree_range: tuple
    truncation_residual: float = 0.0

    @property
    def diag(self) -> float:
        return float(self.matrix[0, 0])

    def quadform(self, a) -> float:
        a = np.asarray(a, dtype=float)
        return float(a @ self.matrix @ a)


def assemble_dyadic_blocks(ps: PointSet, levels, d: int, k: int) -> list[DyadicBlock]:
    """Q_q[i, j] = L_q(theta_i . theta_j) for every requested level."""
    levels = list(levels)
    n = ps.n
    iu = np.triu_indices(n, 1)
    t = ps.gram()[iu]
    vals = localized_kernels(levels, d, k, t)
    blocks = []
    for i, q in enumerate(levels):
        Q = np.empty((n, n))
        Q[iu] = vals[i]
        Q.T[iu] = vals[i]
        np.fill_diagonal(Q, lq_at_one(q, d, k))
        Q.setflags(write=False)
        deg, _ = block_weights(q, d, k)
        rng = (int(deg[0]), int(deg[-1])) if deg.size else (0, -1)
        blocks.append(DyadicBlock(q, d, k, Q, rng))
    return blocks


def assemble_dyadic_block(ps: PointSet, q: int, d: int, k: int) -> DyadicBlock:
    return assemble_dyadic_blocks(ps, [q], d, k)[0]


@dataclass(frozen=True)
class DominanceCertificate:
    q: int
    k: int
    diag: float
    max_offdiag_rowsum: float
    lambda_min: float

    @property
    def dominance_ratio(self) -> float:
        return self.max_offdiag_rowsum / self.diag if self.diag > 0 else math.inf

    @property
    def dominant(self) -> bool:
        return self.dominance_ratio <= 0.5

    @property
    def floor_constant(self) -> float:
        return self.lambda_min * 2.0 ** (self.q * (2 * self.k + 1))

    @property
    def gershgorin_ok(self) -> bool:
        slack = 1e-10 * (self.diag + self.max_offdiag_rowsum)
        return self.lambda_min >= self.diag - self.max_offdiag_rowsum - slack

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "diag": self.diag,
            "max_offdiag_rowsum": self.max_offdiag_rowsum,
            "dominance_ratio": self.dominance_ratio,
            "dominant": self.dominant,
            "lambda_min": self.lambda_min,
            "floor_constant": self.floor_constant,
            "gershgorin_ok": self.gershgorin_ok,
        }


def smallest_eigenvalue(A: np.ndarray) -> float:
    try:
        w = scipy.linalg.eigh(A, eigvals_only=True, subset_by_index=[0, 0], check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        fro = float(np.linalg.norm(A)) if np.all(np.isfinite(A)) else math.inf
        raise NumericalFailure(f"eigensolver failed ({exc}); ||A||_F = {fro:.3e}, n = {len(A)}") from exc
    return float(w[0])


def certify_dominance(block: DyadicBlock) -> DominanceCertificate:
    Q = block.matrix
    off = np.abs(Q).sum(axis=1) - np.abs(np.diag(Q))
    return DominanceCertificate(
        block.q, block.k, block.diag, float(off.max()) if len(Q) > 1 else 0.0, smallest_eigenvalue(Q)
    )


@dataclass
class DominanceScan:
    q_start: int
    q_found: int | None
    certificates: list
    separation: float

    @property
    def implied_C3(self) -> float | None:
        return None if self.q_found is None else 2.0**self.q_found * self.separation


def find_dominant_level(
    ps: PointSet, k: int, report: UniformityReport, max_steps: int = 8, batch: int = 1
) -> DominanceScan:
    """Scan q upward from kappa_threshold(report, 1.0) until Q_q is half-dominant.

    A set with an antipodal pair never becomes dominant; the scan then ends
    with ``q_found = None`` rather than raising.
    """
    if report.separation <= 0:
        q0 = 0
    else:
        q0 = max(0, kappa_threshold(report, 1.0))
    certs = []
    q = q0
    while q < q0 + max_steps:
        levels = list(range(q, min(q + batch, q0 + max_steps)))
        for block in assemble_dyadic_blocks(ps, levels, ps.d, k):
            cert = certify_dominance(block)
            certs.append(cert)
            if cert.dominant:
                return DominanceScan(q0, cert.q, certs, report.separation)
        q = levels[-1] + 1
    return DominanceScan(q0, None, certs, report.separation)


@dataclass(frozen=True)
class LocalizationProfile:
    q: int
    theta: np.ndarray
    abs_L: np.ndarray
    envelope: np.ndarray
    L_one: float
    slope: float
    amplitude: float
    fit_points: int


def localization_profile(q: int, d: int, k: int, grid) -> LocalizationProfile:
    """|L_q(cos theta)| on a grid plus a decay fit against log(1 + 2^q sin theta).

    The fit uses the nonincreasing upper envelope over theta in (0, pi/2],
    restricted to 2^q sin theta in [4, 2^q / 4] and to values well above the
    rounding floor of the sum.
    """
    theta = np.asarray(grid, dtype=float)
    if theta.ndim != 1 or theta.size < 8 or np.any(theta <= 0) or np.any(theta >= np.pi):
        raise ValueError("grid must be a 1-D array of at least 8 angles strictly inside (0, pi)")
    theta = np.sort(theta)
    L = np.abs(localized_kernel_eval(q, d, k, np.cos(theta)))
    L1 = lq_at_one(q, d, k)
    half = theta <= np.pi / 2
    env = np.full_like(L, np.nan)
    env[half] = np.maximum.accumulate(L[half][::-1])[::-1]
    x = 2.0**q * np.sin(theta)
    floor = 1e4 * np.finfo(float).eps * L1
    sel = half & (x >= 4) & (x <= 2.0**q / 4) & (env > floor)
    if sel.sum() >= 3:
        X = np.log(1 + x[sel])
        Y = np.log(env[sel])
        slope, intercept = np.polyfit(X, Y, 1)
        amplitude = float(np.exp(intercept) / L1)
    else:
        slope, amplitude = math.nan, math.nan
    return LocalizationProfile(q, theta, L, env, L1, float(slope), amplitude, int(sel.sum()))


def dyadic_norm_sq(a, ps: PointSet, k: int, q_max: int, head_coeffs=None) -> dict:
    """||f_n||^2 assembled as head + sum_{q <= q_max} a^T Q_q a + diagonal tail.

    The dyadic blocks only carry degrees > k; the head collects the degrees
    m <= k (both parities) from the activation's low coefficients.  Degrees
    left uncovered by the truncated partition carry weight 1 - h(2^{-q_max} m)
    and are estimated by their diagonal contribution.
    """
    from .activation import coeff_quadrature, harmonic_dims_float, log_xi, spectral_tail
    from .cutoff import smooth_step

    a = np.asarray(a, dtype=float)
    d = ps.d
    g = ps.gram()
    if head_coeffs is None:
        head_coeffs = np.array([coeff_quadrature(d, k, m) for m in range(k + 1)])
    head = float(a @ legendre_series(d, np.asarray(head_coeffs) ** 2, g) @ a)
    blocks = assemble_dyadic_blocks(ps, range(q_max + 1), d, k)
    dyadic = sum(b.quadform(a) for b in blocks)
    ik = parity_offset(k)
    top = 2 ** (q_max + 1)
    m = np.arange(ik, top + 2, 2)
    m = m[m > k]
    miss = (1 - smooth_step(m * 2.0**-q_max)) * np.exp(log_xi(d, k, m)) * harmonic_dims_float(d, m)
    tail_diag = (float(miss.sum()) + spectral_tail(d, k, int(m[-1]))) * float(a @ a)
    return {"head": head, "dyadic": float(dyadic), "tail": tail_diag, "total": head + float(dyadic) + tail_diag}
