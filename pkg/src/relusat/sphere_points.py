"""Antipodally quasi-uniform point sets on S^d and their uniformity certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .polynomials import _check_dim


class PoolExhausted(RuntimeError):
    pass


class AntipodalDegeneracy(ValueError):
    pass


def _as_unit(x, tol=1e-8):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(np.linalg.norm(x, axis=-1) - 1.0) > tol):
        raise ValueError("input vectors must have unit norm")
    return x


def geodesic(x, y) -> float:
    """rho(x, y) = arccos(x . y), clamped against rounding."""
    x, y = _as_unit(x), _as_unit(y)
    return float(np.arccos(np.clip(np.dot(x, y), -1.0, 1.0)))


def antipodal_distance(x, y) -> float:
    """min(rho(x, y), rho(x, -y))."""
    x, y = _as_unit(x), _as_unit(y)
    return float(np.arccos(np.clip(abs(np.dot(x, y)), 0.0, 1.0)))


@dataclass(frozen=True)
class PointSet:
    d: int
    points: np.ndarray

    def __post_init__(self):
        _check_dim(self.d)
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.d + 1:
            raise ValueError(f"points must have shape (n, {self.d + 1})")
        if np.any(np.abs(np.linalg.norm(pts, axis=1) - 1.0) > 1e-14 * 8):
            raise ValueError("points must have unit norm")
        if len(pts) > 1:
            g = pts @ pts.T
            np.fill_diagonal(g, -2.0)
            if np.max(g) >= 1.0:
                raise ValueError("duplicate points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    def gram(self) -> np.ndarray:
        """Clipped inner products theta_i . theta_j."""
        g = self.points @ self.points.T
        np.clip(g, -1.0, 1.0, out=g)
        np.fill_diagonal(g, 1.0)
        return g

    def prefix(self, n: int) -> "PointSet":
        return PointSet(self.d, self.points[:n])

    def with_antipodes(self) -> "PointSet":
        """The antipodally closed set {theta_j} u {-theta_j}."""
        return PointSet(self.d, np.concatenate([self.points, -self.points]))


def random_sphere(d: int, size: int, rng) -> np.ndarray:
    x = rng.standard_normal((size, d + 1))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def normalize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def generate_antipodal_quasiuniform(
    d: int, n: int, seed: int, pool_factor: int = 50, min_pool: int = 10_000
) -> PointSet:
    """Greedy maximin selection under the antipodal metric from a random pool.

    Each step takes the pool candidate farthest (in min(rho(x, y), rho(x, -y)))
    from the points chosen so far.  Both x and -x are equally far in that
    metric; the sign kept is the one farther from the chosen set in plain
    geodesic distance, which keeps the set covering the whole sphere.
    """
    _check_dim(d)
    if n < d + 2:
        raise ValueError(f"n must be >= d+2 = {d + 2}")
    rng = np.random.default_rng(seed)
    pool = random_sphere(d, max(pool_factor * n, min_pool), rng)
    chosen = np.empty((n, d + 1))
    max_abs = np.full(len(pool), -np.inf)
    max_pos = np.full(len(pool), -np.inf)
    max_neg = np.full(len(pool), -np.inf)
    idx = 0
    for j in range(n):
        if j > 0:
            idx = int(np.argmin(max_abs))
            if max_abs[idx] >= 1.0 - 1e-15:
                raise PoolExhausted(f"pool exhausted after {j} points; enlarge pool_factor")
        x = pool[idx]
        if max_neg[idx] < max_pos[idx]:
            x = -x
        chosen[j] = x
        dots = pool @ x
        np.maximum(max_abs, np.abs(dots), out=max_abs)
        np.maximum(max_pos, dots, out=max_pos)
        np.maximum(max_neg, -dots, out=max_neg)
        max_abs[idx] = np.inf
    return PointSet(d, normalize(chosen))


@dataclass(frozen=True)
class UniformityReport:
    n: int
    separation_geo: float
    separation: float
    mesh_norm: float
    mesh_samples: int
    mesh_is_estimate: bool = True

    @property
    def mesh_ratio(self) -> float:
        return self.mesh_norm / self.separation if self.separation > 0 else math.inf

    @property
    def antipodal_violation(self) -> bool:
        return self.separation <= 0.0

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "h_geo": self.separation_geo,
            "h_underline": self.separation,
            "mesh_norm": self.mesh_norm,
            "mesh_norm_is_lower_estimate": self.mesh_is_estimate,
            "mesh_samples": self.mesh_samples,
            "mesh_ratio": self.mesh_ratio,
            "antipodal_violation": self.antipodal_violation,
        }


def _chord_to_angle(c):
    return 2.0 * np.arcsin(np.clip(c / 2.0, 0.0, 1.0))


def _mesh_estimate(ps: PointSet, samples: int, rng, rounds: int = 3, top: int = 16, trials: int = 64):
    tree = cKDTree(ps.points)
    probe = random_sphere(ps.d, samples, rng)
    dist, _ = tree.query(probe)
    order = np.argsort(dist)[-top:]
    best_pts, best = probe[order], dist[order]
    step = np.max(best) / 2
    for _ in range(rounds):
        for i in range(len(best_pts)):
            cand = normalize(best_pts[i] + step * rng.standard_normal((trials, ps.d + 1)))
            cd, _ = tree.query(cand)
            j = int(np.argmax(cd))
            if cd[j] > best[i]:
                best[i], best_pts[i] = cd[j], cand[j]
        step /= 2
    return float(_chord_to_angle(np.max(best)))


def certify_uniformity(ps: PointSet, mesh_samples: int | None = None, seed: int = 0) -> UniformityReport:
    """Separation (exact) and mesh norm (sampled lower estimate, hill-climbed)."""
    if ps.n < 2:
        raise ValueError("need at least two points")
    if mesh_samples is None:
        mesh_samples = 100 * ps.n
    g = ps.points @ ps.points.T
    np.fill_diagonal(g, -np.inf)
    sep_geo = float(np.arccos(min(1.0, np.max(g))))
    np.fill_diagonal(g, 0.0)
    sep = float(np.arccos(min(1.0, np.max(np.abs(g)))))
    mesh = _mesh_estimate(ps, mesh_samples, np.random.default_rng(seed))
    return UniformityReport(ps.n, sep_geo, sep, mesh, mesh_samples)


def kappa_threshold(separation, C3: float = 4.0) -> int:
    """kappa = ceil(log2(C3 / h)), the first level with 2^kappa >= C3 / h."""
    h = separation.separation if isinstance(separation, UniformityReport) else float(separation)
    if h <= 0:
        raise AntipodalDegeneracy(
            "antipodal separation is zero: the set contains an antipodal pair, no dyadic level is dominant"
        )
    return math.ceil(math.log2(C3 / h) - 1e-12)
