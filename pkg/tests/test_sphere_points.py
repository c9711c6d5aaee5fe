import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial import SphericalVoronoi

from relusat.sphere_points import (
    AntipodalDegeneracy,
    PointSet,
    antipodal_distance,
    certify_uniformity,
    generate_antipodal_quasiuniform,
    geodesic,
    kappa_threshold,
    normalize,
)

vec3 = arrays(np.float64, 3, elements=st.floats(-1, 1, allow_nan=False)).filter(lambda v: np.linalg.norm(v) > 1e-3)


class TestMetric:
    @given(vec3, vec3)
    @settings(max_examples=200, deadline=None)
    def test_antipodal_symmetry(self, x, y):
        x, y = normalize(x), normalize(y)
        d = antipodal_distance(x, y)
        assert d == pytest.approx(antipodal_distance(y, x), abs=1e-12)
        assert d == pytest.approx(antipodal_distance(x, -y), abs=1e-12)
        assert 0 <= d <= math.pi / 2 + 1e-12
        assert d <= geodesic(x, y) + 1e-12

    @given(vec3, vec3, vec3)
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, x, y, z):
        x, y, z = normalize(x), normalize(y), normalize(z)
        assert antipodal_distance(x, z) <= antipodal_distance(x, y) + antipodal_distance(y, z) + 1e-7

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            geodesic(np.array([1.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0]))


class TestPointSet:
    def test_validation(self):
        with pytest.raises(ValueError):
            PointSet(2, np.array([[1.0, 0.0]]))
        with pytest.raises(ValueError):
            PointSet(2, np.array([[2.0, 0.0, 0.0]]))
        with pytest.raises(ValueError):
            PointSet(2, np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))

    def test_gram_diagonal(self, pts64):
        g = pts64.gram()
        np.testing.assert_array_equal(np.diag(g), 1.0)
        assert np.all(np.abs(g) <= 1)

    def test_immutable(self, pts64):
        with pytest.raises(ValueError):
            pts64.points[0, 0] = 0.0


class TestGenerator:
    def test_deterministic(self):
        a = generate_antipodal_quasiuniform(2, 100, 5)
        b = generate_antipodal_quasiuniform(2, 100, 5)
        c = generate_antipodal_quasiuniform(2, 100, 6)
        np.testing.assert_array_equal(a.points, b.points)
        assert not np.array_equal(a.points, c.points)

    def test_greedy_prefix_monotone(self):
        ps = generate_antipodal_quasiuniform(2, 120, 3)
        seps = [certify_uniformity(ps.prefix(n), mesh_samples=10).separation for n in range(4, 121, 8)]
        assert all(s1 >= s2 - 1e-15 for s1, s2 in zip(seps, seps[1:]))

    @pytest.mark.parametrize("d", (2, 3))
    def test_packing_bound(self, d):
        # 2n disjoint caps of radius h/2 (points and antipodes) fit on the sphere
        n = 150
        rep = certify_uniformity(generate_antipodal_quasiuniform(d, n, 1), mesh_samples=100)
        r = rep.separation / 2
        if d == 2:
            cap = 2 * math.pi * (1 - math.cos(r)) / (4 * math.pi)
        else:
            cap = (r - math.sin(r) * math.cos(r)) / math.pi
        assert 2 * n * cap <= 1.0

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            generate_antipodal_quasiuniform(3, 4, 0)

    @pytest.mark.parametrize("n", (64, 256))
    def test_mesh_ratio_and_exact_covering_radius(self, n):
        ps = generate_antipodal_quasiuniform(2, n, 2)
        rep = certify_uniformity(ps)
        sv = SphericalVoronoi(ps.points)
        # covering radius = max over Voronoi vertices of distance to the generator
        exact = 0.0
        for i, region in enumerate(sv.regions):
            v = sv.vertices[region]
            exact = max(exact, float(np.max(np.arccos(np.clip(v @ ps.points[i], -1, 1)))))
        assert rep.mesh_norm <= exact + 1e-12
        assert rep.mesh_norm >= 0.98 * exact
        assert rep.mesh_ratio <= 4.0
        assert rep.separation <= rep.separation_geo


class TestKappa:
    def test_threshold(self):
        assert kappa_threshold(0.1, 4.0) == math.ceil(math.log2(40))
        assert kappa_threshold(0.5, 4.0) == 3
        assert 2.0 ** kappa_threshold(0.37) >= 4 / 0.37

    def test_antipodal_pair(self, pts64):
        closed = pts64.prefix(10).with_antipodes()
        rep = certify_uniformity(closed)
        assert rep.separation == 0.0 and rep.antipodal_violation
        assert math.isinf(rep.mesh_ratio)
        with pytest.raises(AntipodalDegeneracy):
            kappa_threshold(rep)
        with pytest.raises(AntipodalDegeneracy):
            kappa_threshold(0.0)

    def test_report_dict(self, pts64):
        d = certify_uniformity(pts64).as_dict()
        assert set(d) >= {"n", "h_underline", "mesh_norm", "mesh_ratio", "antipodal_violation"}
