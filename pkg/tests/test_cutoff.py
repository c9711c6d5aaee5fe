import numpy as np
import pytest

from relusat.activation import parity_offset, xi_eval
from relusat.cutoff import (
    block_degrees,
    block_weights,
    partition_check,
    phi_eval,
    positivity_constant,
    smooth_step,
    zeta_derivatives,
    zeta_eval,
)


class TestZeta:
    def test_support(self):
        t = np.linspace(0, 3, 3001)
        z = zeta_eval(t)
        assert np.all(z[(t <= 0.5) | (t >= 2)] == 0)
        assert np.all(z >= 0) and np.all(z <= 1)

    def test_pairing(self):
        t = np.linspace(0.5, 1, 501)
        np.testing.assert_allclose(zeta_eval(t) + zeta_eval(2 * t), 1.0, atol=1e-15)

    def test_partition_of_unity(self):
        for m in range(1, 10_001):
            assert abs(partition_check(m, 40) - 1) <= 1e-12

    def test_partition_precondition(self):
        with pytest.raises(ValueError):
            partition_check(1000, 5)
        assert abs(partition_check(1000, 11) - 1) <= 1e-12

    def test_positivity(self):
        c1 = positivity_constant()
        assert c1 > 0
        np.testing.assert_allclose(c1, min(zeta_eval(0.6), zeta_eval(5 / 3)), rtol=1e-6)

    def test_smooth(self):
        # derivatives stay bounded across the junctions at 1, 2
        t = np.linspace(0.3, 2.3, 2001)
        _, d1, d2 = zeta_derivatives(t)
        assert np.all(np.isfinite(d1)) and np.max(np.abs(d1)) < 10 and np.max(np.abs(d2)) < 100

    def test_smooth_step_limits(self):
        np.testing.assert_array_equal(smooth_step([0.0, 1.0, 2.0, 5.0]), [1.0, 1.0, 0.0, 0.0])
        np.testing.assert_allclose(smooth_step(1.5), 0.5)


class TestPhi:
    @pytest.mark.parametrize("k", (0, 1, 2))
    def test_dyadic_sum_recovers_xi(self, k):
        ik = parity_offset(k)
        for m in range(0, 300):
            deg = 2 * m + ik
            if deg <= k:
                continue
            s = sum(phi_eval(q, 2, k, m * 2.0**-q) for q in range(0, 12))
            np.testing.assert_allclose(s, xi_eval(2, k, deg), rtol=1e-12)

    def test_vanishes_below_threshold(self):
        assert phi_eval(0, 2, 2, 0.25) == 0.0
        with pytest.raises(ValueError):
            phi_eval(1, 2, 1, -0.1)

    def test_block_degrees(self):
        deg = block_degrees(4, 1)
        assert deg.min() > 8 and deg.max() < 32 and np.all(deg % 2 == 0)
        deg0 = block_degrees(4, 0)
        assert np.all(deg0 % 2 == 1)

    def test_block_weights_consistent(self):
        for q in range(1, 9):
            deg, w = block_weights(q, 3, 1)
            np.testing.assert_allclose(w, zeta_eval(deg * 2.0**-q) * xi_eval(3, 1, deg), rtol=1e-14)
            assert np.all(w > 0)
