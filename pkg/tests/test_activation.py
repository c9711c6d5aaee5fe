import math

import numpy as np
import pytest
from scipy import integrate

from relusat.activation import (
    build_table,
    coeff_closed_form,
    coeff_quadrature,
    coefficient_rows,
    default_table_size,
    harmonic_dims_float,
    index_set_mask,
    index_set_member,
    parity_offset,
    relu_k,
    spectral_tail,
    xi_eval,
)
from relusat.polynomials import harmonic_dims, legendre_eval, legendre_norm_sq, sphere_area


class TestIndexSet:
    def test_membership(self):
        assert [m for m in range(10) if index_set_member(0, m)] == [0, 1, 3, 5, 7, 9]
        assert [m for m in range(10) if index_set_member(1, m)] == [0, 1, 2, 4, 6, 8]
        assert [m for m in range(10) if index_set_member(2, m)] == [0, 1, 2, 3, 5, 7, 9]

    def test_mask(self):
        for k in range(4):
            mask = index_set_mask(k, 50)
            assert list(mask) == [index_set_member(k, m) for m in range(51)]

    def test_parity_offset(self):
        assert parity_offset(0) == 1 and parity_offset(1) == 0 and parity_offset(2) == 1

    def test_relu(self):
        t = np.array([-1.0, 0.0, 0.5])
        np.testing.assert_array_equal(relu_k(t, 0), [0.0, 0.0, 1.0])
        np.testing.assert_array_equal(relu_k(t, 2), [0.0, 0.0, 0.25])


class TestCoefficients:
    def test_known_values(self):
        # sigma_1 on S^2: sigma_hat(1) = 1/6 via <t, max(t,0)> / ||p_1||^2
        np.testing.assert_allclose(coeff_quadrature(2, 1, 1), 1 / 6, rtol=1e-14)
        np.testing.assert_allclose(coeff_quadrature(2, 0, 0), 0.5, rtol=1e-14)

    def test_against_adaptive_quad(self):
        # independent oracle: scipy.quad on the weighted inner product
        for d in (2, 3, 4):
            a = (d - 2) / 2
            for k in (0, 1, 2):
                for m in (k + 1, k + 3, k + 7):
                    ip, _ = integrate.quad(
                        lambda t: t**k * float(legendre_eval(d, m, t)) * (1 - t * t) ** a, 0, 1,
                        epsabs=1e-13, epsrel=1e-11, limit=200,
                    )
                    np.testing.assert_allclose(coeff_closed_form(d, k, m), ip / legendre_norm_sq(d, m), rtol=1e-9)

    @pytest.mark.parametrize("d", (2, 3, 4))
    @pytest.mark.parametrize("k", (0, 1, 2))
    def test_zero_off_index_set(self, d, k):
        for m in range(k + 2, 40, 2):
            assert coeff_closed_form(d, k, m) == 0.0
            assert abs(coeff_quadrature(d, k, m)) < 1e-13

    def test_closed_form_domain(self):
        with pytest.raises(ValueError):
            coeff_closed_form(2, 1, 1)

    def test_sign_pattern(self):
        for k in (0, 1, 2):
            for m in range(k + 1, 80, 2):
                assert np.sign(coeff_closed_form(3, k, m)) == (-1) ** ((m - k - 1) // 2)

    def test_xi_matches_square(self):
        for d in (2, 3, 4):
            for k in (0, 1, 2):
                m = np.arange(k + 1, 201, 2)
                c = np.array([coeff_closed_form(d, k, int(j)) for j in m])
                np.testing.assert_allclose(xi_eval(d, k, m), c**2, rtol=1e-10)

    def test_xi_rejects_small_argument(self):
        with pytest.raises(ValueError):
            xi_eval(2, 1, 1.0)

    def test_xi_decay_order(self):
        # xi(m) ~ m^{-(d+2k+1)}
        d, k = 2, 1
        r = xi_eval(d, k, 4001.0) / xi_eval(d, k, 2001.0)
        np.testing.assert_allclose(math.log2(r) / math.log2(4001 / 2001), -(d + 2 * k + 1), atol=2e-3)


class TestTable:
    def test_tail_matches_direct_sum(self):
        d, k, M = 2, 1, 200
        m = np.arange(M + 1, 2_000_001)
        m = m[(m - k) % 2 == 1]
        direct = float(np.sum(xi_eval(d, k, m) * harmonic_dims_float(d, m)))
        np.testing.assert_allclose(spectral_tail(d, k, M), direct, rtol=1e-6)

    def test_kernel_diag_plus_tail(self):
        # sigma_k(x . x) averaged over the sphere: mean of max(t,0)^{2k}
        for d, k in ((2, 0), (2, 1), (3, 1)):
            t = build_table(d, k, 4096)
            a = (d - 2) / 2
            val, _ = integrate.quad(lambda s: s ** (2 * k) * (1 - s * s) ** a, 0, 1)
            exact = val * sphere_area(d - 1) / sphere_area(d)
            np.testing.assert_allclose(t.kernel_diag() + t.tail, exact, rtol=1e-6)

    def test_harmonic_dims_float(self):
        np.testing.assert_allclose(harmonic_dims_float(4, np.arange(60)), harmonic_dims(4, 59), rtol=1e-12)

    def test_build_rejects_small(self):
        with pytest.raises(ValueError):
            build_table(2, 3, 4)

    def test_default_size(self):
        assert default_table_size(256, 2) == 64

    def test_rows(self):
        rows = list(coefficient_rows(2, 1, 100))
        assert len(rows) == 101
        assert max(r[4] for r in rows) < 1e-8
        assert math.isnan(rows[0][3]) and not math.isnan(rows[2][3])
