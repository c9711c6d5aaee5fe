import math

import numpy as np
import pytest

from relusat.experiments import (
    CSV_COLUMNS,
    RunRecord,
    certified_lower_bound,
    fit_rate,
    run_rate_sweep,
    saturation_exponent,
    worker_count,
)


class TestFit:
    @pytest.mark.parametrize("slope", (-0.5, -0.75, -1.25, -2.0))
    def test_exact_power_law(self, slope):
        n = 2.0 ** np.arange(5, 11)
        s, se, used = fit_rate(n, 3.0 * n**slope)
        assert s == pytest.approx(slope, abs=1e-12)
        assert se < 1e-10 and used == 6

    def test_noisy_power_law(self):
        rng = np.random.default_rng(0)
        n = 2.0 ** np.arange(5, 11)
        for _ in range(20):
            e = n**-1.25 * (1 + 0.05 * rng.uniform(-1, 1, n.size))
            s, _, _ = fit_rate(n, e)
            assert abs(s + 1.25) <= 0.05

    def test_drops_bad_rows(self):
        n = np.array([32, 64, 128, 256])
        s, _, used = fit_rate(n, np.array([n[0] ** -1.0, np.nan, n[2] ** -1.0, n[3] ** -1.0]))
        assert used == 3 and s == pytest.approx(-1.0)
        with pytest.raises(ValueError):
            fit_rate(n, np.array([1.0, 0.0, -1.0, np.nan]))

    def test_saturation_exponent(self):
        assert saturation_exponent(2, 0) == 0.75
        assert saturation_exponent(2, 1) == 1.25


class TestLowerBound:
    def test_chain_sides(self):
        r = RunRecord(n=10, seed=1, error=0.2, q_kappa_quadform=0.09, f_tail=0.05, norm_f=1.0)
        lhs, rhs, slack = certified_lower_bound(r)
        assert (lhs, rhs) == pytest.approx((0.2, 0.25))
        assert slack == pytest.approx(-0.05)


@pytest.fixture(scope="module")
def report():
    return run_rate_sweep(2, 1, 3.5, [32, 64, 128, 256, 512], seeds=(1, 2), workers=2)


class TestSweep:
    def test_rows_and_fit(self, report):
        assert [r.n for r in report.rows] == [32, 64, 128, 256, 512]
        assert len(report.fit_rows()) == 3
        assert -1.5 < report.fitted_slope < -1.0
        assert report.chain_holds()
        assert report.scaled_rhs_min() > 0
        assert all(r.ok for r in report.runs)

    def test_csv_format(self, report):
        text = report.to_csv()
        assert "\r" not in text
        lines = text.splitlines()
        assert lines[0].startswith("# relusat-rate/1 config=")
        assert lines[1].split(",") == CSV_COLUMNS
        assert len(lines) == 2 + len(report.rows)

    def test_reproducible_bytes(self, report):
        again = run_rate_sweep(2, 1, 3.5, [32, 64, 128, 256, 512], seeds=(1, 2), workers=1)
        assert again.to_csv() == report.to_csv()

    def test_json(self, report):
        doc = report.to_json()
        assert doc["chain_holds"] and math.isfinite(doc["fitted_slope"])
        assert len(doc["runs"]) == 10

    def test_insufficient_data(self):
        rep = run_rate_sweep(2, 0, 2.5, [16, 32], workers=1)
        assert math.isnan(rep.fitted_slope)
        assert any("insufficient" in n for n in rep.notes)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            run_rate_sweep(2, 1, 3.5, [3, 32])

    def test_worker_env(self, monkeypatch):
        monkeypatch.setenv("RELUSAT_THREADS", "3")
        assert worker_count() == 3
