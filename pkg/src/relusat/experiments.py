"""Rate sweeps over n, log-log fits, plateau statistics and the lower-bound chain."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .activation import build_table
from .approximation import assemble_gram, best_approx_error, low_degree_energy, make_sobolev_target
from .kernel_matrices import assemble_dyadic_block, find_dominant_level
from .sphere_points import certify_uniformity, generate_antipodal_quasiuniform

log = logging.getLogger(__name__)

FORMAT_VERSION = "relusat-rate/1"
CSV_COLUMNS = [
    "n",
    "h_underline",
    "kappa",
    "error",
    "err_scaled_saturation",
    "err_scaled_sobolev",
    "lower_bound_rhs",
]


def saturation_exponent(d: int, k: int) -> float:
    return (d + 2 * k + 1) / (2 * d)


def worker_count() -> int:
    env = os.environ.get("RELUSAT_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def fit_rate(n, errors):
    """OLS slope of log2(error) on log2(n) with its standard error.

    Nonpositive or non-finite errors are dropped; returns (slope, stderr, used).
    """
    n = np.asarray(n, dtype=float)
    e = np.asarray(errors, dtype=float)
    ok = np.isfinite(e) & (e > 0) & np.isfinite(n) & (n > 0)
    if ok.sum() < 3:
        raise ValueError(f"need at least 3 positive finite rows to fit, got {int(ok.sum())}")
    res = stats.linregress(np.log2(n[ok]), np.log2(e[ok]))
    return float(res.slope), float(res.stderr), int(ok.sum())


@dataclass
class RunRecord:
    n: int
    seed: int
    h_underline: float = math.nan
    h_geo: float = math.nan
    mesh_ratio: float = math.nan
    q_start: int = -1
    kappa: int = -1
    implied_C3: float = math.nan
    error: float = math.nan
    norm_f: float = math.nan
    dropped_modes: int = 0
    a_norm_sq: float = math.nan
    q_kappa_quadform: float = math.nan
    low_energy: float = math.nan
    high_energy: float = math.nan
    f_tail: float = math.nan
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def lower_bound(self):
        """Both sides of error >= sqrt(a^T Q_kappa a) - ||f - P f||; see certified_lower_bound."""
        return certified_lower_bound(self)


def certified_lower_bound(run: RunRecord):
    """(lhs, rhs, slack) of the proof chain for one run.

    The projection keeps degrees below 2^{kappa-1}, the bottom of Q_kappa's
    degree window, so the high-frequency energy of f_n dominates a^T Q_kappa a.
    """
    lhs = run.error
    rhs = math.sqrt(max(run.q_kappa_quadform, 0.0)) - run.f_tail
    return lhs, rhs, lhs - rhs


def run_single(d, k, r, n, seed, *, table, target, rcond=1e-12) -> RunRecord:
    rec = RunRecord(n=n, seed=seed)
    try:
        ps = generate_antipodal_quasiuniform(d, n, seed)
        rep = certify_uniformity(ps, seed=seed)
        rec.h_underline, rec.h_geo, rec.mesh_ratio = rep.separation, rep.separation_geo, rep.mesh_ratio
        scan = find_dominant_level(ps, k, rep)
        rec.q_start = scan.q_start
        if scan.q_found is None:
            raise RuntimeError("no dominant dyadic level found")
        rec.kappa = scan.q_found
        rec.implied_C3 = scan.implied_C3
        sys = assemble_gram(ps, table, target)
        res = best_approx_error(sys, rcond=rcond)
        rec.error, rec.norm_f, rec.dropped_modes = res.error, res.norm_f, res.dropped_modes
        a = res.a
        rec.a_norm_sq = float(a @ a)
        rec.q_kappa_quadform = assemble_dyadic_block(ps, rec.kappa, d, k).quadform(a)
        cutoff = 2 ** (rec.kappa - 1)
        rec.low_energy, rec.high_energy = low_degree_energy(a, ps, table, cutoff, total=float(a @ sys.G @ a))
        rec.f_tail = target.tail_norm(cutoff)
        if res.ill_conditioned:
            rec.failure = f"ill-conditioned: {res.dropped_modes} of {n} modes dropped"
    except Exception as exc:  # recorded per row; the sweep continues
        log.warning("run n=%d seed=%d failed: %s", n, seed, exc)
        rec.failure = f"{type(exc).__name__}: {exc}"
    return rec


@dataclass
class RateRow:
    n: int
    h_underline: float
    kappa: int
    error: float
    err_scaled_saturation: float
    err_scaled_sobolev: float
    lower_bound_rhs: float


@dataclass
class RateReport:
    config: dict
    rows: list = field(default_factory=list)
    runs: list = field(default_factory=list)
    fit_skip: int = 2
    fitted_slope: float = math.nan
    slope_stderr: float = math.nan
    plateau_ratio: float = math.nan
    plateau_ratio_sobolev: float = math.nan
    notes: list = field(default_factory=list)

    def fit_rows(self):
        return self.rows[self.fit_skip :]

    def chain_holds(self, tol: float = 1e-8) -> bool:
        """Lower-bound chain on every successful run with slack >= -tol ||f||."""
        return all(certified_lower_bound(r)[2] >= -tol * r.norm_f for r in self.runs if r.ok)

    def scaled_rhs_min(self) -> float:
        d, k = self.config["d"], self.config["k"]
        s = saturation_exponent(d, k)
        vals = [certified_lower_bound(r)[1] / r.norm_f * r.n**s for r in self.runs if r.ok]
        return min(vals) if vals else math.nan

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {FORMAT_VERSION} config={json.dumps(self.config, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "config": self.config,
            "fit_skip": self.fit_skip,
            "fitted_slope": self.fitted_slope,
            "slope_stderr": self.slope_stderr,
            "plateau_ratio": self.plateau_ratio,
            "plateau_ratio_sobolev": self.plateau_ratio_sobolev,
            "chain_holds": self.chain_holds(),
            "scaled_rhs_min": self.scaled_rhs_min(),
            "notes": self.notes,
            "rows": [asdict(r) for r in self.rows],
            "runs": [asdict(r) | {"lower_bound": certified_lower_bound(r)} for r in self.runs],
        }


def _fmt(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else repr(float(v))


def _geomean(x):
    x = np.asarray(x, dtype=float)
    return float(np.exp(np.mean(np.log(x)))) if len(x) and np.all(x > 0) else math.nan


def run_rate_sweep(
    d: int,
    k: int,
    r: float,
    n_list,
    seeds=(1,),
    restrict: bool = True,
    *,
    M_f: int = 2048,
    rcond: float = 1e-12,
    fit_skip: int = 2,
    workers: int | None = None,
) -> RateReport:
    """Best-approximation errors over n, averaged (geometric mean) across seeds."""
    n_list = sorted(int(n) for n in n_list)
    seeds = [int(s) for s in np.atleast_1d(seeds)]
    config = dict(d=d, k=k, r=r, n_list=n_list, seeds=seeds, restrict=restrict, M_f=M_f, rcond=rcond, fit_skip=fit_skip)
    report = RateReport(config=config, fit_skip=fit_skip)
    if any(n < d + 2 for n in n_list):
        raise ValueError(f"every n must be >= d+2 = {d + 2}")
    table = build_table(d, k, max(M_f, k + 2))
    target = make_sobolev_target(d, k, r, M_f, restrict_to_index_set=restrict)
    jobs = [(n, s) for n in n_list for s in seeds]
    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        runs = list(pool.map(lambda job: run_single(d, k, r, job[0], job[1], table=table, target=target, rcond=rcond), jobs))
    report.runs = runs
    sat = saturation_exponent(d, k)
    for n in n_list:
        good = [x for x in runs if x.n == n and x.ok]
        if not good:
            report.notes.append(f"n={n}: all seeds failed")
            continue
        err = _geomean([x.error / x.norm_f for x in good])
        rhs = min(certified_lower_bound(x)[1] / x.norm_f for x in good)
        report.rows.append(
            RateRow(n, float(np.mean([x.h_underline for x in good])), max(x.kappa for x in good),
                    err, err * n**sat, err * n ** (r / d), rhs)
        )
    fit = report.fit_rows()
    if len(fit) >= 3:
        report.fitted_slope, report.slope_stderr, _ = fit_rate([x.n for x in fit], [x.error for x in fit])
        sc = np.array([x.err_scaled_saturation for x in fit])
        so = np.array([x.err_scaled_sobolev for x in fit])
        report.plateau_ratio = float(sc.max() / sc.min())
        report.plateau_ratio_sobolev = float(so.max() / so.min())
    else:
        report.notes.append(f"insufficient data: {len(fit)} rows in the fit window, need >= 3")
    return report
