"""Fast invariant suites behind ``relusat verify``."""
from __future__ import annotations

import numpy as np

from . import activation, cutoff, kernel_matrices, polynomials, sphere_points
from .approximation import (
    assemble_gram,
    best_approx_error,
    low_degree_energy,
    make_sobolev_target,
    monomial_target,
    relu_kernel,
    spectral_norm_sq,
)
from .experiments import fit_rate


def _polynomials():
    d_list = (2, 3, 4)
    ok = all(
        abs(polynomials.legendre_eval(d, m, 1.0) - polynomials.harmonic_dim(d, m)) <= 1e-10 * polynomials.harmonic_dim(d, m)
        for d in d_list
        for m in range(0, 80)
    )
    yield "addition-theorem normalization p_m(1) = N(m)", ok
    ok = all(
        polynomials.poly_space_dim(d, m) == sum(polynomials.harmonic_dim(d, j) for j in range(m + 1))
        for d in d_list
        for m in range(0, 101)
    )
    yield "telescoping dimension", ok
    worst = 0.0
    for d in d_list:
        rule = polynomials.gauss_rule(d, 64)
        P = polynomials.legendre_table(d, 60, rule.nodes)
        M = (P * rule.weights) @ P.T
        nrm = np.sqrt(np.diag(M))
        off = np.abs(M - np.diag(np.diag(M))) / np.outer(nrm, nrm)
        worst = max(worst, off.max())
    yield f"orthogonality up to degree 60 (worst {worst:.1e})", worst <= 1e-10
    t = np.linspace(-1, 1, 10_001)
    ok = all(np.all(np.abs(polynomials.legendre_eval(d, m, t)) <= polynomials.harmonic_dim(d, m) * (1 + 1e-12)) for d in d_list for m in (3, 17, 40))
    yield "|p_m(t)| <= p_m(1)", ok


def _activation():
    worst = 0.0
    for d in (2, 3, 4):
        for k in (0, 1, 2):
            for m in range(k + 1, 61):
                if activation.index_set_member(k, m):
                    q = activation.coeff_quadrature(d, k, m)
                    worst = max(worst, abs(activation.coeff_closed_form(d, k, m) - q) / abs(q))
    yield f"closed form vs quadrature (worst {worst:.1e})", worst <= 1e-8
    worst = 0.0
    for d in (2, 3, 4):
        for k in (0, 1, 2):
            m = np.arange(k + 1, 201)
            m = m[(m - k) % 2 == 1]
            c = np.array([activation.coeff_closed_form(d, k, int(j)) for j in m])
            worst = max(worst, float(np.max(np.abs(activation.xi_eval(d, k, m) / c**2 - 1))))
    yield f"xi(m) = sigma_hat(m)^2 (worst {worst:.1e})", worst <= 1e-10
    ok = True
    for k in (0, 1, 2):
        t = activation.build_table(2, k, 120)
        for m in range(k + 1, 121):
            if activation.index_set_member(k, m):
                ok &= np.sign(t.coeffs[m]) == (-1) ** ((m - k - 1) // 2)
    yield "sign pattern on E_k", bool(ok)


def _cutoff():
    worst = max(abs(cutoff.partition_check(m, 40) - 1) for m in range(1, 10_001))
    yield f"partition of unity m <= 1e4 (worst {worst:.1e})", worst <= 1e-12
    worst = 0.0
    for k in (0, 1):
        ik = activation.parity_offset(k)
        for m in range(0, 400):
            deg = 2 * m + ik
            if deg <= k:
                continue
            s = sum(float(cutoff.phi_eval(q, 2, k, m * 2.0**-q)) for q in range(0, 12))
            worst = max(worst, abs(s / activation.xi_eval(2, k, deg) - 1))
    yield f"dyadic consistency (worst {worst:.1e})", worst <= 1e-12
    yield f"zeta positive on [3/5, 5/3] (c1 = {cutoff.positivity_constant():.3e})", cutoff.positivity_constant() > 0


def _sphere_points():
    a = sphere_points.generate_antipodal_quasiuniform(2, 256, 1)
    b = sphere_points.generate_antipodal_quasiuniform(2, 256, 1)
    yield "deterministic generation", bool(np.array_equal(a.points, b.points))
    rep = sphere_points.certify_uniformity(a)
    yield f"mesh ratio <= 4 at n=256 (measured {rep.mesh_ratio:.2f})", rep.mesh_ratio <= 4
    closed = a.prefix(8).with_antipodes()
    rep0 = sphere_points.certify_uniformity(closed)
    try:
        sphere_points.kappa_threshold(rep0)
        rejected = False
    except sphere_points.AntipodalDegeneracy:
        rejected = True
    yield "antipodal pair detected and kappa rejected", rep0.antipodal_violation and rejected


def _kernel_matrices():
    ps = sphere_points.generate_antipodal_quasiuniform(2, 100, 2)
    rep = sphere_points.certify_uniformity(ps)
    for k in (0, 1):
        scan = kernel_matrices.find_dominant_level(ps, k, rep)
        good = scan.q_found is not None and all(c.gershgorin_ok for c in scan.certificates)
        yield f"k={k}: dominant level found (q*={scan.q_found}) with Gershgorin consistency", good
    P = kernel_matrices.degree_block(ps, 9)
    lam = np.linalg.eigvalsh(P)[0]
    yield "degree block PSD", lam >= -1e-8 * polynomials.harmonic_dim(2, 9)
    prof = kernel_matrices.localization_profile(8, 2, 1, np.linspace(1e-4, np.pi - 1e-4, 8001))
    yield f"localization fit slope <= -2 at q=8 (slope {prof.slope:.2f})", prof.slope <= -2


def _approximation():
    ps = sphere_points.generate_antipodal_quasiuniform(2, 24, 3)
    table = activation.build_table(2, 1, 4096)
    a = np.random.default_rng(0).standard_normal(ps.n)
    exact = float(a @ relu_kernel(2, 1, ps.gram()) @ a)
    spectral = spectral_norm_sq(a, ps, table)
    yield f"spectral sum vs exact kernel (rel {abs(spectral - exact) / exact:.1e})", abs(spectral - exact) <= 1e-8 * exact
    target = make_sobolev_target(2, 1, 3.5, 64)
    sys = assemble_gram(ps, table, target)
    res = best_approx_error(sys)
    pyth = abs(res.error_sq + res.projection - sys.norm_sq_f) <= 1e-10 * sys.norm_sq_f
    yield "Pythagoras error^2 + b^T G^+ b = ||f||^2", pyth
    lo, hi = low_degree_energy(res.a, ps, table, 16)
    Q = kernel_matrices.assemble_dyadic_block(ps, 5, 2, 1)
    yield "high-frequency energy dominates a^T Q_q a", hi >= Q.quadform(res.a) - 1e-8 * (lo + hi)
    closed = ps.prefix(6).with_antipodes()
    mono = monomial_target(2, 1, closed.points[0])
    res0 = best_approx_error(assemble_gram(closed, table, mono))
    yield f"antipodal reconstruction (error {res0.error:.1e})", res0.error <= 1e-10 * res0.norm_f


def _experiments():
    n = np.array([32, 64, 128, 256, 512])
    slope, se, _ = fit_rate(n, 4 * n**-1.25)
    yield "fit recovers exact power law", abs(slope + 1.25) < 1e-12


SUITES = {
    "polynomials": _polynomials,
    "activation": _activation,
    "cutoff": _cutoff,
    "sphere_points": _sphere_points,
    "kernel_matrices": _kernel_matrices,
    "approximation": _approximation,
    "experiments": _experiments,
}


def run_suites(names):
    """Yield (suite, check, passed) for the named suites ("all" runs every suite)."""
    if "all" in names:
        names = list(SUITES)
    for name in names:
        if name not in SUITES:
            raise KeyError(name)
        for label, ok in SUITES[name]():
            yield name, label, bool(ok)
