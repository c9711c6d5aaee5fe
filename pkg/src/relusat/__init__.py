"""Saturation laboratory for linearized ReLU^k networks on the sphere S^d."""

__version__ = "0.1.0"

from .activation import build_table, coeff_closed_form, coeff_quadrature, xi_eval
from .approximation import assemble_gram, best_approx_error, make_sobolev_target, relu_kernel
from .experiments import fit_rate, run_rate_sweep
from .kernel_matrices import assemble_dyadic_block, certify_dominance, find_dominant_level
from .polynomials import harmonic_dim, legendre_eval
from .sphere_points import PointSet, certify_uniformity, generate_antipodal_quasiuniform, kappa_threshold

__all__ = [
    "PointSet", "assemble_dyadic_block", "assemble_gram", "best_approx_error", "build_table",
    "certify_dominance", "certify_uniformity", "coeff_closed_form", "coeff_quadrature",
    "find_dominant_level", "fit_rate", "generate_antipodal_quasiuniform", "harmonic_dim",
    "kappa_threshold", "legendre_eval", "make_sobolev_target", "relu_kernel", "run_rate_sweep", "xi_eval",
]
