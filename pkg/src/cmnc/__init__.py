"""Singular moduli at desk scale: reduced forms, CM points, j-values,
Hilbert class polynomials, heights, norms of x - α, the counting function
C_ε(τ, Δ), and interval checks of the explicit constants that bound them."""

from .certify import CertReport, certify_range, constants_audit, main_theorem_check
from .classpoly import ClassPolynomial, hilbert_poly, norm_diff_rational_alpha, resultant
from .cmcount import EpsQuery, exact_count_eps, thm_bound_eps
from .disc import Discriminant, new_discriminant
from .errors import CmncError, ComputationError, ValidationError
from .forms import CMPoint, ExactPoint, QForm, class_number, enumerate_reduced
from .heights import height_diff_rational, height_singular
from .intarith import f_of_disc
from .jeval import eval_j

__version__ = "0.1.0"

__all__ = [
    "CMPoint",
    "CertReport",
    "ClassPolynomial",
    "CmncError",
    "ComputationError",
    "Discriminant",
    "EpsQuery",
    "ExactPoint",
    "QForm",
    "ValidationError",
    "certify_range",
    "class_number",
    "constants_audit",
    "enumerate_reduced",
    "eval_j",
    "exact_count_eps",
    "f_of_disc",
    "height_diff_rational",
    "height_singular",
    "hilbert_poly",
    "main_theorem_check",
    "new_discriminant",
    "norm_diff_rational_alpha",
    "resultant",
    "thm_bound_eps",
]
