"""Verification suites; each returns a :class:`~toricfact.report.VerificationReport`."""
from .algebraic import (
    connection_residual, sum_of_squares_residual, verify_anticommutator, verify_connection_condition,
    verify_curvature_obstruction, verify_factorization,
)
from .localization import (
    LocalizingElement, garding_ratios, kappa_bound, kappa_sup, localized_form_minimum, verify_garding,
    verify_local_positivity,
)
from .suites import (
    verify_commutator, verify_eigenfamily, verify_sphere_relations, verify_spectrum, verify_torus,
)

__all__ = [
    "LocalizingElement", "connection_residual", "garding_ratios", "kappa_bound", "kappa_sup",
    "localized_form_minimum", "sum_of_squares_residual", "verify_anticommutator", "verify_commutator",
    "verify_connection_condition", "verify_curvature_obstruction", "verify_eigenfamily",
    "verify_factorization", "verify_garding", "verify_local_positivity", "verify_sphere_relations",
    "verify_spectrum", "verify_torus",
]
