"""Canonical systems with piecewise-constant rank-one Hamiltonians.

Monodromy matrices, exponential type and order estimation, order-bound
certificates, string coverings, and the Jacobi-matrix correspondence.
"""

from .jacobi import (
    JacobiMatrix,
    berezanskii_log_deltas,
    birth_death,
    jacobi_to_hamiltonian,
    polys_at,
    theorem4_log_deltas,
    theorem4_residual,
)
from .kernels import KERNEL_IMPL
from .model import (
    ConstantMatrix,
    FiniteRankHamiltonian,
    RankOne,
    Segment,
    StringSpec,
    cantor_string,
    power_law_string,
    rank_one_segment,
    string_to_hamiltonian,
)
from .monodromy import (
    breakpoint_matrices,
    det_residual,
    energy_identity_residual,
    monodromy_eval,
    monodromy_poly,
)
from .orders import (
    OrderEstimate,
    default_tau_cap,
    geometric_grid,
    growth_curve,
    jacobi_order_lower_bound,
    kdb_type,
    order_fit,
    order_from_coefficients,
)
from .scaledarith import LogComplex, LogNumber, ScaledMatrix
from .certificates import (
    CertificateInstance,
    ConditionReport,
    builder_power_law,
    builder_threshold,
    builder_two_level,
    evaluate_conditions,
    fit_certificate,
)
from .stringorder import (
    Covering,
    covering_sum,
    greedy_covering,
    kats_order_functional,
    s_of,
    string_order_upper,
)

__version__ = "0.1.0"

__all__ = [
    "JacobiMatrix", "berezanskii_log_deltas", "birth_death",
    "jacobi_to_hamiltonian", "polys_at", "theorem4_log_deltas",
    "theorem4_residual", "KERNEL_IMPL", "ConstantMatrix",
    "FiniteRankHamiltonian", "RankOne", "Segment", "StringSpec",
    "cantor_string", "power_law_string", "rank_one_segment",
    "string_to_hamiltonian", "breakpoint_matrices", "det_residual",
    "energy_identity_residual", "monodromy_eval", "monodromy_poly",
    "OrderEstimate", "default_tau_cap", "geometric_grid", "growth_curve",
    "jacobi_order_lower_bound", "kdb_type", "order_fit",
    "order_from_coefficients", "LogComplex", "LogNumber", "ScaledMatrix",
    "CertificateInstance", "ConditionReport", "builder_power_law",
    "builder_threshold", "builder_two_level", "evaluate_conditions",
    "fit_certificate", "Covering", "covering_sum", "greedy_covering",
    "kats_order_functional", "s_of", "string_order_upper",
]
