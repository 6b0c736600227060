"""Numerical tolerances shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    symmetry: float = 1e-12
    min_eigenvalue: float = 1e-12
    # relative to the Frobenius norm of the input
    jacobi: float = 1e-12
    lp_feasibility: float = 1e-8
    lp_pivot: float = 1e-10
    lp_optimality: float = 1e-10
    lp_duality_gap: float = 1e-7
    lp_dual_sign: float = 1e-9
    association: float = 1e-6
    membership: float = 1e-9
    bis_equality: float = 1e-8
    gap_positive: float = 1e-9


TOL = Tolerances()
