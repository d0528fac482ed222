"""KdV hierarchy, pseudo-differential operators, N-soliton profiles and stationary equations."""

__version__ = "0.1.0"

from .diffalg import DiffPoly, ProfileSample, dp_add, dp_derive, dp_eval, dp_integrate_exact, dp_mul
from .psdo import (PsdOp, op_commutator, op_diff_part, op_inverse, op_minus_part, op_mul,
                   op_pow_frac, op_residue, op_root, op_sigma2)
from .hierarchy import (StationaryCoeffs, elementary_symmetric, gd_r_recur, gd_r_residue,
                        hierarchy_rhs, stationary_poly, stationary_residual)
from .soliton import (SolitonProfile, SolitonSpec, canonical_form, dressing_coeffs, is_nonsingular,
                      is_real, psi_eval, riccati_residual, time_shift, wronskian)

__all__ = [
    "DiffPoly", "ProfileSample", "dp_add", "dp_derive", "dp_eval", "dp_integrate_exact", "dp_mul",
    "PsdOp", "op_commutator", "op_diff_part", "op_inverse", "op_minus_part", "op_mul",
    "op_pow_frac", "op_residue", "op_root", "op_sigma2",
    "StationaryCoeffs", "elementary_symmetric", "gd_r_recur", "gd_r_residue", "hierarchy_rhs",
    "stationary_poly", "stationary_residual",
    "SolitonProfile", "SolitonSpec", "canonical_form", "dressing_coeffs", "is_nonsingular",
    "is_real", "psi_eval", "riccati_residual", "time_shift", "wronskian",
]
