"""Recurrence coefficients of generalized Charlier and Meixner polynomials on bi-lattices.

Two independent routes to the same numbers: forward iteration of discrete
Painleve systems from closed-form initial values (:mod:`bilattice.painleve`)
and a Stieltjes procedure on the truncated discrete measure
(:mod:`bilattice.oracle`).  :mod:`bilattice.verify` checks one against the other
and against every known identity.
"""
from .errors import (BilatticeError, DegenerateError, LengthError, MonotonicityError, PoleError,
                     PositivityWarning, PrecisionError, RankError, SingularityError, ValidityError,
                     ZeroCountError)
from .measures import (INF, DiscreteMeasure, Family, FamilyParams, LatticeKind, LatticeSpec,
                       b0_initial, build_measure, closed_moments, ladder_potential, moment,
                       pearson_residual, weight_at)
from .oracle import (LadderDiagnostics, OrthoBasis, eval_monic, ladder_diagnostics,
                     oracle_coeffs, partial_sum_check, stieltjes_coeffs, structure_b_coeff, zeros)
from .painleve import (CoeffSeq, DP2Seq, PainleveRun, PrecisionPolicy, UVSeq,
                       beta_half_closed_form, certified_iterate, charlier_iterate, compare_coeffs,
                       dp2_reduce, meixner_iterate)
from .precision import PrecisionContext, bessel_i, gamma, kummer_m, parse_rational, pochhammer

__version__ = "0.1.0"

__all__ = [
    "BilatticeError", "DegenerateError", "LengthError", "MonotonicityError", "PoleError",
    "PositivityWarning", "PrecisionError", "RankError", "SingularityError", "ValidityError",
    "ZeroCountError",
    "INF", "DiscreteMeasure", "Family", "FamilyParams", "LatticeKind", "LatticeSpec",
    "b0_initial", "build_measure", "closed_moments", "ladder_potential", "moment",
    "pearson_residual", "weight_at",
    "LadderDiagnostics", "OrthoBasis", "eval_monic", "ladder_diagnostics", "oracle_coeffs",
    "partial_sum_check", "stieltjes_coeffs", "structure_b_coeff", "zeros",
    "CoeffSeq", "DP2Seq", "PainleveRun", "PrecisionPolicy", "UVSeq", "beta_half_closed_form",
    "certified_iterate", "charlier_iterate", "compare_coeffs", "dp2_reduce", "meixner_iterate",
    "PrecisionContext", "bessel_i", "gamma", "kummer_m", "parse_rational", "pochhammer",
]
