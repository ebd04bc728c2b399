"""Extended-precision partial theta function toolkit.

theta(q, x) = sum_{j>=0} q^(j(j+1)/2) x^j, its real zeros and critical
points, the spectral values q~_j with double zeros y_j, the companion
roots r~_s, the psi/tau/h family and the asymptotic constants.
"""

# the module partheta.theta stays reachable as an attribute, so the
# function of the same name is not re-exported here
from .asymptotics import AsymptoticModel, FitResult, alpha_from_b, extract_constant, model_eval
from .kernel import BACKEND
from .numerics import (
    DEFAULT_CONTEXT,
    PrecisionBudgetError,
    PrecisionContext,
    SameSignError,
    SeriesResult,
    bracket_root,
    math_constants,
    sum_ratio_bounded_series,
)
from .psi import chi_s, lambda_s, psi_eval, tau_bundle, zeta_k
from .spectral import RTildeRecord, SpectralRecord, r_tilde, spectral_value, verify_ordering
from .theta import (
    ThetaQuery,
    critical_points,
    functional_equation_residual,
    real_zeros,
    theta_dx,
    theta_dxx,
    theta_eval,
    theta_jet,
    theta_product_eval,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticModel",
    "BACKEND",
    "DEFAULT_CONTEXT",
    "FitResult",
    "PrecisionBudgetError",
    "PrecisionContext",
    "RTildeRecord",
    "SameSignError",
    "SeriesResult",
    "SpectralRecord",
    "ThetaQuery",
    "alpha_from_b",
    "bracket_root",
    "chi_s",
    "critical_points",
    "extract_constant",
    "functional_equation_residual",
    "lambda_s",
    "math_constants",
    "model_eval",
    "psi_eval",
    "r_tilde",
    "real_zeros",
    "spectral_value",
    "sum_ratio_bounded_series",
    "tau_bundle",
    "theta_dx",
    "theta_dxx",
    "theta_eval",
    "theta_jet",
    "theta_product_eval",
    "verify_ordering",
    "zeta_k",
]
