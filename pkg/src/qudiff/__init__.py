"""Gaussian moment dynamics of coupled dissipative harmonic modes.

The package propagates first and second moments of N coupled modes
(regular oscillators or inverted barriers) under a quadratic Hamiltonian
with bilinear couplings and a Markovian dissipator, using exact
matrix-exponential formulas rather than stochastic sampling.
"""

from .dynamics import (DriftMatrix, MomentState, Stability, Trajectory,
                       drift_matrix, propagate_covariance, propagate_mean,
                       stability, steady_covariance, trajectory)
from .errors import (ConfigError, NumericalError, QudiffError,
                     UnstableDriftError, ValidationFailure)
from .gaussian import (GaussianState, asymptotic_energy, correlation_coefficient,
                       gibbs_targets, mean_energy, penetration_probability,
                       position_density, uncertainty_products, wigner_eval)
from .model import (DissipationParams, SystemParams, ValidationReport,
                    validate_dissipation, validate_hamiltonian, require_valid)
from .transport import (DiffusionMatrix, EinsteinReport, ResidualReport,
                        algebraic_residuals, diffusion_matrix,
                        einstein_deviation, fundamental_constraints)
from .units import HBAR_MEV_S, coth, unit_convert

__version__ = "0.1.0"

__all__ = [
    "HBAR_MEV_S", "coth", "unit_convert",
    "QudiffError", "ConfigError", "ValidationFailure", "NumericalError",
    "UnstableDriftError",
    "SystemParams", "DissipationParams", "ValidationReport",
    "validate_hamiltonian", "validate_dissipation", "require_valid",
    "DiffusionMatrix", "diffusion_matrix", "fundamental_constraints",
    "EinsteinReport", "einstein_deviation", "ResidualReport",
    "algebraic_residuals",
    "DriftMatrix", "drift_matrix", "MomentState", "Trajectory", "Stability",
    "stability", "steady_covariance", "propagate_mean", "propagate_covariance",
    "trajectory",
    "GaussianState", "wigner_eval", "position_density",
    "penetration_probability", "uncertainty_products",
    "correlation_coefficient", "gibbs_targets", "asymptotic_energy",
    "mean_energy",
    "__version__",
]
