"""Optimal local Gaussian preprocessing for continuous-variable teleportation.

Two-mode Gaussian states are handled through their 4x4 covariance matrices
(quadrature order ``x_a, p_a, x_b, p_b``; vacuum variance 1).
"""

from .errors import InvalidInputError, NumericalFailureError, OutOfDomainError, UnphysicalStateError
from .kernels import BACKEND
from .optimize import (
    FidelityBounds,
    OmegaThetaResult,
    OptimizationReport,
    SolverOptions,
    brute_force_optimal,
    fidelity_bounds,
    max_bound_gap,
    omega_theta,
    optimal_tgcp,
    upper_bound_achievable,
)
from .state import (
    TwoModeCM,
    from_blocks,
    invariants,
    is_entangled,
    log_negativity,
    make_cm,
    pt_spectrum,
    to_normal_form_eta,
    to_standard_form_I,
    to_standard_form_III,
    two_mode_squeezed,
)
from .teleport import (
    MinimalNoiseDecomposition,
    TgcpMap,
    apply_local_tgcp,
    attenuation_map,
    decompose_minimal_noise,
    fidelity_coherent,
    fidelity_gaussian_input,
    is_minimal_noise,
    isotropize_noise,
    noise_matrix,
    swap_cm,
    swap_nu,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FidelityBounds",
    "InvalidInputError",
    "MinimalNoiseDecomposition",
    "NumericalFailureError",
    "OmegaThetaResult",
    "OptimizationReport",
    "OutOfDomainError",
    "SolverOptions",
    "TgcpMap",
    "TwoModeCM",
    "UnphysicalStateError",
    "apply_local_tgcp",
    "attenuation_map",
    "brute_force_optimal",
    "decompose_minimal_noise",
    "fidelity_bounds",
    "fidelity_coherent",
    "fidelity_gaussian_input",
    "from_blocks",
    "invariants",
    "is_entangled",
    "is_minimal_noise",
    "isotropize_noise",
    "log_negativity",
    "make_cm",
    "max_bound_gap",
    "noise_matrix",
    "omega_theta",
    "optimal_tgcp",
    "pt_spectrum",
    "swap_cm",
    "swap_nu",
    "to_normal_form_eta",
    "to_standard_form_I",
    "to_standard_form_III",
    "two_mode_squeezed",
    "upper_bound_achievable",
]
