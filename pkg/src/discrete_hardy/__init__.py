"""Lattice Schrodinger evolution and weighted-norm inequalities."""

from .convexity import (
    ConvexityReport,
    check_bridge,
    check_psipos,
    check_quadr,
    coeff_table,
    energy_estimate_check,
    fit_convexity_constants,
    log_convexity_scan,
    rho_bound,
    sweep_c0,
    vanishing_pressure,
)
from .evolution import (
    EvolutionTrace,
    ForcingProvider,
    PotentialProvider,
    StabilityError,
    extremizer,
    free_evolve,
    free_kernel,
    random_forcing,
    random_potential,
    step_evolve,
)
from .lattice import LatticeWindow, State, l2_norm, laplacian, weighted_norm_sq_log
from .logdomain import LogComplex, LogReal, logsumexp
from .rng import SplitMix64, stream
from .scattering import (
    ConvergenceError,
    DegenerateSystemError,
    casoratian,
    exp_type_from_coeffs,
    jost_solve,
    multiplier,
    phi_series,
    ray_growth,
    scattering_coeffs,
)
from .special import heat_kernel, log_bessel_i, log_bessel_j
from .weights import BridgeWeight, ConvexityWeight, EnergyWeight

__all__ = [
    "BridgeWeight", "ConvergenceError", "ConvexityReport", "ConvexityWeight", "DegenerateSystemError",
    "EnergyWeight", "EvolutionTrace", "ForcingProvider", "LatticeWindow", "LogComplex", "LogReal",
    "PotentialProvider", "SplitMix64", "StabilityError", "State", "casoratian", "check_bridge",
    "check_psipos", "check_quadr", "coeff_table", "energy_estimate_check", "exp_type_from_coeffs",
    "extremizer", "fit_convexity_constants", "free_evolve", "free_kernel", "heat_kernel", "jost_solve",
    "l2_norm", "laplacian", "log_bessel_i", "log_bessel_j", "log_convexity_scan", "logsumexp",
    "multiplier", "phi_series", "random_forcing", "random_potential", "ray_growth", "rho_bound",
    "scattering_coeffs", "step_evolve", "stream", "sweep_c0", "vanishing_pressure",
    "weighted_norm_sq_log",
]
