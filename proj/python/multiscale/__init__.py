"""Monte Carlo experiments for slow-fast stochastic reaction-diffusion systems."""

from ._core import (
    Config,
    ConfigRejected,
    InvalidParameter,
    StateExplosion,
    __version__,
    analytic_fbar,
    compute_rho0,
    convergence_study,
    estimate_fbar,
    holder_stats,
    khasminskii_delta,
    khasminskii_study,
    moment_audit,
    simulate_trajectory,
    theta_stability,
)

__all__ = [
    "Config",
    "ConfigRejected",
    "InvalidParameter",
    "StateExplosion",
    "__version__",
    "analytic_fbar",
    "compute_rho0",
    "convergence_study",
    "estimate_fbar",
    "holder_stats",
    "khasminskii_delta",
    "khasminskii_study",
    "moment_audit",
    "simulate_trajectory",
    "theta_stability",
]
